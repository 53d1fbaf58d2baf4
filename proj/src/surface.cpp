#include "geofill/surface.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace geofill {

namespace {

bool is_pm_identity(const Isometry& m, double tol = 1e-6) { return m.is_identity(tol); }

}  // namespace

// --- CurveWord ---

CurveWord CurveWord::cyclically_reduced() const {
    std::vector<int> w;
    for (int l : letters) {
        if (l == 0) throw Error("CurveWord: zero letter");
        if (!w.empty() && w.back() == -l) w.pop_back();
        else w.push_back(l);
    }
    while (w.size() >= 2 && w.front() == -w.back()) {
        w.erase(w.begin());
        w.pop_back();
    }
    return CurveWord(w);
}

bool CurveWord::is_cyclically_reduced() const {
    CurveWord r = cyclically_reduced();
    return r.letters == letters;
}

CurveWord CurveWord::inverse() const {
    std::vector<int> w(letters.rbegin(), letters.rend());
    for (int& l : w) l = -l;
    return CurveWord(w);
}

std::string CurveWord::str() const {
    std::string s;
    for (size_t i = 0; i < letters.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(letters[i]);
    }
    return s;
}

CurveWord CurveWord::parse(const std::string& s) {
    std::vector<int> w;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        int sign = 1;
        size_t i = 0;
        if (tok[0] == '-') { sign = -1; i = 1; }
        if (i >= tok.size()) throw Error("CurveWord::parse: bad token '" + tok + "'");
        if (std::isalpha(static_cast<unsigned char>(tok[i]))) {
            // letters: a..z are generators 1.., uppercase means inverse;
            // a token may concatenate several letters
            for (size_t j = i; j < tok.size(); ++j) {
                char c = tok[j];
                if (!std::isalpha(static_cast<unsigned char>(c)))
                    throw Error("CurveWord::parse: bad token '" + tok + "'");
                int ls = sign;
                if (std::isupper(static_cast<unsigned char>(c))) {
                    ls = -ls;
                    c = static_cast<char>(std::tolower(c));
                }
                w.push_back(ls * (c - 'a' + 1));
            }
        } else {
            size_t pos = 0;
            int v;
            try {
                v = std::stoi(tok.substr(i), &pos);
            } catch (const std::exception&) {
                throw Error("CurveWord::parse: bad token '" + tok + "'");
            }
            if (pos != tok.size() - i || v == 0)
                throw Error("CurveWord::parse: bad token '" + tok + "'");
            w.push_back(sign * v);
        }
    }
    if (w.empty()) throw Error("CurveWord::parse: empty word");
    return CurveWord(w);
}

// --- Surface construction ---

Surface::Surface(int genus, ConvexPolygon polygon, std::vector<int> partner,
                 std::vector<Isometry> gluings, std::map<std::string, CurveWord> named_words)
    : genus_(genus),
      poly_(std::move(polygon)),
      partner_(std::move(partner)),
      gluings_(std::move(gluings)),
      words_(std::move(named_words)) {
    int n = poly_.size();
    if (genus_ < 2) throw Error("Surface: genus must be at least 2");
    if (static_cast<int>(partner_.size()) != n || static_cast<int>(gluings_.size()) != n)
        throw Error("Surface: pairing data does not match polygon");

    side_letter_.assign(n, 0);
    for (int s = 0; s < n; ++s) {
        int t = partner_[s];
        if (t < 0 || t >= n || t == s || partner_[t] != s)
            throw Error("Surface: side pairing is not a fixed-point-free involution");
        if (s < t) {
            gen_side_.push_back(s);
            generators_.push_back(gluings_[s]);
        }
    }
    for (size_t k = 0; k < gen_side_.size(); ++k) {
        side_letter_[gen_side_[k]] = static_cast<int>(k) + 1;
        side_letter_[partner_[gen_side_[k]]] = -(static_cast<int>(k) + 1);
    }

    const HPoint x0 = poly_.interior_point();
    circumradius_ = 0.0;
    for (const HPoint& v : poly_.vertices()) circumradius_ = std::max(circumradius_, dist(x0, v));
    diameter_ = poly_.diameter();

    validate();
    build_relator();
}

void Surface::validate() const {
    int n = poly_.size();
    if (std::fabs(poly_.area() - area()) > 1e-6)
        throw Error("Surface: polygon area inconsistent with genus");
    for (int s = 0; s < n; ++s) {
        int t = partner_[s];
        const HPoint &vs = poly_.vertices()[s], &vs1 = poly_.vertices()[(s + 1) % n];
        const HPoint &vt = poly_.vertices()[t], &vt1 = poly_.vertices()[(t + 1) % n];
        if (dist(apply(gluings_[s], vs), vt1) > 1e-8 || dist(apply(gluings_[s], vs1), vt) > 1e-8)
            throw Error("Surface: gluing map does not carry side onto its partner");
        Isometry comp = gluings_[t] * gluings_[s];
        if (!is_pm_identity(comp, 1e-8))
            throw Error("Surface: paired gluing maps are not mutually inverse");
    }
    // every vertex cycle must close up with total angle 2 pi
    std::vector<bool> seen(n, false);
    for (int c0 = 0; c0 < n; ++c0) {
        if (seen[c0]) continue;
        Isometry u;
        double angle_sum = 0.0;
        int c = c0;
        int guard = 0;
        do {
            seen[c] = true;
            angle_sum += poly_.interior_angle(c);
            int s = (c + n - 1) % n;
            u = u * gluings_[s].inverse();
            c = partner_[s];
            if (++guard > 8 * n) throw Error("Surface: vertex cycle does not close");
        } while (c != c0);
        if (std::fabs(angle_sum - 2.0 * M_PI) > 1e-8)
            throw Error("Surface: vertex cycle angle sum is not 2 pi");
        if (!is_pm_identity(u, 1e-7))
            throw Error("Surface: vertex cycle holonomy is not the identity");
    }
}

void Surface::build_relator() {
    // cycle through corner 0; crossing side c-1 contributes that gluing inverse
    int n = poly_.size();
    std::vector<int> w;
    int c = 0;
    do {
        int s = (c + n - 1) % n;
        w.push_back(-side_letter_[s]);
        c = partner_[s];
    } while (c != 0 && static_cast<int>(w.size()) <= 8 * n);
    relator_ = CurveWord(w);
    if (!is_pm_identity(holonomy_of(relator_), 1e-7))
        throw Error("Surface: relator does not evaluate to the identity");
}

Surface Surface::from_polygon(int genus, ConvexPolygon polygon, std::vector<int> partner,
                              std::map<std::string, CurveWord> named_words) {
    int n = polygon.size();
    if (static_cast<int>(partner.size()) != n)
        throw Error("Surface: pairing data does not match polygon");
    std::vector<Isometry> gluings(n);
    std::vector<bool> done(n, false);
    for (int s = 0; s < n; ++s) {
        if (done[s]) continue;
        int t = partner[s];
        if (t < 0 || t >= n || t == s)
            throw Error("Surface: side pairing is not a fixed-point-free involution");
        const HPoint &vs = polygon.vertices()[s], &vs1 = polygon.vertices()[(s + 1) % n];
        const HPoint &vt = polygon.vertices()[t], &vt1 = polygon.vertices()[(t + 1) % n];
        gluings[s] = map_segment(vs, vs1, vt1, vt);
        gluings[t] = gluings[s].inverse();
        done[s] = done[t] = true;
    }
    return Surface(genus, std::move(polygon), std::move(partner), std::move(gluings),
                   std::move(named_words));
}

Surface Surface::bolza() {
    ConvexPolygon oct = regular_polygon(8, M_PI / 4);
    std::vector<int> partner = {4, 5, 6, 7, 0, 1, 2, 3};
    std::map<std::string, CurveWord> words;
    // shortest filling word found by exhaustive search over cyclically
    // reduced words through length 5 (complement = two disks)
    words["gamma0"] = CurveWord::parse("1 -4 -2 -3 -1 4");
    return from_polygon(2, std::move(oct), std::move(partner), std::move(words));
}

Isometry Surface::letter_iso(int letter) const {
    int k = std::abs(letter) - 1;
    if (letter == 0 || k >= generator_count())
        throw Error("letter_iso: letter out of range");
    return letter > 0 ? generators_[k] : generators_[k].inverse();
}

Isometry Surface::holonomy_of(const CurveWord& w) const {
    Isometry m;
    for (int l : w.letters) m = m * letter_iso(l);
    return m;
}

// --- canonical representatives ---

namespace {

struct Reduction {
    HPoint p{0, 1};
    Isometry iso;               // iso * input = p
    std::vector<int> letters;   // applied order; iso = M(l_last) * ... * M(l_first)
};

Reduction reduce_point(const Surface& s, const HPoint& p) {
    Reduction r;
    r.p = p;
    const HPoint x0 = s.polygon().interior_point();
    double dcur = dist(r.p, x0);
    for (int guard = 0; guard < 100000; ++guard) {
        int best = -1;
        double bd = dcur - 1e-13;
        HPoint bp = r.p;
        for (int t = 0; t < s.sides(); ++t) {
            HPoint q = apply(s.gluing(t), r.p);
            double dq = dist(q, x0);
            if (dq < bd) { bd = dq; best = t; bp = q; }
        }
        if (best < 0) break;
        r.p = bp;
        dcur = bd;
        r.iso = s.gluing(best) * r.iso;
        r.letters.push_back(s.side_letter(best));
    }
    if (!s.polygon().contains(r.p, 1e-9)) {
        // the polygon need not be the exact Dirichlet domain of its centroid;
        // rescue with a short product
        for (int t1 = 0; t1 < s.sides(); ++t1) {
            HPoint q1 = apply(s.gluing(t1), r.p);
            if (s.polygon().contains(q1, 1e-9)) {
                r.p = q1;
                r.iso = s.gluing(t1) * r.iso;
                r.letters.push_back(s.side_letter(t1));
                return r;
            }
        }
        for (int t1 = 0; t1 < s.sides(); ++t1) {
            HPoint q1 = apply(s.gluing(t1), r.p);
            for (int t2 = 0; t2 < s.sides(); ++t2) {
                HPoint q2 = apply(s.gluing(t2), q1);
                if (s.polygon().contains(q2, 1e-9)) {
                    r.p = q2;
                    r.iso = s.gluing(t2) * (s.gluing(t1) * r.iso);
                    r.letters.push_back(s.side_letter(t1));
                    r.letters.push_back(s.side_letter(t2));
                    return r;
                }
            }
        }
        throw Error("canonicalize: reduction to the fundamental polygon failed");
    }
    return r;
}

}  // namespace

std::pair<SurfacePoint, Isometry> Surface::canonicalize(const HPoint& p) const {
    Reduction r = reduce_point(*this, p);
    // boundary ownership: lowest side index wins
    for (int pass = 0; pass < 2 * sides(); ++pass) {
        int move = -1;
        for (int t = 0; t < sides(); ++t) {
            if (partner_[t] >= t) continue;
            if (dist_to_geodesic(poly_.side_geodesics()[t], r.p) < 1e-9) {
                // confirm the point is on the actual side, not its extension
                HSegment seg = poly_.side(t);
                const HGeodesic& sg = poly_.side_geodesics()[t];
                double u = param_of(sg, r.p);
                double ua = param_of(sg, seg.a), ub = param_of(sg, seg.b);
                if (u >= std::min(ua, ub) - 1e-9 && u <= std::max(ua, ub) + 1e-9) {
                    move = t;
                    break;
                }
            }
        }
        if (move < 0) break;
        r.p = apply(gluings_[move], r.p);
        r.iso = gluings_[move] * r.iso;
    }
    return {SurfacePoint{r.p}, r.iso};
}

// --- group enumeration ---

namespace {

struct MatKey {
    std::array<int64_t, 4> k;
    bool operator==(const MatKey&) const = default;
};

struct MatKeyHash {
    size_t operator()(const MatKey& m) const {
        uint64_t h = 0x9e3779b97f4a7c15ull;
        for (int64_t v : m.k) {
            uint64_t x = static_cast<uint64_t>(v) + h;
            x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
            x ^= x >> 27; x *= 0x94d049bb133111ebull;
            x ^= x >> 31;
            h = x;
        }
        return static_cast<size_t>(h);
    }
};

// sign-normalized entries and their relative quantization
std::array<double, 4> signed_entries(const Isometry& m) {
    std::array<double, 4> e = {m.a, m.b, m.c, m.d};
    double mx = 0.0;
    for (double v : e) mx = std::max(mx, std::fabs(v));
    double flip = 1.0;
    for (double v : e) {
        if (std::fabs(v) > 1e-3 * mx) { flip = (v < 0.0) ? -1.0 : 1.0; break; }
    }
    for (double& v : e) v *= flip;
    return e;
}

class IsometrySet {
  public:
    // returns false when an element within relative tolerance already exists
    bool insert(const Isometry& m) {
        std::array<double, 4> e = signed_entries(m);
        double scale = 1.0;
        for (double v : e) scale = std::max(scale, std::fabs(v));
        double cell = 1e-8 * scale;
        std::array<double, 4> q;
        for (int i = 0; i < 4; ++i) q[i] = e[i] / cell;

        // probe neighbors only near cell boundaries
        std::array<std::array<int64_t, 2>, 4> cand{};
        std::array<int, 4> ncand{};
        for (int i = 0; i < 4; ++i) {
            int64_t f = static_cast<int64_t>(std::floor(q[i]));
            double frac = q[i] - static_cast<double>(f);
            cand[i][0] = f;
            ncand[i] = 1;
            if (frac < 1e-4) { cand[i][1] = f - 1; ncand[i] = 2; }
            else if (frac > 1.0 - 1e-4) { cand[i][1] = f + 1; ncand[i] = 2; }
        }
        for (int i0 = 0; i0 < ncand[0]; ++i0)
            for (int i1 = 0; i1 < ncand[1]; ++i1)
                for (int i2 = 0; i2 < ncand[2]; ++i2)
                    for (int i3 = 0; i3 < ncand[3]; ++i3) {
                        MatKey key{{cand[0][i0], cand[1][i1], cand[2][i2], cand[3][i3]}};
                        auto it = map_.find(key);
                        if (it == map_.end()) continue;
                        for (const auto& other : it->second) {
                            bool close = true;
                            for (int j = 0; j < 4; ++j)
                                if (std::fabs(other[j] - e[j]) > 1e-9 * scale) { close = false; break; }
                            if (close) return false;
                        }
                    }
        MatKey base{{cand[0][0], cand[1][0], cand[2][0], cand[3][0]}};
        map_[base].push_back(e);
        return true;
    }

  private:
    std::unordered_map<MatKey, std::vector<std::array<double, 4>>, MatKeyHash> map_;
};

}  // namespace

std::vector<GroupElement> Surface::enumerate_elements(const HPoint& center,
                                                      double accept_radius) const {
    if (accept_radius > lift_cap_)
        throw RadiusCapExceeded("enumerate_elements: radius " + std::to_string(accept_radius) +
                                " exceeds cap " + std::to_string(lift_cap_));
    const HPoint x0 = poly_.interior_point();
    // extra slack keeps the accepted set connected through adjacent translates
    const double explore = accept_radius + circumradius_ + 0.5;

    struct Node {
        Isometry iso;
        int parent = -1;
        int letter = 0;
        double d = 0.0;
    };
    std::vector<Node> nodes;
    std::vector<int> root_word_of;  // index into root_words, or -1
    std::vector<std::vector<int>> root_words;
    IsometrySet seen;

    auto try_add = [&](const Isometry& m, int parent, int letter, int root_word) {
        double d = dist(center, apply(m, x0));
        if (d > explore) return;
        if (!seen.insert(m)) return;
        nodes.push_back({m, parent, letter, d});
        root_word_of.push_back(root_word);
    };

    try_add(Isometry::identity(), -1, 0, -1);
    Reduction red = reduce_point(*this, center);
    if (!red.letters.empty()) {
        // seed at the translate whose tile contains the center
        std::vector<int> w;
        for (int l : red.letters) w.push_back(-l);
        root_words.push_back(w);
        try_add(red.iso.inverse(), -1, 0, 0);
    }

    int letters = 2 * generator_count();
    for (size_t i = 0; i < nodes.size(); ++i) {
        Isometry cur = nodes[i].iso;  // copy: nodes may reallocate
        for (int li = 0; li < letters; ++li) {
            int letter = (li < generator_count()) ? li + 1 : -(li - generator_count() + 1);
            try_add(cur * letter_iso(letter), static_cast<int>(i), letter, -1);
        }
    }

    std::vector<GroupElement> out;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].d > accept_radius) continue;
        GroupElement g;
        g.iso = nodes[i].iso;
        std::vector<int> rev;
        int cur = static_cast<int>(i);
        while (nodes[cur].parent >= 0) {
            rev.push_back(nodes[cur].letter);
            cur = nodes[cur].parent;
        }
        if (root_word_of[cur] >= 0) g.word = root_words[root_word_of[cur]];
        g.word.insert(g.word.end(), rev.rbegin(), rev.rend());
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GroupElement> Surface::lifts_within(const HPoint& center, double radius) const {
    if (radius > lift_cap_)
        throw RadiusCapExceeded("lifts_within: radius " + std::to_string(radius) +
                                " exceeds cap " + std::to_string(lift_cap_));
    return enumerate_elements(center, radius + diameter_);
}

// --- geodesics ---

ClosedGeodesic geodesic_of(const CurveWord& w, const Surface& s) {
    CurveWord r = w.cyclically_reduced();
    if (r.letters.empty()) throw TrivialOrNonHyperbolicWord("word reduces to the identity");
    for (int l : r.letters)
        if (std::abs(l) > s.generator_count())
            throw Error("geodesic_of: letter out of range");
    Isometry h = s.holonomy_of(r);
    auto len = translation_length(h);
    if (!len) throw TrivialOrNonHyperbolicWord("holonomy is not hyperbolic");
    return {r, h, axis_of(h), *len};
}

namespace {

struct ClipDetail {
    double t_in = 0.0, t_out = 0.0;
    int side_in = -1, side_out = -1;
};

// clip in the Klein model, where the geodesic and the sides are straight chords
std::optional<ClipDetail> clip_detail(const HGeodesic& g, const ConvexPolygon& poly) {
    double ax, ay, bx, by;
    ideal_to_klein(g.e1, ax, ay);
    ideal_to_klein(g.e2, bx, by);
    double dx = bx - ax, dy = by - ay;

    int n = poly.size();
    double ulo = 0.0, uhi = 1.0;
    int slo = -1, shi = -1;
    for (int i = 0; i < n; ++i) {
        double px, py, qx, qy;
        to_klein(poly.vertices()[i], px, py);
        to_klein(poly.vertices()[(i + 1) % n], qx, qy);
        // interior on the left of each ccw-directed side
        double ex = qx - px, ey = qy - py;
        double f0 = ex * (ay - py) - ey * (ax - px);
        double f1 = ex * (by - py) - ey * (bx - px);
        double df = f1 - f0;
        if (std::fabs(df) < 1e-300) {
            if (f0 < 0.0) return std::nullopt;
            continue;
        }
        double u = -f0 / df;
        if (df > 0.0) {
            if (u > ulo) { ulo = u; slo = i; }
        } else {
            if (u < uhi) { uhi = u; shi = i; }
        }
        if (ulo >= uhi) return std::nullopt;
    }
    if (uhi - ulo < 1e-14 || slo < 0 || shi < 0) return std::nullopt;

    auto at = [&](double u) {
        double kx = ax + u * dx, ky = ay + u * dy;
        double r2 = kx * kx + ky * ky;
        if (r2 >= 1.0 - 1e-14) return std::optional<HPoint>();
        return std::optional<HPoint>(klein_to_hplane(kx, ky));
    };
    auto pin = at(ulo), pout = at(uhi);
    if (!pin || !pout) return std::nullopt;
    ClipDetail c;
    c.t_in = param_of(g, *pin);
    c.t_out = param_of(g, *pout);
    c.side_in = slo;
    c.side_out = shi;
    if (c.t_out <= c.t_in) return std::nullopt;
    return c;
}

}  // namespace

std::optional<std::pair<double, double>> clip_to_polygon(const HGeodesic& g,
                                                         const ConvexPolygon& poly) {
    auto c = clip_detail(g, poly);
    if (!c) return std::nullopt;
    return std::make_pair(c->t_in, c->t_out);
}

namespace {

// index of the polygon side whose complete geodesic coincides with g, or -1
int coincident_side(const HGeodesic& g, const ConvexPolygon& poly) {
    int n = poly.size();
    for (int i = 0; i < n; ++i) {
        const HPoint& a = poly.vertices()[i];
        const HPoint& b = poly.vertices()[(i + 1) % n];
        if (dist_to_geodesic(g, a) < 1e-9 && dist_to_geodesic(g, b) < 1e-9) return i;
    }
    return -1;
}

// parameter interval of g inside the polygon closure, working both for
// interior-crossing geodesics and for geodesics running along a side
std::optional<ClipDetail> clip_or_side(const HGeodesic& g, const ConvexPolygon& poly) {
    int bs = coincident_side(g, poly);
    if (bs >= 0) {
        int n = poly.size();
        double ua = param_of(g, poly.vertices()[bs]);
        double ub = param_of(g, poly.vertices()[(bs + 1) % n]);
        ClipDetail c;
        c.t_in = std::min(ua, ub);
        c.t_out = std::max(ua, ub);
        c.side_in = c.side_out = bs;
        return c;
    }
    return clip_detail(g, poly);
}

bool forward_room(const Surface& s, const HGeodesic& g, const HPoint& p) {
    if (!s.polygon().contains(p, 1e-7)) return false;
    auto c = clip_or_side(g, s.polygon());
    if (!c) return false;
    double tp = param_of(g, p);
    return tp >= c->t_in - 1e-6 && tp < c->t_out - 1e-9;
}

// When the trace leaves the polygon exactly through a vertex, the single
// exit-side gluing may land on a tile the geodesic only touches. Search short
// gluing products for one that continues the ray with positive length.
bool resolve_vertex_crossing(const Surface& s, HGeodesic& cur, HPoint& pt,
                             std::vector<int>& letters) {
    struct State {
        HGeodesic g;
        HPoint p;
        std::vector<int> sides;
    };
    std::vector<State> frontier = {{cur, pt, {}}};
    for (int depth = 1; depth <= 4; ++depth) {
        std::vector<State> next_frontier;
        for (const State& st : frontier) {
            for (int t = 0; t < s.sides(); ++t) {
                State cand{apply_geodesic(s.gluing(t), st.g), apply(s.gluing(t), st.p), st.sides};
                cand.sides.push_back(t);
                if (forward_room(s, cand.g, cand.p)) {
                    cur = cand.g;
                    pt = cand.p;
                    for (int side : cand.sides)
                        letters.push_back(s.side_letter(s.partner(side)));
                    return true;
                }
                next_frontier.push_back(std::move(cand));
            }
        }
        frontier = std::move(next_frontier);
    }
    return false;
}

}  // namespace

TracedGeodesic trace_geodesic(const ClosedGeodesic& g, const Surface& s) {
    return trace_geodesic(g.axis, g.length, s);
}

TracedGeodesic trace_geodesic(const HGeodesic& axis, double length, const Surface& s) {
    HPoint p0 = point_at(axis, 0.0);
    auto [sp, h] = s.canonicalize(p0);
    HGeodesic cur = apply_geodesic(h, axis);

    HPoint pt = sp.rep;
    auto c0 = clip_or_side(cur, s.polygon());
    if (!c0) {
        // the lift touches the polygon only at a vertex; reposition first
        std::vector<int> dummy;
        if (!resolve_vertex_crossing(s, cur, pt, dummy))
            throw TracingDidNotClose("positioned lift misses the polygon");
        c0 = clip_or_side(cur, s.polygon());
        if (!c0) throw TracingDidNotClose("positioned lift misses the polygon");
    }
    pt = point_at(cur, c0->t_in);
    HPoint start = pt;
    double stx, sty;
    tangent_at(cur, start, stx, sty);

    auto closes = [&](const HGeodesic& gg, const HPoint& qq) {
        if (dist(qq, start) > 1e-6) return false;
        double ntx, nty;
        tangent_at(gg, qq, ntx, nty);
        return ntx * stx + nty * sty > 0.9;
    };

    TracedGeodesic out;
    double total = 0.0;
    double L = length;
    double tol = 1e-6 * std::max(1.0, L);
    int max_arcs = 1000 + static_cast<int>(100.0 * L);
    for (int arc = 0; arc < max_arcs; ++arc) {
        if (total >= L - tol) {
            if (total > L + tol)
                throw TracingDidNotClose("trace exceeded the geodesic length without closing");
            // the endpoint may be a boundary point whose representative
            // differs from the start by a deck transformation; search reps
            // near the polygon, recording the letters of the translation
            struct CNode {
                HGeodesic g;
                HPoint p;
                Isometry acc;
                std::vector<int> letters;
            };
            const HPoint x0 = s.polygon().interior_point();
            double prune = s.circumradius() + 1.5;
            std::vector<CNode> reps = {{cur, pt, Isometry::identity(), {}}};
            IsometrySet visited;  // keyed on the rep translation
            visited.insert(reps[0].acc);
            bool closed = false;
            for (size_t ri = 0; ri < reps.size() && ri < 20000; ++ri) {
                CNode node = reps[ri];
                if (closes(node.g, node.p)) {
                    out.word.letters.insert(out.word.letters.end(), node.letters.begin(),
                                            node.letters.end());
                    closed = true;
                    break;
                }
                for (int t = 0; t < s.sides(); ++t) {
                    HPoint q2 = apply(s.gluing(t), node.p);
                    if (dist(q2, x0) > prune) continue;
                    CNode child{apply_geodesic(s.gluing(t), node.g), q2,
                                s.gluing(t) * node.acc, node.letters};
                    if (!visited.insert(child.acc)) continue;
                    child.letters.push_back(s.side_letter(s.partner(t)));
                    reps.push_back(std::move(child));
                }
            }
            if (closed) {
                out.total_length = total;
                return out;
            }
        }

        auto c = clip_or_side(cur, s.polygon());
        double tp = c ? param_of(cur, pt) : 0.0;
        if (!c || tp > c->t_out - 1e-9) {
            if (!resolve_vertex_crossing(s, cur, pt, out.word.letters))
                throw TracingDidNotClose("stuck at a vertex crossing");
            continue;
        }
        if (tp < c->t_in - 1e-6)
            throw TracingDidNotClose("entry point inconsistent with the clipped arc");

        out.arcs.push_back({pt, point_at(cur, c->t_out)});
        out.arc_lifts.push_back(cur);
        out.exit_sides.push_back(c->side_out);
        total += c->t_out - tp;

        if (coincident_side(cur, s.polygon()) >= 0) {
            // boundary-running arc: continue from the far vertex, letting the
            // vertex resolution pick the continuation tile and its letters
            pt = out.arcs.back().b;
        } else {
            out.word.letters.push_back(s.side_letter(s.partner(c->side_out)));
            pt = apply(s.gluing(c->side_out), out.arcs.back().b);
            cur = apply_geodesic(s.gluing(c->side_out), cur);
        }
    }
    throw TracingDidNotClose("arc limit exceeded");
}

TracedGeodesic trace_ray(const HPoint& p, double tx, double ty, double length,
                         const Surface& s) {
    if (!(length > 0.0)) throw OutOfRange("trace_ray: nonpositive length");
    HGeodesic ray = geodesic_from_direction(p, tx, ty);
    auto [sp, G] = s.canonicalize(p);
    HGeodesic cur = apply_geodesic(G, ray);
    HPoint pt = sp.rep;

    TracedGeodesic out;
    double s_at_pt = 0.0;
    int max_arcs = 1000 + static_cast<int>(100.0 * length);
    for (int arc = 0; arc < max_arcs && s_at_pt < length - 1e-12; ++arc) {
        auto c = clip_or_side(cur, s.polygon());
        double tp = c ? param_of(cur, pt) : 0.0;
        if (!c || tp > c->t_out - 1e-9) {
            if (!resolve_vertex_crossing(s, cur, pt, out.word.letters))
                throw TracingDidNotClose("ray stuck at a vertex crossing");
            continue;
        }
        double t_stop = std::min(c->t_out, tp + (length - s_at_pt));
        out.arcs.push_back({pt, point_at(cur, t_stop)});
        out.arc_lifts.push_back(cur);
        out.exit_sides.push_back(t_stop == c->t_out ? c->side_out : -1);
        s_at_pt += t_stop - tp;
        if (t_stop < c->t_out) break;
        if (coincident_side(cur, s.polygon()) >= 0) {
            pt = point_at(cur, c->t_out);
        } else {
            out.word.letters.push_back(s.side_letter(s.partner(c->side_out)));
            pt = apply(s.gluing(c->side_out), point_at(cur, c->t_out));
            cur = apply_geodesic(s.gluing(c->side_out), cur);
        }
    }
    out.total_length = s_at_pt;
    return out;
}

std::vector<RayCrossing> trace_ray_crossings(const HPoint& p, double tx, double ty,
                                             double length, const TracedGeodesic& target,
                                             const Surface& s) {
    HGeodesic ray = geodesic_from_direction(p, tx, ty);
    auto [sp, G] = s.canonicalize(p);
    HGeodesic cur = apply_geodesic(G, ray);
    HPoint pt = sp.rep;
    Isometry B = G.inverse();  // maps the current frame back to the start frame

    int m = static_cast<int>(target.arcs.size());
    std::vector<double> ta(m), tb(m), cum(m);
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        ta[j] = param_of(target.arc_lifts[j], target.arcs[j].a);
        tb[j] = param_of(target.arc_lifts[j], target.arcs[j].b);
        cum[j] = acc;
        acc += tb[j] - ta[j];
    }

    std::vector<RayCrossing> out;
    double s_at_pt = 0.0;
    int max_arcs = 1000 + static_cast<int>(100.0 * length);
    for (int arc = 0; arc < max_arcs && s_at_pt < length; ++arc) {
        auto c = clip_or_side(cur, s.polygon());
        double tp = c ? param_of(cur, pt) : 0.0;
        if (!c || tp > c->t_out - 1e-9) {
            std::vector<int> letters;
            if (!resolve_vertex_crossing(s, cur, pt, letters))
                throw TracingDidNotClose("ray stuck at a vertex crossing");
            for (int l : letters) B = B * s.letter_iso(l);
            continue;
        }
        double t_stop = std::min(c->t_out, tp + (length - s_at_pt));
        for (int j = 0; j < m; ++j) {
            auto x = intersect(cur, target.arc_lifts[j]);
            if (!x) continue;
            double txp = param_of(cur, *x);
            if (txp <= tp + 1e-9 || txp > t_stop + 1e-9) continue;
            double u = param_of(target.arc_lifts[j], *x);
            if (u < ta[j] - 1e-9 || u >= tb[j] - 1e-9) continue;
            RayCrossing rc;
            rc.s = s_at_pt + (txp - tp);
            rc.s_target = cum[j] + (u - ta[j]);
            try {
                rc.angle = angle_at(cur, target.arc_lifts[j], *x);
            } catch (const Error&) {
                continue;  // tangential contact, not a transverse crossing
            }
            rc.side = side_of(target.arc_lifts[j], point_at(cur, txp - 1e-5));
            rc.point = *x;
            rc.flank = target.arc_lifts[j];
            rc.frame = B;
            out.push_back(rc);
        }
        s_at_pt += c->t_out - tp;
        if (coincident_side(cur, s.polygon()) >= 0) {
            pt = point_at(cur, c->t_out);
        } else {
            pt = apply(s.gluing(c->side_out), point_at(cur, c->t_out));
            cur = apply_geodesic(s.gluing(c->side_out), cur);
            B = B * s.gluing(c->side_out).inverse();
        }
    }
    std::sort(out.begin(), out.end(),
              [](const RayCrossing& a, const RayCrossing& b) { return a.s < b.s; });
    return out;
}

// --- metric quantities ---

double surface_distance(const SurfacePoint& p, const SurfacePoint& q, const Surface& s) {
    double d0 = dist(p.rep, q.rep);
    if (d0 == 0.0) return 0.0;
    auto els = s.enumerate_elements(p.rep, d0 + s.circumradius() + 0.1);
    double best = d0;
    for (const GroupElement& g : els) best = std::min(best, dist(p.rep, apply(g.iso, q.rep)));
    return best;
}

double injectivity_radius(const Surface& s) {
    double cand = std::numeric_limits<double>::infinity();
    for (const Isometry& g : s.generators()) {
        auto l = translation_length(g);
        if (!l) throw Error("injectivity_radius: non-hyperbolic generator");
        cand = std::min(cand, *l);
    }
    // a shortest geodesic has a lift meeting the polygon; its holonomy then
    // displaces the centroid by at most its length plus twice the circumradius
    double need = cand + 2.0 * s.circumradius() + 0.2;
    if (need > s.lift_radius_cap())
        throw CutoffInsufficient("injectivity_radius: required enumeration radius " +
                                 std::to_string(need) + " exceeds cap");
    auto els = s.enumerate_elements(s.polygon().interior_point(), need);
    double sys = cand;
    for (const GroupElement& g : els) {
        if (g.iso.is_identity(1e-9)) continue;
        auto l = translation_length(g.iso);
        if (!l) throw Error("injectivity_radius: non-hyperbolic group element");
        sys = std::min(sys, *l);
    }
    return 0.5 * sys;
}

// --- lifts of a closed geodesic and complementary faces ---

namespace {

// dedup complete geodesics via Klein boundary angles of the endpoint pair
class GeodesicSet {
  public:
    bool insert(const HGeodesic& g) {
        double a1 = klein_angle(g.e1), a2 = klein_angle(g.e2);
        if (a1 > a2) std::swap(a1, a2);
        const double cell = 1e-11;
        std::array<double, 2> q = {a1 / cell, a2 / cell};
        std::array<std::array<int64_t, 2>, 2> cand{};
        std::array<int, 2> ncand{};
        for (int i = 0; i < 2; ++i) {
            int64_t f = static_cast<int64_t>(std::floor(q[i]));
            double frac = q[i] - static_cast<double>(f);
            cand[i][0] = f;
            ncand[i] = 1;
            if (frac < 0.05) { cand[i][1] = f - 1; ncand[i] = 2; }
            else if (frac > 0.95) { cand[i][1] = f + 1; ncand[i] = 2; }
        }
        for (int i0 = 0; i0 < ncand[0]; ++i0)
            for (int i1 = 0; i1 < ncand[1]; ++i1) {
                MatKey key{{cand[0][i0], cand[1][i1], 0, 0}};
                auto it = map_.find(key);
                if (it == map_.end()) continue;
                for (const auto& other : it->second)
                    if (std::fabs(other[0] - a1) < 1e-12 && std::fabs(other[1] - a2) < 1e-12)
                        return false;
            }
        MatKey base{{cand[0][0], cand[1][0], 0, 0}};
        map_[base].push_back({a1, a2});
        return true;
    }

  private:
    static double klein_angle(const IdealPoint& e) {
        double kx, ky;
        ideal_to_klein(e, kx, ky);
        return std::atan2(ky, kx);
    }
    std::unordered_map<MatKey, std::vector<std::array<double, 2>>, MatKeyHash> map_;
};

}  // namespace

std::vector<HGeodesic> lifts_of_geodesic(const ClosedGeodesic& g0, const Surface& s,
                                         double radius) {
    TracedGeodesic tr = trace_geodesic(g0, s);
    GeodesicSet base_set;
    std::vector<HGeodesic> base;
    for (const HGeodesic& l : tr.arc_lifts)
        if (base_set.insert(l)) base.push_back(l);

    const HPoint x0 = s.polygon().interior_point();
    auto els = s.enumerate_elements(x0, radius + s.circumradius() + 0.1);
    GeodesicSet seen;
    std::vector<HGeodesic> out;
    for (const GroupElement& g : els) {
        for (const HGeodesic& b : base) {
            HGeodesic lift = apply_geodesic(g.iso, b);
            if (dist_to_geodesic(lift, x0) > radius) continue;
            if (seen.insert(lift)) out.push_back(lift);
        }
    }
    return out;
}

namespace {

struct KPoint {
    double x, y;
};

// Sutherland-Hodgman clip of a convex region by the half-plane bounded by the
// chord (a, b) that contains the seed
void clip_by_chord(std::vector<KPoint>& poly, const KPoint& a, const KPoint& b, double side) {
    if (poly.empty()) return;
    double ex = b.x - a.x, ey = b.y - a.y;
    auto val = [&](const KPoint& p) { return (ex * (p.y - a.y) - ey * (p.x - a.x)) * side; };
    std::vector<KPoint> out;
    out.reserve(poly.size() + 2);
    int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const KPoint& p = poly[i];
        const KPoint& q = poly[(i + 1) % n];
        double fp = val(p), fq = val(q);
        if (fp >= 0.0) out.push_back(p);
        if ((fp >= 0.0) != (fq >= 0.0)) {
            double t = fp / (fp - fq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    poly = std::move(out);
}

}  // namespace

std::vector<ConvexPolygon> complementary_polygons(const ClosedGeodesic& g0, const Surface& s) {
    const ConvexPolygon& P = s.polygon();
    const HPoint x0 = P.interior_point();

    double reach = s.circumradius() + s.diameter() + 0.2;
    const double reach_limit = s.lift_radius_cap() - 1.0;

    for (int attempt = 0; attempt < 8; ++attempt) {
        if (reach > reach_limit)
            throw NotFilling("complementary face not compact within the enumeration cap");

        auto lifts = lifts_of_geodesic(g0, s, reach);
        struct Chord {
            KPoint a, b;
        };
        std::vector<Chord> chords;
        chords.reserve(lifts.size());
        for (const HGeodesic& l : lifts) {
            Chord c;
            ideal_to_klein(l.e1, c.a.x, c.a.y);
            ideal_to_klein(l.e2, c.b.x, c.b.y);
            chords.push_back(c);
        }

        std::vector<ConvexPolygon> faces;
        std::vector<HPoint> keys;
        double covered = 0.0;
        double max_seen = 0.0;
        bool enlarged = false;

        // Klein bounding box of the fundamental polygon
        double bx0 = 1.0, bx1 = -1.0, by0 = 1.0, by1 = -1.0;
        for (const HPoint& v : P.vertices()) {
            double kx, ky;
            to_klein(v, kx, ky);
            bx0 = std::min(bx0, kx); bx1 = std::max(bx1, kx);
            by0 = std::min(by0, ky); by1 = std::max(by1, ky);
        }

        auto try_seed = [&](double kx, double ky) {
            if (kx * kx + ky * ky >= 1.0 - 1e-9) return;
            HPoint q = klein_to_hplane(kx, ky);
            if (!P.contains(q)) return;
            // stay clear of the arrangement itself
            for (const Chord& c : chords) {
                double ex = c.b.x - c.a.x, ey = c.b.y - c.a.y;
                double d = std::fabs(ex * (ky - c.a.y) - ey * (kx - c.a.x)) / std::hypot(ex, ey);
                if (d < 1e-6) return;
            }

            std::vector<KPoint> region = {{-1.05, -1.05}, {1.05, -1.05}, {1.05, 1.05}, {-1.05, 1.05}};
            KPoint kq{kx, ky};
            double rbound = 4.0;
            for (const Chord& c : chords) {
                double ex = c.b.x - c.a.x, ey = c.b.y - c.a.y;
                double d = std::fabs(ex * (kq.y - c.a.y) - ey * (kq.x - c.a.x)) / std::hypot(ex, ey);
                if (d > rbound) continue;
                double side = (ex * (kq.y - c.a.y) - ey * (kq.x - c.a.x)) > 0.0 ? 1.0 : -1.0;
                clip_by_chord(region, c.a, c.b, side);
                if (region.size() < 3) return;
                rbound = 0.0;
                for (const KPoint& v : region)
                    rbound = std::max(rbound, std::hypot(v.x - kq.x, v.y - kq.y));
            }

            std::vector<HPoint> verts;
            for (const KPoint& v : region) {
                if (v.x * v.x + v.y * v.y >= 1.0 - 1e-7)
                    throw NotFilling("unbounded complementary face");
                verts.push_back(klein_to_hplane(v.x, v.y));
            }
            for (const HPoint& v : verts) {
                double dv = dist(x0, v);
                max_seen = std::max(max_seen, dv);
                if (dv > reach - 0.1) { enlarged = true; return; }
            }
            // drop numerically duplicated vertices
            std::vector<HPoint> clean;
            for (const HPoint& v : verts) {
                if (!clean.empty() && dist(clean.back(), v) < 1e-9) continue;
                clean.push_back(v);
            }
            while (clean.size() >= 2 && dist(clean.front(), clean.back()) < 1e-9) clean.pop_back();
            if (clean.size() < 3) return;

            ConvexPolygon face = [&] {
                try {
                    return ConvexPolygon(clean);
                } catch (const DegeneratePolygon& e) {
                    throw ArrangementDegeneracy(std::string("degenerate complementary face: ") +
                                                e.what());
                }
            }();
            auto [cen, h] = s.canonicalize(face.interior_point());
            for (const HPoint& k : keys)
                if (dist(k, cen.rep) < 1e-6) return;
            keys.push_back(cen.rep);
            covered += face.area();
            faces.push_back(std::move(face));
        };

        double target = s.area();
        bool done = false;
        for (double pitch = 0.08; pitch >= 0.004 && !done; pitch *= 0.5) {
            for (double kx = bx0; kx <= bx1 && !done; kx += pitch)
                for (double ky = by0; ky <= by1 && !done; ky += pitch) {
                    try_seed(kx, ky);
                    done = enlarged || std::fabs(covered - target) <= 1e-6;
                }
        }
        if (enlarged) {
            reach = std::max(reach + 1.0, max_seen + s.diameter() + 0.3);
            continue;
        }
        if (covered > target + 1e-6)
            throw ArrangementDegeneracy("complementary faces overlap or were double-counted");
        if (std::fabs(covered - target) > 1e-6)
            throw ArrangementDegeneracy("complementary faces do not exhaust the surface area");
        return faces;
    }
    throw NotFilling("complementary face extraction did not stabilize");
}

// --- file format ---

void Surface::save(std::ostream& out) const {
    out << "GEOFILL-SURFACE v1\n";
    out << "genus " << genus_ << "\n";
    out << "vertices " << poly_.size() << "\n";
    char buf[80];
    for (const HPoint& v : poly_.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
        out << buf;
    }
    out << "pairings";
    for (int t : partner_) out << ' ' << t;
    out << "\n";
    out << "words " << words_.size() << "\n";
    for (const auto& [name, w] : words_) out << name << ' ' << w.str() << "\n";
}

Surface Surface::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "GEOFILL-SURFACE v1")
        throw BadSurfaceFile("missing GEOFILL-SURFACE v1 header");
    std::string kw;
    int genus = 0, n = 0;
    if (!(in >> kw >> genus) || kw != "genus") throw BadSurfaceFile("expected genus");
    if (!(in >> kw >> n) || kw != "vertices" || n < 3) throw BadSurfaceFile("expected vertices");
    std::vector<HPoint> vs;
    for (int i = 0; i < n; ++i) {
        double x, y;
        if (!(in >> x >> y)) throw BadSurfaceFile("bad vertex line");
        try {
            vs.emplace_back(x, y);
        } catch (const Error& e) {
            throw BadSurfaceFile(std::string("bad vertex: ") + e.what());
        }
    }
    if (!(in >> kw) || kw != "pairings") throw BadSurfaceFile("expected pairings");
    std::vector<int> partner(n);
    for (int i = 0; i < n; ++i)
        if (!(in >> partner[i])) throw BadSurfaceFile("bad pairings line");
    size_t nwords = 0;
    if (!(in >> kw >> nwords) || kw != "words") throw BadSurfaceFile("expected words");
    std::getline(in, line);
    std::map<std::string, CurveWord> words;
    for (size_t i = 0; i < nwords; ++i) {
        if (!std::getline(in, line)) throw BadSurfaceFile("missing word line");
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) throw BadSurfaceFile("bad word line");
        std::string rest;
        std::getline(ls, rest);
        try {
            words[name] = CurveWord::parse(rest);
        } catch (const Error& e) {
            throw BadSurfaceFile(std::string("bad word '") + name + "': " + e.what());
        }
    }
    try {
        return from_polygon(genus, ConvexPolygon(std::move(vs)), std::move(partner),
                            std::move(words));
    } catch (const BadSurfaceFile&) {
        throw;
    } catch (const Error& e) {
        throw BadSurfaceFile(std::string("inconsistent surface data: ") + e.what());
    }
}

}  // namespace geofill
