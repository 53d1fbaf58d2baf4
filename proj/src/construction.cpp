#include "geofill/construction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "geofill/verify.hpp"

namespace geofill {

namespace {

double wrap_pos(double x, double L) {
    double t = std::fmod(x, L);
    if (t < 0) t += L;
    return t;
}

// representative in (-L/2, L/2]
double wrap_pm(double x, double L) {
    double t = wrap_pos(x, L);
    if (t > 0.5 * L) t -= L;
    return t;
}

// ideal boundary point as an angle on the circle (Cayley transform)
double boundary_circle_angle(const IdealPoint& e) {
    if (e.at_inf) return 0.0;
    return std::atan2(-2.0 * e.v, e.v * e.v - 1.0);
}

// which of the two boundary arcs cut out by the angles (a1, a2) contains t;
// points landing on the cut count as arc 1
int boundary_arc(double a1, double a2, double t) {
    double span = std::fmod(a2 - a1 + 4.0 * M_PI, 2.0 * M_PI);
    double dt = std::fmod(t - a1 + 4.0 * M_PI, 2.0 * M_PI);
    return (dt > 0.0 && dt < span) ? 0 : 1;
}

Isometry diag_translate(double t) {
    double e = std::exp(0.5 * t);
    return Isometry(e, 0.0, 0.0, 1.0 / e);
}

bool same_unoriented(const HGeodesic& g, const HGeodesic& h) {
    auto eq = [](const IdealPoint& p, const IdealPoint& q) {
        if (p.at_inf || q.at_inf) return p.at_inf == q.at_inf;
        return std::fabs(p.v - q.v) < 1e-8 * std::max(1.0, std::fabs(p.v));
    };
    return (eq(g.e1, h.e1) && eq(g.e2, h.e2)) || (eq(g.e1, h.e2) && eq(g.e2, h.e1));
}

// Isometry carrying the frame of the next piece into the current one: it maps
// the next piece's start crossing onto the point of the current end flank at
// gamma0 distance delta past the current end crossing, matching flank
// orientations. delta is the shortest gamma0 travel between the two crossing
// positions. The flank matching is computed in the crossings' local frames.
Isometry align_step(const MarkedCrossing& end_c, const MarkedCrossing& start_n, double L0) {
    double delta = wrap_pm(start_n.s_gamma - end_c.s_gamma, L0);
    double t_target = param_of(end_c.flank, end_c.point) + delta;
    double t_src = param_of(start_n.flank, start_n.point);
    Isometry local = to_standard(end_c.flank).inverse() * diag_translate(t_target - t_src) *
                     to_standard(start_n.flank);
    return end_c.to_piece * local * start_n.to_piece.inverse();
}

}  // namespace

// --- ScaledIsometry ---

ScaledIsometry ScaledIsometry::from(const Isometry& m) {
    ScaledIsometry r;
    r.a = m.a;
    r.b = m.b;
    r.c = m.c;
    r.d = m.d;
    r.logscale = 0.0;
    r.normalize();
    return r;
}

void ScaledIsometry::normalize() {
    double s = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("ScaledIsometry: degenerate matrix");
    a /= s;
    b /= s;
    c /= s;
    d /= s;
    logscale += std::log(s);
}

ScaledIsometry operator*(const ScaledIsometry& x, const ScaledIsometry& y) {
    ScaledIsometry r;
    r.a = x.a * y.a + x.b * y.c;
    r.b = x.a * y.b + x.b * y.d;
    r.c = x.c * y.a + x.d * y.c;
    r.d = x.c * y.b + x.d * y.d;
    r.logscale = x.logscale + y.logscale;
    r.normalize();
    return r;
}

double ScaledIsometry::log_abs_trace() const {
    double t = std::fabs(a + d);
    if (t == 0.0) return -HUGE_VAL;
    return logscale + std::log(t);
}

bool ScaledIsometry::hyperbolic() const {
    return log_abs_trace() > std::log(2.0) + 1e-12;
}

double ScaledIsometry::translation_len() const {
    double lt = log_abs_trace();
    if (lt <= std::log(2.0)) throw NotHyperbolic("translation_len: |trace| <= 2");
    // 2 arccosh(|tr|/2); for large traces acosh(x) = log(2x) to machine precision
    if (lt > 20.0) return 2.0 * lt;
    return 2.0 * std::acosh(0.5 * std::exp(lt));
}

HGeodesic ScaledIsometry::axis() const {
    if (!hyperbolic()) throw NotHyperbolic("ScaledIsometry::axis: not a hyperbolic isometry");
    double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
    // fixed points solve c z^2 + (d - a) z - b = 0
    double A = c, B = d - a, C = -b;
    if (std::fabs(A) <= 1e-13 * scale) {
        double p = -C / B;
        if (std::fabs(a) > std::fabs(d)) return HGeodesic({p, false}, IdealPoint::infinity());
        return HGeodesic(IdealPoint::infinity(), {p, false});
    }
    double disc = B * B - 4.0 * A * C;
    if (!(disc > 0.0)) throw NotHyperbolic("ScaledIsometry::axis: nonpositive discriminant");
    double s = std::sqrt(disc);
    double q = -0.5 * (B + std::copysign(s, B));
    double p1 = q / A, p2 = C / q;
    // |derivative| < 1 at the attracting fixed point: e^logscale |c p + d| > 1.
    // Compare the two points rather than test against 1: at the repelling
    // point c p + d cancels to rounding noise, which for very long axes still
    // lands above 1 and would flip the orientation.
    double v1 = std::log(std::fabs(c * p1 + d));
    double v2 = std::log(std::fabs(c * p2 + d));
    if (v1 > v2) return HGeodesic({p2, false}, {p1, false});
    return HGeodesic({p1, false}, {p2, false});
}

ScaledIsometry ScaledIsometry::inverse() const {
    // the true matrix has det 1, so the inverse is the adjugate at equal scale
    ScaledIsometry r;
    r.a = d;
    r.b = -b;
    r.c = -c;
    r.d = a;
    r.logscale = logscale;
    r.normalize();
    return r;
}

// --- constants of the surface + filling-geodesic pair ---

namespace {

// gamma0 arclength coordinate (axis parameter mod length) of the trace origin
double trace_origin_offset(const ClosedGeodesic& g0, const TracedGeodesic& tr, const Surface& s,
                           double tau) {
    HPoint probe = point_at(g0.axis, tau);
    auto [sp, iso] = s.canonicalize(probe);
    double cum = 0.0;
    for (size_t j = 0; j < tr.arcs.size(); ++j) {
        const HGeodesic& lift = tr.arc_lifts[j];
        double ta = param_of(lift, tr.arcs[j].a);
        double tb = param_of(lift, tr.arcs[j].b);
        if (dist_to_geodesic(lift, sp.rep) < 1e-6) {
            double u = param_of(lift, sp.rep);
            if (u > ta - 1e-6 && u < tb + 1e-6) {
                double s_trace = cum + (u - ta);
                return wrap_pos(tau - s_trace, g0.length);
            }
        }
        cum += tb - ta;
    }
    throw Error("trace_origin_offset: probe not found on the traced arcs");
}

void find_mu_arcs(const Surface& s, const ClosedGeodesic& g0, MuArc& mu_plus, MuArc& mu_minus) {
    const HGeodesic& A = g0.axis;
    const double L0 = g0.length;
    HPoint x0 = s.polygon().interior_point();
    MuArc best[2];  // [0] side +1, [1] side -1
    bool found[2] = {false, false};

    for (double radius : {6.0, 8.0, 10.0}) {
        for (const auto& e : s.enumerate_elements(x0, radius)) {
            if (e.word.empty()) continue;
            HGeodesic gA = apply_geodesic(e.iso, A);
            if (same_unoriented(A, gA)) continue;
            PerpResult pr = common_perpendicular(A, gA);
            if (pr.kind != PerpResult::Disjoint) continue;
            if (pr.distance < 1e-6) continue;
            HPoint f1 = pr.seg.a, f2 = pr.seg.b;
            if (dist_to_geodesic(A, f2) < dist_to_geodesic(A, f1)) std::swap(f1, f2);
            HGeodesic perp = geodesic_through(f1, f2);
            double u1 = param_of(perp, f1), u2 = param_of(perp, f2);
            HPoint p1 = point_at(perp, u1 + 0.01 * (u2 - u1));
            HPoint p2 = point_at(perp, u2 - 0.01 * (u2 - u1));
            int s1 = side_of(A, p1), s2 = side_of(gA, p2);
            if (s1 == 0 || s1 != s2) continue;
            int idx = (s1 == 1) ? 0 : 1;
            if (found[idx] && best[idx].length <= pr.distance) continue;
            if (std::fabs(angle_at(perp, A, f1) - M_PI / 2) > 1e-8 ||
                std::fabs(angle_at(perp, gA, f2) - M_PI / 2) > 1e-8)
                continue;
            MuArc m;
            m.side = s1;
            m.length = pr.distance;
            m.start.point = f1;
            m.start.flank = A;
            m.start.s_gamma = wrap_pos(param_of(A, f1), L0);
            m.start.angle = M_PI / 2;
            m.start.side = s1;
            m.end.point = f2;
            m.end.flank = gA;
            m.end.s_gamma = wrap_pos(param_of(A, apply(e.iso.inverse(), f2)), L0);
            m.end.angle = M_PI / 2;
            m.end.side = s1;
            best[idx] = m;
            found[idx] = true;
        }
        if (found[0] && found[1]) break;
    }
    if (!found[0] || !found[1])
        throw MuSearchFailed("find_mu_arcs: no same-side orthogeodesic on one side within budget");
    mu_plus = best[0];
    mu_minus = best[1];
}

}  // namespace

ConstructionConstants compute_constants(const Surface& s, const ClosedGeodesic& g0) {
    ConstructionConstants k;
    k.gamma0 = g0;
    k.faces = complementary_polygons(g0, s);
    k.theta0 = HUGE_VAL;
    k.D = 0.0;
    for (const auto& f : k.faces) {
        k.theta0 = std::min(k.theta0, ear_min_angle(f));
        k.D = std::max(k.D, f.diameter());
    }
    k.len_gamma0 = g0.length;
    k.m_theta0 = disjointness_threshold(k.theta0);
    k.traced0 = trace_geodesic(g0, s);
    k.s0 = trace_origin_offset(g0, k.traced0, s, 0.1234);
    double s0b = trace_origin_offset(g0, k.traced0, s, 1.0321);
    if (std::fabs(wrap_pm(k.s0 - s0b, k.len_gamma0)) > 1e-6)
        throw Error("compute_constants: inconsistent trace origin offset");
    find_mu_arcs(s, g0, k.mu_plus, k.mu_minus);
    k.mu_plus_len = k.mu_plus.length;
    k.mu_minus_len = k.mu_minus.length;
    k.C_X_ext = 2.0 * std::log(4.0 / std::sin(k.theta0)) + 8.0 * k.D + k.m_theta0 + 1.0;
    k.K_X = k.C_X_ext + k.len_gamma0 + std::max(k.mu_plus_len, k.mu_minus_len);
    return k;
}

// --- extension ---

namespace {

const RayCrossing& pick_crossing(const std::vector<RayCrossing>& xs, double need, double theta0) {
    for (const auto& rc : xs) {
        if (rc.s < need) continue;
        if (rc.side == 0) continue;
        if (rc.angle >= theta0 - 1e-9) return rc;
    }
    throw ExtensionBudgetExceeded("extend_segment: no qualifying crossing within the ray budget");
}

MarkedCrossing mark(const RayCrossing& rc, const ConstructionConstants& k) {
    MarkedCrossing m;
    m.point = rc.point;
    m.flank = rc.flank;
    m.to_piece = rc.frame;
    m.s_gamma = wrap_pos(rc.s_target + k.s0, k.len_gamma0);
    m.angle = rc.angle;
    m.side = rc.side;
    m.s_along = rc.s;
    return m;
}

}  // namespace

ExtendedSegment extend_segment(const SurfaceSegment& c, const ConstructionConstants& k,
                               const Surface& s, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw OutOfRange("extend_segment: epsilon not in (0,1)");
    double re = shadow_radius(epsilon, k.theta0);
    double budget = re + k.m_theta0 + 4.0 * k.D + 2.0;

    HGeodesic g = geodesic_through(c.a, c.b);
    double ta = param_of(g, c.a), tb = param_of(g, c.b);
    HPoint mid = point_at(g, 0.5 * (ta + tb));
    auto [sm, G] = s.canonicalize(mid);
    HPoint a2 = apply(G, c.a), b2 = apply(G, c.b);
    double len_c = tb - ta;

    HGeodesic g2 = geodesic_through(a2, b2);
    double tx, ty;
    tangent_at(g2, b2, tx, ty);
    auto fwd = trace_ray_crossings(b2, tx, ty, budget, k.traced0, s);
    tangent_at(g2, a2, tx, ty);
    auto bwd = trace_ray_crossings(a2, -tx, -ty, budget, k.traced0, s);

    RayCrossing f = pick_crossing(fwd, re, k.theta0);
    RayCrossing b = pick_crossing(bwd, re, k.theta0);
    double total = b.s + len_c + f.s;
    if (total < k.m_theta0) {
        // symmetric re-extension past the disjointness threshold
        double extra = 0.5 * (k.m_theta0 - total);
        f = pick_crossing(fwd, f.s + extra, k.theta0);
        b = pick_crossing(bwd, b.s + extra, k.theta0);
    }

    ExtendedSegment out;
    out.a = a2;
    out.b = b2;
    out.start = mark(b, k);
    out.end = mark(f, k);
    out.length = b.s + len_c + f.s;
    return out;
}

// --- chaining ---

ChainedLoop chain(const std::vector<ExtendedSegment>& segs, const ConstructionConstants& k,
                  const Surface&) {
    if (segs.empty()) throw OutOfRange("chain: need at least one segment");
    ChainedLoop out;
    out.len_gamma0 = k.len_gamma0;
    int n = static_cast<int>(segs.size());
    for (int i = 0; i < n; ++i) {
        ChainedLoop::Piece p;
        p.a = segs[i].a;
        p.b = segs[i].b;
        p.start = segs[i].start;
        p.end = segs[i].end;
        p.length = segs[i].length;
        p.is_mu = false;
        p.segment_index = i;
        out.pieces.push_back(p);

        int e = segs[i].end.side;
        int sn = segs[(i + 1) % n].start.side;
        if (e == 0 || sn == 0) throw SideBookkeepingFailure("chain: tangential crossing side");
        if (sn == -e) continue;
        // same-side continuation: bridge with the mu arc departing on side -e
        const MuArc& mu = (e == 1) ? k.mu_minus : k.mu_plus;
        if (mu.side != -e) throw SideBookkeepingFailure("chain: mu arc has the wrong side");
        ChainedLoop::Piece mp;
        mp.a = mu.start.point;
        mp.b = mu.end.point;
        mp.start = mu.start;
        mp.end = mu.end;
        mp.length = mu.length;
        mp.is_mu = true;
        out.pieces.push_back(mp);
    }
    double sum = 0.0;
    for (const auto& p : out.pieces) sum += p.length;
    out.upper_bound = sum + 0.5 * k.len_gamma0 * static_cast<double>(out.pieces.size());
    return out;
}

// --- tightening ---

ShadowGeodesic tighten(const ChainedLoop& loop, const Surface&) {
    int K = static_cast<int>(loop.pieces.size());
    if (K == 0) throw OutOfRange("tighten: empty loop");
    ScaledIsometry phi;
    bool first = true;
    for (int j = 0; j < K; ++j) {
        Isometry v = align_step(loop.pieces[j].end, loop.pieces[(j + 1) % K].start,
                                loop.len_gamma0);
        ScaledIsometry sv = ScaledIsometry::from(v);
        phi = first ? sv : phi * sv;
        first = false;
    }
    if (!phi.hyperbolic()) throw NonHyperbolicHolonomy("tighten: chained holonomy not hyperbolic");
    ShadowGeodesic g;
    g.holonomy = phi;
    g.length = phi.translation_len();
    g.axis = phi.axis();
    return g;
}

std::vector<Isometry> alignment_steps(const ChainedLoop& loop) {
    int K = static_cast<int>(loop.pieces.size());
    if (K == 0) throw OutOfRange("alignment_steps: empty loop");
    std::vector<Isometry> V(K);
    for (int j = 0; j < K; ++j)
        V[j] = align_step(loop.pieces[j].end, loop.pieces[(j + 1) % K].start, loop.len_gamma0);
    return V;
}

std::vector<ScaledIsometry> piece_holonomies(const ChainedLoop& loop) {
    std::vector<Isometry> V = alignment_steps(loop);
    int K = static_cast<int>(V.size());
    std::vector<ScaledIsometry> SV;
    SV.reserve(K);
    for (const Isometry& v : V) SV.push_back(ScaledIsometry::from(v));
    // prefix P[i] = SV[0..i-1] and suffix S[i] = SV[i..K-1]; the cyclic
    // product started at i is S[i] P[i] with no inverses (conjugating by P[i]
    // instead loses the repelling fixed point to cancellation)
    std::vector<ScaledIsometry> P(K + 1), S(K + 1);
    for (int j = 0; j < K; ++j) P[j + 1] = (j == 0) ? SV[0] : P[j] * SV[j];
    for (int j = K - 1; j >= 0; --j) S[j] = (j == K - 1) ? SV[j] : SV[j] * S[j + 1];
    std::vector<ScaledIsometry> out(K);
    for (int i = 0; i < K; ++i) out[i] = (i == 0) ? P[K] : S[i] * P[i];
    return out;
}

// --- certification ---

bool Certificate::passed() const {
    if (!(length > 0.0) || !nested_ok || !mu_ok) return false;
    if (length > upper_bound + 1e-9) return false;
    for (const auto& r : rows) {
        if (!r.crossings_ok) return false;
        if (r.shadow > epsilon + 1e-9) return false;
    }
    return true;
}

std::string Certificate::str() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "shadow-certificate eps=%.6g length=%.9g bound=%.9g nested=%s mu=%s\n", epsilon,
                  length, upper_bound, nested_ok ? "yes" : "no", mu_ok ? "yes" : "no");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "  seg %d: ext %.6g/%.6g angles %.6g/%.6g shadow %.6g crossings %s\n",
                      r.segment_index, r.ext_start, r.ext_end, r.angle_start, r.angle_end,
                      r.shadow, r.crossings_ok ? "ok" : "MISSED");
        os << buf;
    }
    os << (passed() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

std::pair<ShadowGeodesic, Certificate> certify_loop(const ChainedLoop& loop, const Surface& s,
                                                    const ConstructionConstants& k,
                                                    double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw OutOfRange("certify_loop: epsilon not in (0,1)");
    ShadowGeodesic gamma = tighten(loop, s);

    int K = static_cast<int>(loop.pieces.size());
    std::vector<Isometry> V = alignment_steps(loop);
    std::vector<ScaledIsometry> Phi = piece_holonomies(loop);

    Certificate cert;
    cert.epsilon = epsilon;
    cert.length = gamma.length;
    double avg = 0.0;
    int nseg = 0;
    for (const auto& p : loop.pieces) {
        if (p.is_mu) continue;
        avg += dist(p.a, p.b);
        ++nseg;
    }
    if (nseg == 0) throw OutOfRange("certify_loop: no non-connector pieces");
    avg /= static_cast<double>(nseg);
    cert.upper_bound =
        static_cast<double>(nseg) * (k.K_X + avg + 2.0 * std::log(1.0 / epsilon));

    // per-piece axis in the piece's own frame: cyclic rotation of the product
    for (int i = 0; i < K; ++i) {
        const ScaledIsometry& phi = Phi[i];
        if (!phi.hyperbolic())
            throw NonHyperbolicHolonomy("certify_loop: rotated holonomy not hyperbolic");
        const auto& pc = loop.pieces[i];
        // axis-flank crossings, each judged in the crossing's local frame
        // where the flank lift is well conditioned
        auto crosses = [&](const MarkedCrossing& mc) {
            ScaledIsometry conj = ScaledIsometry::from(mc.to_piece.inverse()) * phi *
                                  ScaledIsometry::from(mc.to_piece);
            return conj.hyperbolic() && geodesics_cross(conj.axis(), mc.flank);
        };
        bool cr = crosses(pc.start) && crosses(pc.end);
        HGeodesic ax = phi.axis();
        if (pc.is_mu) {
            if (!cr) cert.mu_ok = false;
            continue;
        }
        SegmentCertificate row;
        row.segment_index = pc.segment_index;
        row.ext_start = pc.start.s_along;
        row.ext_end = pc.end.s_along;
        row.angle_start = pc.start.angle;
        row.angle_end = pc.end.angle;
        row.crossings_ok = cr;
        HGeodesic g = geodesic_through(pc.a, pc.b);
        double ta = param_of(g, pc.a), tb = param_of(g, pc.b);
        int n = std::max(2, static_cast<int>(std::ceil((tb - ta) / (epsilon / 10.0))) + 1);
        double worst = 0.0;
        for (int t = 0; t < n; ++t) {
            HPoint p = point_at(g, ta + (tb - ta) * t / (n - 1.0));
            worst = std::max(worst, dist_to_geodesic(ax, p));
        }
        row.shadow = worst;
        cert.rows.push_back(row);
    }
    std::sort(cert.rows.begin(), cert.rows.end(),
              [](const SegmentCertificate& x, const SegmentCertificate& y) {
                  return x.segment_index < y.segment_index;
              });

    // nesting: at each junction the previous and next flanks must be disjoint
    // from the shared one and lie in opposite boundary arcs cut out by it.
    // Judged in the junction's local frame via boundary-circle angles; the far
    // flank endpoints may collapse to one double, which the arc test tolerates.
    cert.nested_ok = true;
    for (int j = 0; j < K; ++j) {
        const auto& pv = loop.pieces[j];
        const auto& pc = loop.pieces[(j + 1) % K];
        // the disjointness of pc's own two flanks (Lemma 2.2) is the n1/n2
        // same-arc condition below
        const HGeodesic& G = pc.start.flank;
        double a1 = boundary_circle_angle(G.e1), a2 = boundary_circle_angle(G.e2);
        Isometry to_next = pc.start.to_piece.inverse() * pc.end.to_piece;
        Isometry to_prev = pc.start.to_piece.inverse() * V[j].inverse() * pv.start.to_piece;
        double n1 = boundary_circle_angle(apply(to_next, pc.end.flank.e1));
        double n2 = boundary_circle_angle(apply(to_next, pc.end.flank.e2));
        double p1 = boundary_circle_angle(apply(to_prev, pv.start.flank.e1));
        double p2 = boundary_circle_angle(apply(to_prev, pv.start.flank.e2));
        int an1 = boundary_arc(a1, a2, n1), an2 = boundary_arc(a1, a2, n2);
        int ap1 = boundary_arc(a1, a2, p1), ap2 = boundary_arc(a1, a2, p2);
        if (an1 != an2 || ap1 != ap2 || an1 == ap1) cert.nested_ok = false;
    }
    return {gamma, cert};
}

std::pair<ShadowGeodesic, Certificate> build_shadowing_geodesic(
    const std::vector<SurfaceSegment>& segments, const Surface& s,
    const ConstructionConstants& k, double epsilon) {
    if (segments.empty()) throw OutOfRange("build_shadowing_geodesic: no segments");
    std::vector<ExtendedSegment> ext;
    ext.reserve(segments.size());
    for (const auto& c : segments) ext.push_back(extend_segment(c, k, s, epsilon));
    ChainedLoop loop = chain(ext, k, s);
    return certify_loop(loop, s, k, epsilon);
}

std::pair<ShadowGeodesic, Certificate> build_shadowing_geodesic(
    const std::vector<SurfaceSegment>& segments, const Surface& s, const ClosedGeodesic& g0,
    double epsilon) {
    return build_shadowing_geodesic(segments, s, compute_constants(s, g0), epsilon);
}

}  // namespace geofill
