#include "geofill/density.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "geofill/verify.hpp"

using namespace geofill;

namespace {

const Surface& bolza() {
    static Surface s = Surface::bolza();
    return s;
}

const ClosedGeodesic& gamma0() {
    static ClosedGeodesic g = geodesic_of(bolza().named_words().at("gamma0"), bolza());
    return g;
}

const ConstructionConstants& constants() {
    static ConstructionConstants k = compute_constants(bolza(), gamma0());
    return k;
}

bool same_ideal(const IdealPoint& a, const IdealPoint& b) {
    if (a.at_inf || b.at_inf) return a.at_inf == b.at_inf;
    return std::fabs(a.v - b.v) <= 1e-8 * std::max(1.0, std::fabs(a.v));
}

bool same_lift(const HGeodesic& g1, const HGeodesic& g2) {
    return (same_ideal(g1.e1, g2.e1) && same_ideal(g1.e2, g2.e2)) ||
           (same_ideal(g1.e1, g2.e2) && same_ideal(g1.e2, g2.e1));
}

// Independent crossing count: lifts of g near one axis period are the images
// of the traced arc lifts under deck elements reaching the period; each
// surface crossing contributes exactly two lift crossings inside the window.
long long crossing_oracle(const ClosedGeodesic& g, const Surface& s) {
    TracedGeodesic t = trace_geodesic(g, s);
    const HGeodesic& A = g.axis;
    HPoint x0 = s.polygon().interior_point();
    double tp;
    try {
        tp = param_of(A, foot_of_perpendicular(A, x0).first);
    } catch (const PointOnGeodesic&) {
        tp = param_of(A, x0);
    }
    double c0 = tp - g.length / 2.0 + 0.1234567;
    HPoint mid = point_at(A, tp);
    std::vector<GroupElement> elems =
        s.enumerate_elements(mid, g.length / 2.0 + s.circumradius() + 1.0);
    std::vector<Isometry> isos = {Isometry::identity()};
    for (const GroupElement& e : elems)
        if (!e.word.empty()) isos.push_back(e.iso);
    std::vector<HGeodesic> hits;
    long long cnt = 0;
    for (const Isometry& h : isos) {
        for (const HGeodesic& arc : t.arc_lifts) {
            HGeodesic B = apply_geodesic(h, arc);
            if (same_lift(B, A)) continue;
            auto x = intersect(A, B);
            if (!x) continue;
            double u = param_of(A, *x);
            if (u < c0 || u >= c0 + g.length) continue;
            bool dup = false;
            for (const HGeodesic& seen : hits)
                if (same_lift(B, seen)) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            hits.push_back(B);
            ++cnt;
        }
    }
    REQUIRE(cnt % 2 == 0);
    return cnt / 2;
}

// cyclically reduced words over the Bolza generators, primitive, one
// representative per rotation/inversion class
std::vector<CurveWord> short_words(int max_len) {
    std::set<std::vector<int>> canon;
    std::vector<CurveWord> out;
    std::vector<int> w;
    auto canonical = [](const std::vector<int>& v) {
        std::vector<int> best = v;
        int n = static_cast<int>(v.size());
        for (int inv = 0; inv < 2; ++inv) {
            std::vector<int> u = v;
            if (inv) {
                std::reverse(u.begin(), u.end());
                for (int& x : u) x = -x;
            }
            for (int r = 0; r < n; ++r) {
                std::rotate(u.begin(), u.begin() + 1, u.end());
                if (u < best) best = u;
            }
        }
        return best;
    };
    auto emit = [&](const std::vector<int>& v) {
        int n = static_cast<int>(v.size());
        if (n == 0) return;
        if (n >= 2 && v.front() == -v.back()) return;  // not cyclically reduced
        for (int p = 1; p < n; ++p) {  // proper powers are degenerate traces
            if (n % p != 0) continue;
            bool rep = true;
            for (int i = p; i < n && rep; ++i) rep = v[i] == v[i - p];
            if (rep) return;
        }
        if (canon.insert(canonical(v)).second) {
            CurveWord cw;
            cw.letters = v;
            out.push_back(cw);
        }
    };
    std::function<void(int)> rec = [&](int len) {
        emit(w);
        if (len == max_len) return;
        for (int l = -4; l <= 4; ++l) {
            if (l == 0 || (!w.empty() && l == -w.back())) continue;
            w.push_back(l);
            rec(len + 1);
            w.pop_back();
        }
    };
    rec(0);
    return out;
}

}  // namespace

TEST_CASE("ball cover separation, coverage, count") {
    const Surface& s = bolza();
    BallCover c = build_ball_cover(s, 1.0);
    CHECK(c.R_X == doctest::Approx(1.0));
    CHECK(c.radius == doctest::Approx(1.0));
    CHECK(c.centers.size() >= 2);
    double pack = s.area() / (2.0 * M_PI * (std::cosh(c.R_X / 2.0) - 1.0));
    CHECK(static_cast<double>(c.centers.size()) <= pack);
    for (size_t i = 0; i < c.centers.size(); ++i)
        for (size_t j = i + 1; j < c.centers.size(); ++j)
            CHECK(surface_distance(c.centers[i], c.centers[j], s) >= c.R_X - 1e-9);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(-0.6, 0.6), uy(0.6, 1.7);
    int tried = 0;
    while (tried < 200) {
        HPoint p(ux(rng), uy(rng));
        if (!s.polygon().contains(p, 1e-9)) continue;
        ++tried;
        SurfacePoint sp = s.canonicalize(p).first;
        double best = 1e9;
        for (const SurfacePoint& ctr : c.centers)
            best = std::min(best, surface_distance(sp, ctr, s));
        CHECK(best <= c.radius + 1e-6);
    }

    BallCover c2 = build_ball_cover(s, 2.0);
    CHECK(c2.radius == doctest::Approx(2.0 * c2.R_X));
    CHECK_THROWS_AS(build_ball_cover(s, 1.5), OutOfRange);
}

TEST_CASE("chord systems: counts, radius, disjointness, coverage") {
    const Surface& s = bolza();
    BallCover cover = build_ball_cover(s, 1.0);
    const SurfacePoint& c = cover.centers[0];
    for (double eps : {0.5, 0.25}) {
        BallChords bc = build_chords(c, cover.R_X, eps);
        CHECK(static_cast<double>(bc.chords.size()) <=
              M_PI * std::sinh(bc.R) / eps + 1.0 + 1e-9);
        for (const HSegment& h : bc.chords) {
            CHECK(dist(c.rep, h.a) == doctest::Approx(bc.R).epsilon(1e-9));
            CHECK(dist(c.rep, h.b) == doctest::Approx(bc.R).epsilon(1e-9));
            CHECK(dist(h.a, h.b) <= 2.0 * bc.R + 1e-9);
        }
        // pairwise disjoint: no transverse crossing interior to both chords
        for (size_t i = 0; i < bc.chords.size(); ++i)
            for (size_t j = i + 1; j < bc.chords.size(); ++j) {
                HGeodesic gi = geodesic_through(bc.chords[i].a, bc.chords[i].b);
                HGeodesic gj = geodesic_through(bc.chords[j].a, bc.chords[j].b);
                if (same_lift(gi, gj)) continue;
                auto x = intersect(gi, gj);
                if (!x) continue;
                auto inside = [&](const HGeodesic& g, const HSegment& h) {
                    double u = param_of(g, *x);
                    double ta = param_of(g, h.a), tb = param_of(g, h.b);
                    if (ta > tb) std::swap(ta, tb);
                    return u > ta + 1e-9 && u < tb - 1e-9;
                };
                CHECK_FALSE((inside(gi, bc.chords[i]) && inside(gj, bc.chords[j])));
            }
        // sampled coverage of the ball at eps/2
        HGeodesic up = geodesic_from_direction(c.rep, 0.0, 1.0);
        double t0 = param_of(up, c.rep);
        double worst = 0.0;
        for (double r = 1e-6; r <= bc.R; r += eps / 20.0) {
            HPoint pr = point_at(up, t0 + r);
            for (double phi = 0.0; phi < 2.0 * M_PI; phi += eps / 20.0) {
                HPoint p = apply(rotation_about(c.rep, phi), pr);
                double best = 1e9;
                for (const HSegment& h : bc.chords) {
                    HGeodesic g = geodesic_through(h.a, h.b);
                    double d;
                    try {
                        d = foot_of_perpendicular(g, p).second;
                        double u = param_of(g, foot_of_perpendicular(g, p).first);
                        double ta = param_of(g, h.a), tb = param_of(g, h.b);
                        if (ta > tb) std::swap(ta, tb);
                        if (u < ta || u > tb) d = std::min(dist(p, h.a), dist(p, h.b));
                    } catch (const PointOnGeodesic&) {
                        d = 0.0;
                    }
                    best = std::min(best, d);
                }
                worst = std::max(worst, best);
            }
        }
        CHECK(worst <= eps / 2.0 + eps / 10.0);
    }
    CHECK_THROWS_AS(build_chords(c, cover.R_X, 0.7), OutOfRange);
}

TEST_CASE("dense geodesic at eps = 1/2 passes its report") {
    const Surface& s = bolza();
    DenseResult r = build_dense_geodesic(s, constants(), 0.5);
    const DensityReport& rep = r.report;
    CHECK(rep.passed());
    CHECK(rep.max_gap <= 0.5 + 1e-9);
    CHECK(rep.length >= rep.lower_bound);
    CHECK(rep.length <= rep.upper_bound);
    CHECK(rep.cert.passed());
    CHECK(rep.n_segments == static_cast<int>([&] {
              size_t n = 0;
              for (const BallChords& bc : r.chords) n += bc.chords.size();
              return n;
          }()));
    // traced period matches the tightened length and stays in the polygon
    CHECK(r.traced.total_length == doctest::Approx(r.gamma.length).epsilon(1e-6));
    for (const HSegment& a : r.traced.arcs) {
        CHECK(s.polygon().contains(a.a, 1e-6));
        CHECK(s.polygon().contains(a.b, 1e-6));
    }
    CHECK_THROWS_AS(build_dense_geodesic(s, constants(), 0.6), OutOfRange);
}

TEST_CASE("dense geodesic is deterministic") {
    const Surface& s = bolza();
    DenseResult a = build_dense_geodesic(s, constants(), 0.5);
    DenseResult b = build_dense_geodesic(s, constants(), 0.5);
    CHECK(a.gamma.length == b.gamma.length);
    CHECK(a.report.crossings == b.report.crossings);
    CHECK(a.report.str() == b.report.str());
}

TEST_CASE("self-intersections agree with the lift oracle on short words") {
    const Surface& s = bolza();
    for (const CurveWord& w : short_words(4)) {
        ClosedGeodesic g = geodesic_of(w, s);
        long long mine = self_intersections(g, s);
        long long want = crossing_oracle(g, s);
        INFO("word ", w.str());
        CHECK(mine == want);
        double q = g.length / injectivity_radius(s);
        CHECK(static_cast<double>(mine) <= q * q);
    }
}

TEST_CASE("simple and figure-eight curves") {
    const Surface& s = bolza();
    CHECK(self_intersections(geodesic_of(CurveWord::parse("1"), s), s) == 0);
    CHECK(self_intersections(geodesic_of(CurveWord::parse("1 2"), s), s) == 0);
    // figure eight: one transverse crossing
    CHECK(self_intersections(geodesic_of(CurveWord::parse("1 2 3"), s), s) == 1);
}

TEST_CASE("unit tangent density at eps = 1/2") {
    const Surface& s = bolza();
    double l = injectivity_radius(s) / 2.0;
    UTResult r = build_ut_dense_geodesic(s, constants(), 0.5, l, 40, 7);
    CHECK(r.report.passed());
    CHECK(r.report.within == r.report.trials);
    CHECK(r.report.worst <= 0.5 + 1e-9);
    CHECK(r.report.cert.passed());
    CHECK(r.cover.radius == doctest::Approx(2.0 * r.cover.R_X));
    CHECK_THROWS_AS(
        build_ut_dense_geodesic(s, constants(), 0.5, injectivity_radius(s) * 2.0, 5, 7),
        OutOfRange);
}
