#include "geofill/construction.hpp"

#include <cmath>
#include <random>

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

HPoint random_point(std::mt19937& rng) {
    std::uniform_real_distribution<double> ux(-0.45, 0.45), uy(0.7, 1.45);
    return HPoint(ux(rng), uy(rng));
}

std::vector<SurfaceSegment> random_segments(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<SurfaceSegment> out;
    while (static_cast<int>(out.size()) < n) {
        HPoint a = random_point(rng), b = random_point(rng);
        double d = dist(a, b);
        if (d < 0.2 || d > 2.0) continue;
        out.push_back({a, b});
    }
    return out;
}

}  // namespace

TEST_CASE("scaled isometry tracks huge translations") {
    HGeodesic g(IdealPoint{-1.0, false}, IdealPoint{3.0, false});
    ScaledIsometry m = ScaledIsometry::from(translation_along(g, 40.0));
    ScaledIsometry p = m;
    for (int i = 1; i < 50; ++i) p = p * m;  // total translation 2000
    CHECK(p.hyperbolic());
    CHECK(p.translation_len() == doctest::Approx(2000.0).epsilon(1e-9));
    HGeodesic ax = p.axis();
    CHECK(ax.e1.v == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(ax.e2.v == doctest::Approx(3.0).epsilon(1e-9));

    ScaledIsometry r = ScaledIsometry::from(rotation_about(HPoint(0, 1), 0.7));
    CHECK(!r.hyperbolic());
    CHECK_THROWS_AS(r.axis(), NotHyperbolic);
}

TEST_CASE("construction constants on the reference surface") {
    const auto& k = constants();
    CHECK(k.theta0 > 0.0);
    CHECK(k.theta0 < M_PI / 2);
    CHECK(k.D > 0.0);
    CHECK(k.m_theta0 == doctest::Approx(std::acosh(2.0 / std::pow(std::sin(k.theta0), 2) - 1.0)));
    CHECK(k.len_gamma0 == doctest::Approx(gamma0().length));
    CHECK(k.s0 >= 0.0);
    CHECK(k.s0 < k.len_gamma0);
    CHECK(k.K_X > k.C_X_ext + k.len_gamma0);
    CHECK(k.faces.size() >= 1);
}

TEST_CASE("mu arcs are same-side orthogeodesics marked consistently") {
    const auto& k = constants();
    for (const MuArc* mu : {&k.mu_plus, &k.mu_minus}) {
        CHECK(mu->length > 0.0);
        CHECK(mu->start.side == mu->side);
        CHECK(mu->end.side == mu->side);
        CHECK(mu->start.angle == doctest::Approx(M_PI / 2));
        HGeodesic perp = geodesic_through(mu->start.point, mu->end.point);
        CHECK(std::fabs(angle_at(perp, mu->start.flank, mu->start.point) - M_PI / 2) < 1e-8);
        CHECK(std::fabs(angle_at(perp, mu->end.flank, mu->end.point) - M_PI / 2) < 1e-8);
        CHECK(dist(mu->start.point, mu->end.point) == doctest::Approx(mu->length));
        // marked gamma0 positions agree with the axis marking on the surface
        for (const MarkedCrossing* mc : {&mu->start, &mu->end}) {
            SurfacePoint on_axis = bolza().canonicalize(point_at(gamma0().axis, mc->s_gamma)).first;
            SurfacePoint here = bolza().canonicalize(mc->point).first;
            CHECK(surface_distance(on_axis, here, bolza()) < 1e-6);
        }
    }
    CHECK(k.mu_plus.side == 1);
    CHECK(k.mu_minus.side == -1);
}

TEST_CASE("extended segments meet gamma0 far enough out and steep enough") {
    const auto& k = constants();
    double eps = 0.5;
    double re = shadow_radius(eps, k.theta0);
    for (const auto& c : random_segments(4, 11)) {
        ExtendedSegment e = extend_segment(c, k, bolza(), eps);
        double lc = dist(c.a, c.b);
        CHECK(dist(e.a, e.b) == doctest::Approx(lc).epsilon(1e-9));
        CHECK(e.start.s_along >= re);
        CHECK(e.end.s_along >= re);
        CHECK(e.length == doctest::Approx(e.start.s_along + lc + e.end.s_along));
        CHECK(e.length >= k.m_theta0);
        CHECK(e.length <= lc + 2.0 * std::log(1.0 / eps) + k.C_X_ext);
        CHECK(e.start.angle >= k.theta0 - 1e-9);
        CHECK(e.end.angle >= k.theta0 - 1e-9);
        CHECK(e.start.side != 0);
        CHECK(e.end.side != 0);
        // crossing points sit on their flanks, and the flank marking matches
        // the gamma0 arclength coordinate
        for (const MarkedCrossing* mc : {&e.start, &e.end}) {
            CHECK(dist_to_geodesic(mc->flank, mc->point) < 1e-8);
            SurfacePoint on_axis = bolza().canonicalize(point_at(gamma0().axis, mc->s_gamma)).first;
            SurfacePoint here = bolza().canonicalize(mc->point).first;
            CHECK(surface_distance(on_axis, here, bolza()) < 1e-6);
        }
        // crossing points lie on the segment's own geodesic, beyond the ends
        HGeodesic g = geodesic_through(e.a, e.b);
        HPoint ps = apply(e.start.to_piece, e.start.point);
        HPoint pe = apply(e.end.to_piece, e.end.point);
        CHECK(dist_to_geodesic(g, ps) < 1e-7);
        CHECK(dist_to_geodesic(g, pe) < 1e-7);
        CHECK(param_of(g, ps) == doctest::Approx(param_of(g, e.a) - e.start.s_along));
        CHECK(param_of(g, pe) == doctest::Approx(param_of(g, e.b) + e.end.s_along));
    }
}

TEST_CASE("single segment closes into a certified shadowing geodesic") {
    const auto& k = constants();
    std::vector<SurfaceSegment> segs = random_segments(1, 3);
    auto [gamma, cert] = build_shadowing_geodesic(segs, bolza(), k, 0.5);
    INFO(cert.str());
    CHECK(cert.passed());
    CHECK(gamma.length > 0.0);
    CHECK(gamma.length == doctest::Approx(cert.length));
    CHECK(cert.rows.size() == 1);
    CHECK(cert.rows[0].shadow <= 0.5);
    CHECK(cert.length <= cert.upper_bound);
}

TEST_CASE("several segments, both epsilons, certificates pass") {
    const auto& k = constants();
    for (double eps : {0.5, 0.25}) {
        auto segs = random_segments(4, 29);
        auto [gamma, cert] = build_shadowing_geodesic(segs, bolza(), k, eps);
        INFO(cert.str());
        CHECK(cert.passed());
        CHECK(cert.rows.size() == segs.size());
        for (const auto& r : cert.rows) {
            CHECK(r.shadow <= eps + 1e-9);
            CHECK(r.crossings_ok);
        }
        CHECK(cert.nested_ok);
        double avg = 0.0;
        for (const auto& c : segs) avg += dist(c.a, c.b);
        avg /= segs.size();
        CHECK(cert.upper_bound ==
              doctest::Approx(segs.size() * (k.K_X + avg + 2.0 * std::log(1.0 / eps))));
    }
}

TEST_CASE("construction is deterministic") {
    const auto& k = constants();
    auto segs = random_segments(3, 5);
    auto r1 = build_shadowing_geodesic(segs, bolza(), k, 0.5);
    auto r2 = build_shadowing_geodesic(segs, bolza(), k, 0.5);
    CHECK(r1.first.length == r2.first.length);
    CHECK(r1.second.str() == r2.second.str());
}

TEST_CASE("input validation") {
    const auto& k = constants();
    auto segs = random_segments(1, 7);
    CHECK_THROWS_AS(build_shadowing_geodesic(segs, bolza(), k, 0.0), OutOfRange);
    CHECK_THROWS_AS(build_shadowing_geodesic(segs, bolza(), k, 1.5), OutOfRange);
    CHECK_THROWS_AS(build_shadowing_geodesic({}, bolza(), k, 0.5), OutOfRange);
    CHECK_THROWS_AS(extend_segment(segs[0], k, bolza(), -0.1), OutOfRange);
    CHECK_THROWS_AS(chain({}, k, bolza()), OutOfRange);
}
