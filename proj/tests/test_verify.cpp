#include "geofill/verify.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace geofill;

TEST_CASE("geodesics_cross interleaving") {
    HGeodesic axis({0.0, false}, IdealPoint::infinity());
    HGeodesic unit({-1.0, false}, {1.0, false});
    CHECK(geodesics_cross(axis, unit));
    CHECK(geodesics_cross(unit, axis));
    HGeodesic right({2.0, false}, {3.0, false});
    CHECK(!geodesics_cross(unit, right));
    CHECK(!geodesics_cross(axis, right));
    HGeodesic vert({2.5, false}, IdealPoint::infinity());
    CHECK(geodesics_cross(vert, right));
    // agreement with the perpendicular classifier on random pairs
    std::mt19937_64 rng(51);
    for (int i = 0; i < 2000; ++i) {
        HGeodesic g1 = testutil::random_geodesic(rng);
        HGeodesic g2 = testutil::random_geodesic(rng);
        PerpResult pr = common_perpendicular(g1, g2);
        if (pr.kind == PerpResult::Asymptotic) continue;
        CHECK(geodesics_cross(g1, g2) == (pr.kind == PerpResult::Intersecting));
    }
}

TEST_CASE("disjointness oracle passes and locates the frontier") {
    TrialConfig cfg;
    cfg.seed = 11;
    cfg.trials = 20000;
    TrialReport rep = oracle_lemma_angle(cfg);
    CHECK(rep.passed());
    CHECK(rep.trials == 20000);
    for (double th0 : {M_PI / 6, M_PI / 4, M_PI / 3}) {
        char key[64];
        std::snprintf(key, sizeof key, "frontier_err_%.12g", th0);
        CHECK(rep.stat(key) < 1e-4);
    }
    char key[64];
    std::snprintf(key, sizeof key, "frontier_%.12g", M_PI / 6);
    CHECK(rep.stat(key) == doctest::Approx(std::acosh(7.0)).epsilon(1e-4));
}

TEST_CASE("shadowing oracle passes with margin") {
    TrialConfig cfg;
    cfg.seed = 12;
    cfg.trials = 5000;
    TrialReport rep = oracle_lemma_tech(cfg);
    CHECK(rep.passed());
    CHECK(rep.trials >= 5000);
    CHECK(rep.stat("worst_ratio") < 1.0);
    CHECK(rep.stat("worst_ratio") > 0.05);
}

TEST_CASE("polygon chord oracle passes") {
    TrialConfig cfg;
    cfg.seed = 13;
    cfg.trials = 20000;
    TrialReport rep = oracle_lemma_poly(cfg);
    CHECK(rep.passed());
    CHECK(rep.stat("witness_gap_octagon_right") < 1e-3);
    CHECK(rep.stat("witness_gap_pentagon_right") < 1e-3);
    CHECK(rep.stat("min_excess_octagon_right") >= -1e-9);
}

TEST_CASE("quadrilateral identities") {
    TrialConfig cfg;
    cfg.seed = 14;
    cfg.trials = 1000;
    TrialReport rep = oracle_quadrilateral(cfg);
    CHECK(rep.passed());
    CHECK(rep.stat("res_height") < 1e-8);
    CHECK(rep.stat("res_mu_dprime") < 1e-8);
    CHECK(rep.stat("res_mu_length") < 1e-8);
    CHECK(rep.stat("res_hprime_chain") < 1e-8);
    CHECK(rep.stat("min_hprime_over_half_h") > 1.0);
}

TEST_CASE("large-radius asymptotics of the offset") {
    // h' ~ (2/sin theta0) cosh(l/2) e^{-r - l/2} for large r
    for (double th0 : {0.4, 0.9, M_PI / 2})
        for (double l : {0.2, 1.0, 2.0}) {
            double r = 10.0;
            double hp = std::asinh(std::cosh(l / 2) / (std::sin(th0) * std::cosh(r + l / 2)));
            double asym = (2.0 / std::sin(th0)) * std::cosh(l / 2) * std::exp(-r - l / 2);
            CHECK(hp == doctest::Approx(asym).epsilon(0.01));
        }
}

TEST_CASE("oracle reports are deterministic") {
    TrialConfig cfg;
    cfg.seed = 99;
    cfg.trials = 2000;
    CHECK(oracle_lemma_angle(cfg).str() == oracle_lemma_angle(cfg).str());
    CHECK(oracle_lemma_tech(cfg).str() == oracle_lemma_tech(cfg).str());
    CHECK(oracle_lemma_poly(cfg).str() == oracle_lemma_poly(cfg).str());
    CHECK(oracle_quadrilateral(cfg).str() == oracle_quadrilateral(cfg).str());
}
