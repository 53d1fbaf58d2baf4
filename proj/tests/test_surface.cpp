#include "geofill/surface.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

using namespace geofill;

namespace {

const double kSystole = 2.0 * std::acosh(1.0 + std::sqrt(2.0));

// All cyclically reduced words up to the given length over +-1..+-gens,
// starting from a fixed first letter to cut the symmetry.
void reduced_words(int gens, int max_len, std::vector<CurveWord>& out) {
    std::vector<int> w;
    auto rec = [&](auto&& self) -> void {
        if (!w.empty()) {
            CurveWord c{w};
            if (c.is_cyclically_reduced()) out.push_back(c);
        }
        if (static_cast<int>(w.size()) == max_len) return;
        for (int l = -gens; l <= gens; ++l) {
            if (l == 0) continue;
            if (!w.empty() && w.back() == -l) continue;
            w.push_back(l);
            self(self);
            w.pop_back();
        }
    };
    rec(rec);
}

}  // namespace

TEST_CASE("curve word utilities") {
    CurveWord w = CurveWord::parse("1 -2 2 3");
    CHECK(w.cyclically_reduced().str() == "1 3");
    CHECK(!w.is_cyclically_reduced());
    CHECK(CurveWord::parse("2 1 -2").cyclically_reduced().str() == "1");
    CHECK(CurveWord::parse("aBc").str() == "1 -2 3");
    CHECK(CurveWord::parse("1 -2 3").inverse().str() == "-3 2 -1");
    CHECK_THROWS_AS(CurveWord::parse("1 x0"), Error);
}

TEST_CASE("bolza invariants") {
    Surface s = Surface::bolza();
    CHECK(s.genus() == 2);
    CHECK(s.sides() == 8);
    CHECK(s.generator_count() == 4);
    CHECK(s.area() == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
    CHECK(s.polygon().area() == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
    for (int i = 0; i < 8; ++i) {
        CHECK(s.polygon().interior_angle(i) == doctest::Approx(M_PI / 4).epsilon(1e-9));
        CHECK(s.partner(i) == (i + 4) % 8);
        // the gluing carries side i onto its partner
        HSegment seg = s.polygon().side(i);
        HSegment dst = s.polygon().side(s.partner(i));
        CHECK(dist(apply(s.gluing(i), seg.a), dst.b) < 1e-9);
        CHECK(dist(apply(s.gluing(i), seg.b), dst.a) < 1e-9);
    }
    // all four generators translate by the systole
    for (const Isometry& g : s.generators()) {
        auto l = translation_length(g);
        REQUIRE(l);
        CHECK(*l == doctest::Approx(kSystole).epsilon(1e-9));
    }
    // the relator is trivial in the group
    Isometry r = s.holonomy_of(s.relator());
    CHECK(std::fabs(std::fabs(r.trace()) - 2.0) < 1e-8);
    CHECK(geodesic_of(CurveWord::parse("1"), s).length ==
          doctest::Approx(kSystole).epsilon(1e-9));
    CHECK_THROWS_AS(geodesic_of(s.relator(), s), TrivialOrNonHyperbolicWord);
    CHECK_THROWS_AS(geodesic_of(CurveWord::parse("1 -1"), s), TrivialOrNonHyperbolicWord);
}

TEST_CASE("bolza systole vs exhaustive word enumeration") {
    Surface s = Surface::bolza();
    std::vector<CurveWord> words;
    reduced_words(4, 6, words);
    double best = 1e9;
    for (const CurveWord& w : words) {
        Isometry h = s.holonomy_of(w);
        if (auto l = translation_length(h)) best = std::min(best, *l);
    }
    CHECK(best == doctest::Approx(kSystole).epsilon(1e-9));
    CHECK(injectivity_radius(s) == doctest::Approx(0.5 * kSystole).epsilon(1e-9));
}

TEST_CASE("canonicalize") {
    Surface s = Surface::bolza();
    std::mt19937_64 rng(41);
    for (int i = 0; i < 200; ++i) {
        HPoint p = testutil::random_point(rng, 1.0);
        auto [sp, g] = s.canonicalize(p);
        CHECK(s.polygon().contains(sp.rep, 1e-9));
        CHECK(dist(apply(g, p), sp.rep) < 1e-8);
        // idempotent and deck-invariant
        auto [sp2, g2] = s.canonicalize(sp.rep);
        CHECK(dist(sp2.rep, sp.rep) < 1e-9);
        int k = i % 4;
        auto [sp3, g3] = s.canonicalize(apply(s.generators()[k], p));
        CHECK(dist(sp3.rep, sp.rep) < 1e-7);
    }
}

TEST_CASE("surface distance") {
    Surface s = Surface::bolza();
    std::mt19937_64 rng(42);
    std::vector<SurfacePoint> pts;
    for (int i = 0; i < 12; ++i)
        pts.push_back(s.canonicalize(testutil::random_point(rng, 1.0)).first);
    for (int i = 0; i < 12; ++i) {
        CHECK(surface_distance(pts[i], pts[i], s) < 1e-9);
        for (int j = i + 1; j < 12; ++j) {
            double dij = surface_distance(pts[i], pts[j], s);
            CHECK(dij == doctest::Approx(surface_distance(pts[j], pts[i], s)).epsilon(1e-10));
            CHECK(dij <= dist(pts[i].rep, pts[j].rep) + 1e-10);
            CHECK(dij <= s.diameter() + 1e-9);
        }
    }
    // triangle inequality on all sampled triples
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            for (int k = 0; k < 12; ++k)
                CHECK(surface_distance(pts[i], pts[k], s) <=
                      surface_distance(pts[i], pts[j], s) +
                          surface_distance(pts[j], pts[k], s) + 1e-9);
}

TEST_CASE("enumeration and lifts cover") {
    Surface s = Surface::bolza();
    HPoint x0 = s.polygon().interior_point();
    auto elems = s.enumerate_elements(x0, 4.0);
    // identity present, inverses present, words reproduce the isometry
    int id_count = 0;
    for (const auto& e : elems) {
        if (e.word.empty()) ++id_count;
        CHECK(dist(apply(e.iso, x0), apply(s.holonomy_of(CurveWord{e.word}), x0)) < 1e-8);
        Isometry inv = e.iso.inverse();
        bool found = false;
        for (const auto& f : elems)
            if (dist(apply(f.iso, x0), apply(inv, x0)) < 1e-8 &&
                dist(apply(f.iso, HPoint(0.3, 0.7)), apply(inv, HPoint(0.3, 0.7))) < 1e-8) {
                found = true;
                break;
            }
        CHECK(found);
    }
    CHECK(id_count == 1);

    // translates from lifts_within cover the requested ball
    std::mt19937_64 rng(43);
    auto lifts = s.lifts_within(x0, 2.5);
    std::uniform_real_distribution<double> ua(0, 2 * M_PI), ur(0, 2.5);
    for (int i = 0; i < 300; ++i) {
        double r = ur(rng), a = ua(rng);
        HPoint p = apply(rotation_about(x0, a), point_at(HGeodesic({x0.x, false}, IdealPoint::infinity()), std::log(x0.y) + r));
        bool covered = false;
        for (const auto& g : lifts)
            if (ConvexPolygon{[&] {
                    std::vector<HPoint> vs;
                    for (const HPoint& v : s.polygon().vertices()) vs.push_back(apply(g.iso, v));
                    return vs;
                }()}
                    .contains(p, 1e-9)) {
                covered = true;
                break;
            }
        CHECK(covered);
    }
    Surface capped = Surface::bolza();
    capped.set_lift_radius_cap(3.0);
    CHECK_THROWS_AS(capped.lifts_within(x0, 10.0), RadiusCapExceeded);
}

TEST_CASE("tracing conserves length and holonomy") {
    Surface s = Surface::bolza();
    // includes generic, vertex-crossing, side-running and doubled words
    const char* words[] = {"1",       "1 2",        "1 -2 3", "1 -2 3 -4",
                           "1 1 3 4 -2", "1 -2 3 -4 1 -2 3 -4", "1 2 -1 -2",
                           "1 3", "2 -4 2 4", "1 2 3 4"};
    for (const char* ws : words) {
        CAPTURE(ws);
        ClosedGeodesic g = geodesic_of(CurveWord::parse(ws), s);
        TracedGeodesic t = trace_geodesic(g, s);
        CHECK(t.total_length == doctest::Approx(g.length).epsilon(1e-6));
        double sum = 0.0;
        for (const HSegment& a : t.arcs) sum += dist(a.a, a.b);
        CHECK(sum == doctest::Approx(g.length).epsilon(1e-6));
        // homotopy word read off the crossings is conjugate to the input class
        Isometry h = s.holonomy_of(t.word);
        CHECK(std::fabs(std::fabs(h.trace()) - std::fabs(g.holonomy.trace())) < 1e-6);
        // arcs stay in the closed polygon and consecutive arcs match up as
        // points of the surface (at vertex crossings the matching translate
        // is a product of gluings, so compare projections)
        for (size_t i = 0; i < t.arcs.size(); ++i) {
            CHECK(s.polygon().contains(t.arcs[i].a, 1e-6));
            CHECK(s.polygon().contains(t.arcs[i].b, 1e-6));
            const HSegment& nxt = t.arcs[(i + 1) % t.arcs.size()];
            SurfacePoint a = s.canonicalize(t.arcs[i].b).first;
            SurfacePoint b = s.canonicalize(nxt.a).first;
            CHECK(surface_distance(a, b, s) < 1e-5);
        }
    }
}

TEST_CASE("clip_to_polygon") {
    Surface s = Surface::bolza();
    const ConvexPolygon& p = s.polygon();
    HGeodesic through = geodesic_from_direction(p.interior_point(), 1.0, 0.3);
    auto iv = clip_to_polygon(through, p);
    REQUIRE(iv);
    CHECK(p.contains(point_at(through, 0.5 * (iv->first + iv->second)), 1e-9));
    CHECK(iv->second > iv->first);
    HGeodesic miss({50.0, false}, {51.0, false});
    CHECK(!clip_to_polygon(miss, p));
}

TEST_CASE("complementary polygons of the shipped filling word") {
    Surface s = Surface::bolza();
    ClosedGeodesic g0 = geodesic_of(s.named_words().at("gamma0"), s);
    auto faces = complementary_polygons(g0, s);
    CHECK(faces.size() == 3);
    double total = 0.0;
    for (const ConvexPolygon& f : faces) total += f.area();
    CHECK(total == doctest::Approx(s.area()).epsilon(1e-6));
    // a simple closed geodesic never fills
    CHECK_THROWS_AS(complementary_polygons(geodesic_of(CurveWord::parse("1"), s), s),
                    NotFilling);
    CHECK_THROWS_AS(complementary_polygons(geodesic_of(CurveWord::parse("1 2"), s), s),
                    NotFilling);
}

TEST_CASE("geodesic lifts meet the requested ball") {
    Surface s = Surface::bolza();
    ClosedGeodesic g0 = geodesic_of(s.named_words().at("gamma0"), s);
    auto lifts = lifts_of_geodesic(g0, s, 2.0);
    CHECK(lifts.size() >= 4);
    HPoint x0 = s.polygon().interior_point();
    for (const HGeodesic& l : lifts) CHECK(dist_to_geodesic(l, x0) <= 2.0 + 1e-9);
    // every traced arc lift must be among them
    TracedGeodesic t = trace_geodesic(g0, s);
    for (const HGeodesic& al : t.arc_lifts) {
        bool found = false;
        for (const HGeodesic& l : lifts)
            if ((l.e1 == al.e1 && l.e2 == al.e2) ||
                (std::fabs(l.e1.v - al.e1.v) < 1e-7 && !l.e1.at_inf && !al.e1.at_inf &&
                 std::fabs(l.e2.v - al.e2.v) < 1e-7 && !l.e2.at_inf && !al.e2.at_inf) ||
                (l.e1.at_inf == al.e1.at_inf && l.e2.at_inf == al.e2.at_inf &&
                 std::fabs((l.e1.at_inf ? l.e2.v : l.e1.v) - (al.e1.at_inf ? al.e2.v : al.e1.v)) < 1e-7))
                found = true;
        CHECK(found);
    }
}

TEST_CASE("file round trip") {
    Surface s = Surface::bolza();
    std::ostringstream o1;
    s.save(o1);
    std::istringstream in(o1.str());
    Surface t = Surface::load(in);
    std::ostringstream o2;
    t.save(o2);
    CHECK(o1.str() == o2.str());
    CHECK(t.genus() == s.genus());
    CHECK(t.sides() == s.sides());
    for (int i = 0; i < s.sides(); ++i) {
        CHECK(t.partner(i) == s.partner(i));
        CHECK(dist(t.polygon().vertices()[i], s.polygon().vertices()[i]) == 0.0);
    }
    CHECK(t.named_words().at("gamma0").str() == s.named_words().at("gamma0").str());
    CHECK(injectivity_radius(t) == doctest::Approx(0.5 * kSystole).epsilon(1e-9));

    std::istringstream bad("GEOFILL-SURFACE v2\n");
    CHECK_THROWS_AS(Surface::load(bad), BadSurfaceFile);
    std::istringstream bad2("GEOFILL-SURFACE v1\ngenus 2\nvertices 3\n");
    CHECK_THROWS_AS(Surface::load(bad2), BadSurfaceFile);
}
