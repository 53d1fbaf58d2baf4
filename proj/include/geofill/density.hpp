#pragma once

// Drivers producing epsilon-dense closed geodesics: a ball cover of the
// surface, nested chord systems inside each ball, and the chained shadowing
// construction applied to all chords at target epsilon/2. Also the oriented
// variant (dense in the unit tangent bundle) and self-intersection counting.

#include <string>
#include <vector>

#include "geofill/construction.hpp"

namespace geofill {

struct CoverageVerificationFailed : Error { using Error::Error; };
struct NearTangentialCrossing : Error { using Error::Error; };

struct BallCover {
    std::vector<SurfacePoint> centers;
    double radius = 0.0;  // covering radius, R_X or 2 R_X
    double R_X = 0.0;     // min(1, injectivity radius)
};

// Greedy maximal R_X-separated centers; balls of the given multiple of R_X
// around them cover the surface (verified on a sampling grid).
BallCover build_ball_cover(const Surface& s, double radius_mult);

// Chords of one cover ball, in the canonical frame of its center: boundary
// points spaced epsilon along the circle of radius R, neighbors joined by
// nested disjoint chords.
struct BallChords {
    SurfacePoint center;
    double R = 0.0;
    double epsilon = 0.0;
    int n_points = 0;
    std::vector<HSegment> chords;
};

BallChords build_chords(const SurfacePoint& center, double R, double epsilon);

struct DensityReport {
    double epsilon = 0.0;
    int n_segments = 0;
    double length = 0.0;
    double upper_bound = 0.0;  // from the construction certificate
    double lower_bound = 0.0;  // area / (2 sinh eps): any eps-dense curve is this long
    double max_gap = 0.0;      // certified density bound over the sample grid
    double fitted_C = 0.0;     // length / ((1/eps) log(1/eps))
    long long crossings = -1;  // self-intersection count, -1 when skipped
    bool quadratic_ok = true;  // crossings <= (length / injrad)^2
    Certificate cert;

    bool passed() const;
    std::string str() const;
};

struct DenseResult {
    ShadowGeodesic gamma;
    TracedGeodesic traced;  // one period, assembled piecewise
    BallCover cover;
    std::vector<BallChords> chords;
    ChainedLoop loop;
    DensityReport report;
};

DenseResult build_dense_geodesic(const Surface& s, const ConstructionConstants& k,
                                 double epsilon);
DenseResult build_dense_geodesic(const Surface& s, const ClosedGeodesic& g0, double epsilon);

struct UTReport {
    double epsilon = 0.0;
    double l = 0.0;  // probe segment length
    int n_segments = 0;
    double length = 0.0;
    double upper_bound = 0.0;
    int trials = 0;
    int within = 0;     // probes certified within epsilon of an oriented chord
    double worst = 0.0; // worst certified probe gap
    Certificate cert;

    bool passed() const;
    std::string str() const;
};

struct UTResult {
    ShadowGeodesic gamma;
    BallCover cover;
    UTReport report;
};

// Theorem on unit-tangent density: balls of radius 2 R_X, all oriented chords
// between boundary-point pairs, spot-checked on random oriented probes of
// length l.
UTResult build_ut_dense_geodesic(const Surface& s, const ConstructionConstants& k,
                                 double epsilon, double l, int trials = 1000,
                                 unsigned seed = 7);
UTResult build_ut_dense_geodesic(const Surface& s, const ClosedGeodesic& g0, double epsilon,
                                 double l, int trials = 1000, unsigned seed = 7);

// One period of the tightened loop, traced piece by piece from the per-piece
// holonomy axes (a single global axis lift would drift by delta * e^(L/2)).
TracedGeodesic trace_loop_geodesic(const ChainedLoop& loop, const Surface& s);

// Transverse self-crossings of one period. Tolerance 1e-9 on arc windows;
// crossings flatter than the angular tolerance raise NearTangentialCrossing.
long long self_intersections(const TracedGeodesic& t, const Surface& s);
long long self_intersections(const ClosedGeodesic& g, const Surface& s);

}  // namespace geofill
