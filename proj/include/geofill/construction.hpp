#pragma once

// Segment-shadowing closed geodesics: given a surface with a validated
// filling geodesic gamma0 and a collection of geodesic segments, build a
// single closed geodesic containing every segment in its epsilon
// neighborhood, with a certified length bound. The chained loop is assembled
// in the universal cover from per-piece local frames so that arbitrarily
// long results never overflow plain matrix entries.

#include <string>
#include <vector>

#include "geofill/surface.hpp"

namespace geofill {

struct MuSearchFailed : Error { using Error::Error; };
struct ExtensionBudgetExceeded : Error { using Error::Error; };
struct SideBookkeepingFailure : Error { using Error::Error; };
struct NonHyperbolicHolonomy : Error { using Error::Error; };

// PSL(2,R) element kept as e^logscale * (a b; c d) with the matrix part
// normalized to unit max entry, so translation lengths in the thousands stay
// representable.
struct ScaledIsometry {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double logscale = 0.0;

    static ScaledIsometry from(const Isometry& m);
    void normalize();
    // log of |trace| of the true matrix
    double log_abs_trace() const;
    bool hyperbolic() const;
    double translation_len() const;
    HGeodesic axis() const;  // oriented toward the attracting fixed point
    ScaledIsometry inverse() const;
};

ScaledIsometry operator*(const ScaledIsometry& x, const ScaledIsometry& y);

// A geodesic segment on the surface given by one lift of its endpoints.
struct SurfaceSegment {
    HPoint a{0, 1}, b{0, 2};
};

// Transverse meeting of a constructed arc with gamma0, with the alignment
// data needed to continue the loop along gamma0. Lift data lives in the
// crossing's own local frame; to_piece carries it into the owning piece's
// frame (far-away lifts would be numerically degenerate there).
struct MarkedCrossing {
    HPoint point{0, 1};  // crossing lift, local frame
    HGeodesic flank;     // gamma0 lift through it, local frame, oriented
    Isometry to_piece;   // local frame -> owning piece's frame
    double s_gamma = 0;  // gamma0 arclength position of the crossing on X
    double angle = 0;    // crossing angle, pi/2 for orthogonal arcs
    int side = 0;        // side of gamma0 holding the arc next to the crossing
    double s_along = 0;  // extension length beyond the original endpoint
};

// Arc from gamma0 to itself, orthogonal at both endpoints, leaving and
// returning on the same side.
struct MuArc {
    int side = 0;
    double length = 0.0;
    MarkedCrossing start, end;
};

struct ConstructionConstants {
    double theta0 = 0;      // min ear angle over the complementary faces
    double D = 0;           // max face diameter
    double len_gamma0 = 0;
    double m_theta0 = 0;
    double mu_plus_len = 0, mu_minus_len = 0;
    double C_X_ext = 0;     // per-segment extension constant
    double K_X = 0;         // C_X_ext + len_gamma0 + max mu length
    ClosedGeodesic gamma0;
    TracedGeodesic traced0;
    double s0 = 0;          // gamma0 param of the trace origin on the axis marking
    MuArc mu_plus, mu_minus;
    std::vector<ConvexPolygon> faces;
};

ConstructionConstants compute_constants(const Surface& s, const ClosedGeodesic& g0);

struct ExtendedSegment {
    HPoint a{0, 1}, b{0, 2};  // original segment lift, canonical frame
    MarkedCrossing start, end;
    double length = 0.0;      // start.point to end.point
};

// Extends c beyond r_eps on both sides to crossings with gamma0 at angle
// >= theta0, then past m(theta0) total length if needed.
ExtendedSegment extend_segment(const SurfaceSegment& c, const ConstructionConstants& k,
                               const Surface& s, double epsilon);

struct ChainedLoop {
    struct Piece {
        HPoint a{0, 1}, b{0, 2};  // underlying segment lift (mu: the arc ends)
        MarkedCrossing start, end;
        double length = 0.0;
        bool is_mu = false;
        int segment_index = -1;  // index into the input segments, -1 for mu
    };
    std::vector<Piece> pieces;
    double len_gamma0 = 0.0;
    double upper_bound = 0.0;  // piecewise-length bound including connectors
};

// Cyclically chains the extended segments, inserting mu arcs whenever two
// consecutive pieces would depart from the same side of gamma0.
ChainedLoop chain(const std::vector<ExtendedSegment>& segs, const ConstructionConstants& k,
                  const Surface& s);

struct ShadowGeodesic {
    double length = 0.0;
    ScaledIsometry holonomy;  // in the local frame of the first piece
    HGeodesic axis;           // same frame
};

ShadowGeodesic tighten(const ChainedLoop& loop, const Surface& s);

// Alignment isometry V_j carrying piece j+1's frame into piece j's frame, for
// each junction of the loop; tighten's holonomy is their ordered product.
std::vector<Isometry> alignment_steps(const ChainedLoop& loop);

// Holonomy of the tightened loop read in each piece's own frame (the cyclic
// rotation of the product starting at that piece); its axis is the accurate
// local description of the closed geodesic near that piece.
std::vector<ScaledIsometry> piece_holonomies(const ChainedLoop& loop);

struct SegmentCertificate {
    int segment_index = -1;
    double ext_start = 0, ext_end = 0;      // extension lengths per side
    double angle_start = 0, angle_end = 0;  // flank crossing angles
    double shadow = 0;      // measured max distance from the segment to gamma
    bool crossings_ok = false;  // gamma's axis crosses both flanks
};

struct Certificate {
    double epsilon = 0;
    double length = 0;
    double upper_bound = 0;  // N (K_X + avg + 2 log(1/eps))
    bool nested_ok = false;
    bool mu_ok = true;  // every inserted mu piece is crossed by gamma's axis
    std::vector<SegmentCertificate> rows;

    bool passed() const;
    std::string str() const;
};

// Tightens an already chained loop and certifies the result. Callers that
// need control over the cyclic segment order (which chain preserves as given)
// can run extend_segment / chain themselves and finish here.
std::pair<ShadowGeodesic, Certificate> certify_loop(const ChainedLoop& loop, const Surface& s,
                                                    const ConstructionConstants& k,
                                                    double epsilon);

std::pair<ShadowGeodesic, Certificate> build_shadowing_geodesic(
    const std::vector<SurfaceSegment>& segments, const Surface& s,
    const ConstructionConstants& k, double epsilon);

std::pair<ShadowGeodesic, Certificate> build_shadowing_geodesic(
    const std::vector<SurfaceSegment>& segments, const Surface& s,
    const ClosedGeodesic& g0, double epsilon);

}  // namespace geofill
