#pragma once

// Geometry of the hyperbolic plane in the upper half-plane model.
// Points are (x, y) with y > 0, geodesics are semicircles orthogonal to the
// real axis or vertical lines, isometries are real 2x2 matrices of unit
// determinant acting as Mobius maps.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace geofill {

inline constexpr double kTol = 1e-10;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CoincidentPoints : Error { using Error::Error; };
struct NotOnGeodesic : Error { using Error::Error; };
struct TangentGeodesics : Error { using Error::Error; };
struct PointOnGeodesic : Error { using Error::Error; };
struct NotHyperbolic : Error { using Error::Error; };

struct HPoint {
    double x = 0.0;
    double y = 1.0;

    HPoint() = default;
    HPoint(double x_, double y_) : x(x_), y(y_) {
        if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw Error("HPoint: invalid coordinates");
    }
};

// A point of the ideal boundary R u {inf}.
struct IdealPoint {
    double v = 0.0;
    bool at_inf = false;

    static IdealPoint infinity() { return {0.0, true}; }
    bool operator==(const IdealPoint& o) const {
        if (at_inf || o.at_inf) return at_inf == o.at_inf;
        return v == o.v;
    }
};

// Oriented complete geodesic, direction runs from e1 toward e2.
struct HGeodesic {
    IdealPoint e1, e2;

    HGeodesic() = default;
    HGeodesic(IdealPoint a, IdealPoint b) : e1(a), e2(b) {
        if (a == b) throw Error("HGeodesic: coincident ideal endpoints");
    }

    bool vertical() const { return e1.at_inf || e2.at_inf; }
    double foot() const { return e1.at_inf ? e2.v : e1.v; }
    double center() const { return 0.5 * (e1.v + e2.v); }
    double radius() const { return 0.5 * std::fabs(e2.v - e1.v); }

    HGeodesic reversed() const { return HGeodesic(e2, e1); }
};

struct HSegment {
    HPoint a, b;
};

// Orientation-preserving isometry of H, unit-determinant 2x2 real matrix
// acting as z -> (az+b)/(cz+d). Entries are renormalized periodically so
// determinant drift from long composition chains stays below tolerance.
struct Isometry {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    int compositions = 0;

    Isometry() = default;
    Isometry(double a_, double b_, double c_, double d_);

    static Isometry identity() { return {}; }
    Isometry inverse() const { return Isometry(d, -b, -c, a); }
    double trace() const { return a + d; }
    bool is_identity(double tol = 1e-8) const;
    void normalize();
};

Isometry operator*(const Isometry& f, const Isometry& g);

// --- distances and incidence ---

double dist(const HPoint& p, const HPoint& q);

HGeodesic geodesic_through(const HPoint& p, const HPoint& q);

// Geodesic through p with Euclidean unit tangent (tx, ty); the direction of
// the returned geodesic agrees with the tangent.
HGeodesic geodesic_from_direction(const HPoint& p, double tx, double ty);

// Signed side of an oriented geodesic: +1 right, -1 left, 0 on it (within tol).
int side_of(const HGeodesic& g, const HPoint& p, double tol = kTol);

// Distance from a point to a complete geodesic (0 if on it).
double dist_to_geodesic(const HGeodesic& g, const HPoint& p);

bool contains_point(const HGeodesic& g, const HPoint& p, double tol = kTol);

// Minimal angle in (0, pi/2] between two geodesics meeting at p.
double angle_at(const HGeodesic& g1, const HGeodesic& g2, const HPoint& p);

// Euclidean unit tangent of g at a point p on g, pointing along g's direction.
void tangent_at(const HGeodesic& g, const HPoint& p, double& tx, double& ty);

std::pair<HPoint, double> foot_of_perpendicular(const HGeodesic& g, const HPoint& p);

struct PerpResult {
    enum Kind { Disjoint, Intersecting, Asymptotic } kind;
    // Disjoint: seg is the common perpendicular, distance its length.
    HSegment seg{HPoint(0, 1), HPoint(0, 2)};
    double distance = 0.0;
    // Intersecting: crossing point and minimal angle there.
    HPoint point{0, 1};
    double angle = 0.0;
};

PerpResult common_perpendicular(const HGeodesic& g1, const HGeodesic& g2);

// Crossing point of two geodesics known (or suspected) to intersect.
std::optional<HPoint> intersect(const HGeodesic& g1, const HGeodesic& g2);

// --- isometry actions ---

HPoint apply(const Isometry& m, const HPoint& p);
IdealPoint apply(const Isometry& m, const IdealPoint& e);
HGeodesic apply_geodesic(const Isometry& m, const HGeodesic& g);

std::optional<double> translation_length(const Isometry& m);

// Axis of a hyperbolic isometry, oriented from repelling toward attracting
// fixed point.
HGeodesic axis_of(const Isometry& m);

// Isometry mapping g onto the upward imaginary axis (e1 -> 0, e2 -> inf).
Isometry to_standard(const HGeodesic& g);

// Translation by (signed) distance t along g, in g's direction.
Isometry translation_along(const HGeodesic& g, double t);

// Unique orientation-preserving isometry taking (p1, q1) to (p2, q2);
// requires dist(p1,q1) == dist(p2,q2) within tolerance.
Isometry map_segment(const HPoint& p1, const HPoint& q1, const HPoint& p2, const HPoint& q2);

// Rotation by angle phi about the point p.
Isometry rotation_about(const HPoint& p, double phi);

// Arclength parametrization of g: point at parameter t, with parameter 0 at
// the point of g closest to i (the "origin" of the standard position).
HPoint point_at(const HGeodesic& g, double t);

// Parameter of a point p lying on g (inverse of point_at).
double param_of(const HGeodesic& g, const HPoint& p);

// --- model conversions ---

// Half-plane -> Klein disk (chordal model); geodesics become straight chords.
void to_klein(const HPoint& p, double& kx, double& ky);
void ideal_to_klein(const IdealPoint& e, double& kx, double& ky);
HPoint klein_to_hplane(double kx, double ky);

// Half-plane -> hyperboloid sheet X0^2 - X1^2 - X2^2 = 1, X0 > 0.
void to_hyperboloid(const HPoint& p, double& X0, double& X1, double& X2);
HPoint hyperboloid_to_hplane(double X0, double X1, double X2);

}  // namespace geofill
