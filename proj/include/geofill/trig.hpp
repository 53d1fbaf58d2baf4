#pragma once

// Convex hyperbolic polygons, their ears, and the closed-form quantities
// behind the shadowing construction: the disjointness threshold m(theta0),
// the shadowing radius r_eps, and the symmetric-quadrilateral heights.

#include <vector>

#include "geofill/hplane.hpp"

namespace geofill {

struct DegeneratePolygon : Error { using Error::Error; };
struct OutOfRangeAngle : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };

// Compact convex polygon, vertices in cyclic order (either orientation
// accepted, stored counterclockwise). Convexity is validated on construction.
class ConvexPolygon {
  public:
    explicit ConvexPolygon(std::vector<HPoint> vertices);

    const std::vector<HPoint>& vertices() const { return verts_; }
    int size() const { return static_cast<int>(verts_.size()); }

    // Side i runs from vertex i to vertex i+1; the oriented complete geodesic
    // containing it has the polygon interior on a fixed side.
    const std::vector<HGeodesic>& side_geodesics() const { return sides_; }
    HSegment side(int i) const;

    // Interior angle at vertex i.
    double interior_angle(int i) const { return angles_[i]; }

    // Hyperboloid-model vertex centroid; equivariant under isometries.
    HPoint interior_point() const { return centroid_; }

    bool contains(const HPoint& p, double tol = 1e-12) const;

    // Gauss-Bonnet area: (n-2) pi - sum of interior angles.
    double area() const;

    // Max over vertex pairs of their distance; equals the intrinsic diameter
    // for compact convex polygons.
    double diameter() const;

  private:
    std::vector<HPoint> verts_;
    std::vector<HGeodesic> sides_;
    std::vector<double> angles_;
    HPoint centroid_{0, 1};
};

struct Ear {
    int base_side_index = 0;          // side skipped by the chord
    HPoint triangle[3];               // v_{i}, v_{i+1}, v_{i+2}
    double angles[3] = {0, 0, 0};
};

// Angle at vertex b of the geodesic triangle (a, b, c), by the hyperbolic law
// of cosines on the side lengths.
double triangle_angle(const HPoint& a, const HPoint& b, const HPoint& c);

std::vector<Ear> ears_of(const ConvexPolygon& p);

// theta_P: minimum over all ears of all three ear angles. Any chord of P with
// endpoints on distinct sides makes an angle >= theta_P at one endpoint.
double ear_min_angle(const ConvexPolygon& p);

// m(theta0) = arccosh(2/sin^2(theta0) - 1): segments at least this long with
// both flank angles >= theta0 have disjoint flanking geodesics.
double disjointness_threshold(double theta0);

// r_eps = log(1/eps) + log(4/sin(theta0)).
double shadow_radius(double epsilon, double theta0);

// Height of the symmetric quadrilateral: h = arcsinh(sinh(d) cosh(half_len)).
double quad_height(double d, double half_len);

// h' = arcsinh((1/sin theta0) cosh(l/2)/cosh(r_eps + l/2)); always <= eps/2
// when r_eps is the shadowing radius.
double worst_case_offset(double epsilon, double theta0, double seg_len);

// Regular n-gon with the given interior angle, centered at i. The circumradius
// is solved by bisection on the geometrically measured angle.
ConvexPolygon regular_polygon(int n, double interior_angle);

}  // namespace geofill
