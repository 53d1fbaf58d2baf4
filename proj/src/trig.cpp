#include "geofill/trig.hpp"

#include <algorithm>
#include <cmath>

namespace geofill {

double triangle_angle(const HPoint& a, const HPoint& b, const HPoint& c) {
    double ab = dist(a, b), bc = dist(b, c), ac = dist(a, c);
    double num = std::cosh(ab) * std::cosh(bc) - std::cosh(ac);
    double den = std::sinh(ab) * std::sinh(bc);
    if (!(den > 0.0)) throw DegeneratePolygon("triangle_angle: zero-length side");
    return std::acos(std::clamp(num / den, -1.0, 1.0));
}

ConvexPolygon::ConvexPolygon(std::vector<HPoint> vertices) : verts_(std::move(vertices)) {
    int n = static_cast<int>(verts_.size());
    if (n < 3) throw DegeneratePolygon("ConvexPolygon: need at least 3 vertices");

    // orientation in the Klein model (geodesics are chords there)
    std::vector<double> kx(n), ky(n);
    for (int i = 0; i < n; ++i) to_klein(verts_[i], kx[i], ky[i]);
    double area2 = 0.0;
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        area2 += kx[i] * ky[j] - kx[j] * ky[i];
    }
    if (area2 < 0.0) {
        std::reverse(verts_.begin(), verts_.end());
        std::reverse(kx.begin(), kx.end());
        std::reverse(ky.begin(), ky.end());
    }
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n, k = (i + 2) % n;
        double cross = (kx[j] - kx[i]) * (ky[k] - ky[j]) - (ky[j] - ky[i]) * (kx[k] - kx[j]);
        if (cross <= 0.0) throw DegeneratePolygon("ConvexPolygon: not strictly convex");
    }

    angles_.resize(n);
    for (int i = 0; i < n; ++i) {
        int h = (i + n - 1) % n, j = (i + 1) % n;
        angles_[i] = triangle_angle(verts_[h], verts_[i], verts_[j]);
        if (angles_[i] < 1e-6) throw DegeneratePolygon("ConvexPolygon: near-zero interior angle");
        if (angles_[i] > M_PI - 1e-9) throw DegeneratePolygon("ConvexPolygon: reflex angle");
    }

    sides_.reserve(n);
    for (int i = 0; i < n; ++i) sides_.push_back(geodesic_through(verts_[i], verts_[(i + 1) % n]));

    double X0 = 0.0, X1 = 0.0, X2 = 0.0;
    for (const HPoint& v : verts_) {
        double a, b, c;
        to_hyperboloid(v, a, b, c);
        X0 += a; X1 += b; X2 += c;
    }
    double norm = std::sqrt(X0 * X0 - X1 * X1 - X2 * X2);
    centroid_ = hyperboloid_to_hplane(X0 / norm, X1 / norm, X2 / norm);
}

HSegment ConvexPolygon::side(int i) const {
    int n = size();
    return HSegment{verts_[i % n], verts_[(i + 1) % n]};
}

bool ConvexPolygon::contains(const HPoint& p, double tol) const {
    double px, py;
    to_klein(p, px, py);
    int n = size();
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        double ax, ay, bx, by;
        to_klein(verts_[i], ax, ay);
        to_klein(verts_[j], bx, by);
        double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        if (cross < -tol) return false;
    }
    return true;
}

double ConvexPolygon::area() const {
    double s = 0.0;
    for (double a : angles_) s += a;
    return (size() - 2) * M_PI - s;
}

double ConvexPolygon::diameter() const {
    double best = 0.0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            best = std::max(best, dist(verts_[i], verts_[j]));
    return best;
}

std::vector<Ear> ears_of(const ConvexPolygon& p) {
    int n = p.size();
    std::vector<Ear> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Ear e;
        e.base_side_index = (i + 1) % n;  // side between the skipped vertex's sides
        e.triangle[0] = p.vertices()[i];
        e.triangle[1] = p.vertices()[(i + 1) % n];
        e.triangle[2] = p.vertices()[(i + 2) % n];
        e.angles[0] = triangle_angle(e.triangle[2], e.triangle[0], e.triangle[1]);
        e.angles[1] = triangle_angle(e.triangle[0], e.triangle[1], e.triangle[2]);
        e.angles[2] = triangle_angle(e.triangle[1], e.triangle[2], e.triangle[0]);
        out.push_back(e);
    }
    return out;
}

double ear_min_angle(const ConvexPolygon& p) {
    double best = M_PI;
    for (const Ear& e : ears_of(p))
        for (double a : e.angles) best = std::min(best, a);
    if (best < 1e-6) throw DegeneratePolygon("ear_min_angle: degenerate ear");
    return best;
}

double disjointness_threshold(double theta0) {
    if (!(theta0 > 0.0) || theta0 > M_PI / 2 + 1e-12)
        throw OutOfRangeAngle("disjointness_threshold: theta0 outside (0, pi/2]");
    double s = std::sin(theta0);
    return std::acosh(std::max(1.0, 2.0 / (s * s) - 1.0));
}

double shadow_radius(double epsilon, double theta0) {
    if (!(epsilon > 0.0)) throw OutOfRange("shadow_radius: epsilon must be positive");
    if (!(theta0 > 0.0) || theta0 > M_PI / 2 + 1e-12)
        throw OutOfRangeAngle("shadow_radius: theta0 outside (0, pi/2]");
    return std::log(1.0 / epsilon) + std::log(4.0 / std::sin(theta0));
}

double quad_height(double d, double half_len) {
    if (!(d > 0.0)) throw OutOfRange("quad_height: d must be positive");
    return std::asinh(std::sinh(d) * std::cosh(half_len));
}

double worst_case_offset(double epsilon, double theta0, double seg_len) {
    double r = shadow_radius(epsilon, theta0);
    double hl = 0.5 * seg_len;
    return std::asinh(std::cosh(hl) / (std::sin(theta0) * std::cosh(r + hl)));
}

ConvexPolygon regular_polygon(int n, double interior_angle) {
    if (n < 3) throw DegeneratePolygon("regular_polygon: need n >= 3");
    if (!(interior_angle > 0.0) || interior_angle >= M_PI * (1.0 - 2.0 / n))
        throw OutOfRangeAngle("regular_polygon: angle not realizable");

    HPoint center(0.0, 1.0);
    auto build = [&](double rho) {
        std::vector<HPoint> vs;
        HPoint top(0.0, std::exp(rho));
        for (int k = 0; k < n; ++k)
            vs.push_back(apply(rotation_about(center, 2.0 * M_PI * k / n), top));
        return vs;
    };
    auto angle_at_rho = [&](double rho) {
        std::vector<HPoint> vs = build(rho);
        return triangle_angle(vs[0], vs[1], vs[2]);
    };
    // interior angle decreases from the Euclidean limit pi(1-2/n) to 0
    double lo = 1e-6, hi = 20.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (angle_at_rho(mid) > interior_angle) lo = mid; else hi = mid;
    }
    return ConvexPolygon(build(0.5 * (lo + hi)));
}

}  // namespace geofill
