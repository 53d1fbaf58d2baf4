#include "geofill/hplane.hpp"

#include <algorithm>
#include <cmath>

namespace geofill {

namespace {

// Boundary point R u {inf} mapped to an angle on the circle via the Cayley
// transform, used for interleaving tests.
double boundary_angle(const IdealPoint& e) {
    if (e.at_inf) return 0.0;
    // w = (v - i)/(v + i) = (v^2 - 1 - 2iv)/(v^2 + 1)
    double v = e.v;
    return std::atan2(-2.0 * v, v * v - 1.0);
}

bool same_ideal(const IdealPoint& a, const IdealPoint& b, double tol = 1e-12) {
    if (a.at_inf || b.at_inf) return a.at_inf == b.at_inf;
    return std::fabs(a.v - b.v) <= tol * std::max(1.0, std::max(std::fabs(a.v), std::fabs(b.v)));
}

// a*d - b*c with an fma-compensated cross term; the naive form loses all
// accuracy once the entries are large (the products cancel to ~1).
double det2x2(double a, double b, double c, double d) {
    double w = b * c;
    double err = std::fma(-b, c, w);
    return std::fma(a, d, -w) + err;
}

}  // namespace

namespace {

// Rescale to unit determinant when the determinant is resolvable: for entries
// of size s the computed determinant carries roundoff noise ~ s^2 eps, so a
// long composition chain with huge entries has det 1 buried below the noise.
// Its projective action is still accurate; leave such matrices untouched.
void unit_det_rescale(double& a, double& b, double& c, double& d) {
    double s = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
    double det = det2x2(a, b, c, d);
    if (!std::isfinite(det) || !std::isfinite(s) || !(s > 0.0))
        throw Error("Isometry: degenerate matrix");
    double noise = 64.0 * 1.1e-16 * s * s;
    if (det > noise) {
        double r = std::sqrt(det);
        a /= r; b /= r; c /= r; d /= r;
    } else if (!(det > 0.0) && noise < 0.5) {
        throw Error("Isometry: determinant must be positive");
    }
}

}  // namespace

Isometry::Isometry(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
    unit_det_rescale(a, b, c, d);
}

void Isometry::normalize() {
    unit_det_rescale(a, b, c, d);
    compositions = 0;
}

bool Isometry::is_identity(double tol) const {
    double s = (a + d < 0.0) ? -1.0 : 1.0;
    return std::fabs(s * a - 1.0) <= tol && std::fabs(s * d - 1.0) <= tol &&
           std::fabs(b) <= tol && std::fabs(c) <= tol;
}

Isometry operator*(const Isometry& f, const Isometry& g) {
    Isometry r;
    r.a = f.a * g.a + f.b * g.c;
    r.b = f.a * g.b + f.b * g.d;
    r.c = f.c * g.a + f.d * g.c;
    r.d = f.c * g.b + f.d * g.d;
    r.compositions = f.compositions + g.compositions + 1;
    if (r.compositions >= 16) r.normalize();
    return r;
}

double dist(const HPoint& p, const HPoint& q) {
    double dx = p.x - q.x, dy = p.y - q.y;
    double s = 0.5 * std::hypot(dx, dy) / std::sqrt(p.y * q.y);
    return 2.0 * std::asinh(s);
}

HGeodesic geodesic_through(const HPoint& p, const HPoint& q) {
    double scale = std::max({std::fabs(p.x), std::fabs(q.x), p.y, q.y, 1.0});
    if (std::fabs(p.x - q.x) <= 1e-13 * scale) {
        if (std::fabs(p.y - q.y) <= 1e-13 * scale)
            throw CoincidentPoints("geodesic_through: coincident points");
        IdealPoint foot{0.5 * (p.x + q.x), false};
        if (q.y > p.y) return HGeodesic(foot, IdealPoint::infinity());
        return HGeodesic(IdealPoint::infinity(), foot);
    }
    double c = (p.x * p.x + p.y * p.y - q.x * q.x - q.y * q.y) / (2.0 * (p.x - q.x));
    double r = std::hypot(p.x - c, p.y);
    double ap = std::atan2(p.y, p.x - c);
    double aq = std::atan2(q.y, q.x - c);
    if (aq < ap) return HGeodesic({c - r, false}, {c + r, false});
    return HGeodesic({c + r, false}, {c - r, false});
}

HGeodesic geodesic_from_direction(const HPoint& p, double tx, double ty) {
    double n = std::hypot(tx, ty);
    if (!(n > 0.0)) throw Error("geodesic_from_direction: zero tangent");
    tx /= n; ty /= n;
    if (std::fabs(tx) <= 1e-13) {
        IdealPoint foot{p.x, false};
        if (ty > 0.0) return HGeodesic(foot, IdealPoint::infinity());
        return HGeodesic(IdealPoint::infinity(), foot);
    }
    // center on the real axis with radius vector orthogonal to the tangent
    double c = p.x + p.y * ty / tx;
    double r = std::hypot(p.x - c, p.y);
    // moving along (tx,ty): angle atan2(y, x-c) decreases iff heading to c+r
    double cross = (p.x - c) * ty - p.y * tx;  // d(angle)/dt sign
    if (cross < 0.0) return HGeodesic({c - r, false}, {c + r, false});
    return HGeodesic({c + r, false}, {c - r, false});
}

double dist_to_geodesic(const HGeodesic& g, const HPoint& p) {
    if (g.vertical()) return std::asinh(std::fabs(p.x - g.foot()) / p.y);
    double c = g.center(), r = g.radius();
    double f = (p.x - c) * (p.x - c) + p.y * p.y - r * r;
    return std::asinh(std::fabs(f) / (2.0 * r * p.y));
}

int side_of(const HGeodesic& g, const HPoint& p, double tol) {
    if (dist_to_geodesic(g, p) < tol) return 0;
    if (g.vertical()) {
        bool up = g.e2.at_inf;
        double s = p.x - g.foot();
        return (up ? s : -s) > 0.0 ? 1 : -1;
    }
    double c = g.center(), r = g.radius();
    double f = (p.x - c) * (p.x - c) + p.y * p.y - r * r;
    // traveling left-to-right over the top, the right-hand side is inside
    bool ltr = g.e1.v < g.e2.v;
    double s = ltr ? -f : f;
    return s > 0.0 ? 1 : -1;
}

bool contains_point(const HGeodesic& g, const HPoint& p, double tol) {
    return dist_to_geodesic(g, p) < tol;
}

void tangent_at(const HGeodesic& g, const HPoint& p, double& tx, double& ty) {
    if (g.vertical()) {
        tx = 0.0;
        ty = g.e2.at_inf ? 1.0 : -1.0;
        return;
    }
    double c = g.center(), r = g.radius();
    tx = p.y / r;
    ty = (c - p.x) / r;
    if (g.e1.v > g.e2.v) { tx = -tx; ty = -ty; }
}

double angle_at(const HGeodesic& g1, const HGeodesic& g2, const HPoint& p) {
    if (!contains_point(g1, p, 1e-8) || !contains_point(g2, p, 1e-8))
        throw NotOnGeodesic("angle_at: point not on both geodesics");
    double ux, uy, vx, vy;
    tangent_at(g1, p, ux, uy);
    tangent_at(g2, p, vx, vy);
    double dot = std::clamp(std::fabs(ux * vx + uy * vy), 0.0, 1.0);
    double ang = std::acos(dot);
    if (ang < 1e-10) throw TangentGeodesics("angle_at: tangent geodesics");
    return ang;
}

Isometry to_standard(const HGeodesic& g) {
    if (g.e1.at_inf) return Isometry(0.0, -1.0, 1.0, -g.e2.v);
    if (g.e2.at_inf) return Isometry(1.0, -g.e1.v, 0.0, 1.0);
    double e1 = g.e1.v, e2 = g.e2.v;
    if (e1 > e2) return Isometry(1.0, -e1, 1.0, -e2);
    return Isometry(1.0, -e1, -1.0, e2);
}

std::pair<HPoint, double> foot_of_perpendicular(const HGeodesic& g, const HPoint& p) {
    double d = dist_to_geodesic(g, p);
    if (d < kTol) throw PointOnGeodesic("foot_of_perpendicular: point on geodesic");
    Isometry S = to_standard(g);
    HPoint w = apply(S, p);
    HPoint foot_std(0.0, std::hypot(w.x, w.y));
    return {apply(S.inverse(), foot_std), d};
}

std::optional<HPoint> intersect(const HGeodesic& g1, const HGeodesic& g2) {
    if (g1.vertical() && g2.vertical()) return std::nullopt;
    if (g1.vertical() || g2.vertical()) {
        const HGeodesic& v = g1.vertical() ? g1 : g2;
        const HGeodesic& s = g1.vertical() ? g2 : g1;
        double c = s.center(), r = s.radius();
        double y2 = r * r - (v.foot() - c) * (v.foot() - c);
        if (y2 <= 0.0) return std::nullopt;
        return HPoint(v.foot(), std::sqrt(y2));
    }
    double c1 = g1.center(), r1 = g1.radius(), c2 = g2.center(), r2 = g2.radius();
    if (c1 == c2) return std::nullopt;
    double x = (r1 * r1 - r2 * r2 - c1 * c1 + c2 * c2) / (2.0 * (c2 - c1));
    double y2 = r1 * r1 - (x - c1) * (x - c1);
    if (y2 <= 0.0) return std::nullopt;
    return HPoint(x, std::sqrt(y2));
}

PerpResult common_perpendicular(const HGeodesic& g1, const HGeodesic& g2) {
    PerpResult res;
    if (same_ideal(g1.e1, g2.e1) || same_ideal(g1.e1, g2.e2) ||
        same_ideal(g1.e2, g2.e1) || same_ideal(g1.e2, g2.e2)) {
        res.kind = PerpResult::Asymptotic;
        return res;
    }
    double a1 = boundary_angle(g1.e1), a2 = boundary_angle(g1.e2);
    double lo = std::min(a1, a2), hi = std::max(a1, a2);
    auto inside = [&](double t) { return t > lo && t < hi; };
    bool b1 = inside(boundary_angle(g2.e1));
    bool b2 = inside(boundary_angle(g2.e2));
    if (b1 != b2) {
        res.kind = PerpResult::Intersecting;
        auto p = intersect(g1, g2);
        if (!p) throw Error("common_perpendicular: interleaved but no crossing found");
        res.point = *p;
        double ux, uy, vx, vy;
        tangent_at(g1, *p, ux, uy);
        tangent_at(g2, *p, vx, vy);
        res.angle = std::acos(std::clamp(std::fabs(ux * vx + uy * vy), 0.0, 1.0));
        return res;
    }
    res.kind = PerpResult::Disjoint;
    Isometry S = to_standard(g1);
    HGeodesic h = apply_geodesic(S, g2);
    if (h.vertical()) throw Error("common_perpendicular: unexpected vertical image");
    double C = h.center(), R = h.radius();
    double rho2 = C * C - R * R;
    if (rho2 <= 0.0) throw Error("common_perpendicular: classification mismatch");
    double rho = std::sqrt(rho2);
    HPoint f1(0.0, rho);
    HPoint f2(rho2 / C, rho * R / std::fabs(C));
    Isometry Si = S.inverse();
    res.seg = HSegment{apply(Si, f1), apply(Si, f2)};
    res.distance = dist(res.seg.a, res.seg.b);
    return res;
}

HPoint apply(const Isometry& m, const HPoint& p) {
    double cxd = m.c * p.x + m.d;
    double den = cxd * cxd + m.c * m.c * p.y * p.y;
    double det = det2x2(m.a, m.b, m.c, m.d);
    double y = det * p.y / den;
    // huge-entry transfer matrices have det 1 below roundoff noise; the image
    // is then pinned to the boundary and only its x coordinate is meaningful
    if (!(y > 0.0)) y = 1e-300;
    return HPoint(((m.a * p.x + m.b) * cxd + m.a * m.c * p.y * p.y) / den, y);
}

IdealPoint apply(const Isometry& m, const IdealPoint& e) {
    if (e.at_inf) {
        if (std::fabs(m.c) <= 1e-14 * std::fabs(m.a)) return IdealPoint::infinity();
        return {m.a / m.c, false};
    }
    double num = m.a * e.v + m.b;
    double den = m.c * e.v + m.d;
    if (std::fabs(den) <= 1e-14 * (std::fabs(m.c * e.v) + std::fabs(m.d) + 1e-300))
        return IdealPoint::infinity();
    return {num / den, false};
}

HGeodesic apply_geodesic(const Isometry& m, const HGeodesic& g) {
    return HGeodesic(apply(m, g.e1), apply(m, g.e2));
}

std::optional<double> translation_length(const Isometry& m) {
    double t = std::fabs(m.trace());
    if (t <= 2.0 + 1e-12) return std::nullopt;
    return 2.0 * std::acosh(0.5 * t);
}

HGeodesic axis_of(const Isometry& m) {
    if (!translation_length(m)) throw NotHyperbolic("axis_of: not a hyperbolic isometry");
    double tr = m.trace();
    double scale = std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
    // fixed points solve c z^2 + (d - a) z - b = 0
    double A = m.c, B = m.d - m.a, C = -m.b;
    if (std::fabs(A) <= 1e-13 * scale) {
        // near-diagonal matrix: one fixed point at infinity
        double p = -C / B;
        if (std::fabs(m.a) > std::fabs(m.d))
            return HGeodesic({p, false}, IdealPoint::infinity());
        return HGeodesic(IdealPoint::infinity(), {p, false});
    }
    double s = std::sqrt(tr * tr - 4.0);  // equals sqrt(B^2 - 4 A C)
    double q = -0.5 * (B + std::copysign(s, B));
    double p1 = q / A, p2 = C / q;
    // attracting fixed point has |T'| = 1/(c p + d)^2 < 1
    double d1 = std::fabs(m.c * p1 + m.d);
    if (d1 > 1.0) return HGeodesic({p2, false}, {p1, false});
    return HGeodesic({p1, false}, {p2, false});
}

Isometry translation_along(const HGeodesic& g, double t) {
    Isometry S = to_standard(g);
    Isometry T(std::exp(0.5 * t), 0.0, 0.0, std::exp(-0.5 * t));
    return S.inverse() * T * S;
}

Isometry map_segment(const HPoint& p1, const HPoint& q1, const HPoint& p2, const HPoint& q2) {
    auto align = [](const HPoint& p, const HPoint& q) {
        Isometry S = to_standard(geodesic_through(p, q));
        HPoint w = apply(S, p);
        double s = std::sqrt(w.y);
        return Isometry(1.0 / s, 0.0, 0.0, s) * S;
    };
    return align(p2, q2).inverse() * align(p1, q1);
}

Isometry rotation_about(const HPoint& p, double phi) {
    double s = std::sqrt(p.y);
    Isometry M(s, p.x / s, 0.0, 1.0 / s);  // i -> p
    Isometry R(std::cos(0.5 * phi), std::sin(0.5 * phi), -std::sin(0.5 * phi), std::cos(0.5 * phi));
    return M * R * M.inverse();
}

HPoint point_at(const HGeodesic& g, double t) {
    return apply(to_standard(g).inverse(), HPoint(0.0, std::exp(t)));
}

double param_of(const HGeodesic& g, const HPoint& p) {
    HPoint w = apply(to_standard(g), p);
    return std::log(std::hypot(w.x, w.y));
}

void to_klein(const HPoint& p, double& kx, double& ky) {
    double den = p.x * p.x + (p.y + 1.0) * (p.y + 1.0);
    double wx = (p.x * p.x + p.y * p.y - 1.0) / den;
    double wy = -2.0 * p.x / den;
    double n = 1.0 + wx * wx + wy * wy;
    kx = 2.0 * wx / n;
    ky = 2.0 * wy / n;
}

void ideal_to_klein(const IdealPoint& e, double& kx, double& ky) {
    if (e.at_inf) { kx = 1.0; ky = 0.0; return; }
    double v = e.v, den = v * v + 1.0;
    kx = (v * v - 1.0) / den;
    ky = -2.0 * v / den;
}

HPoint klein_to_hplane(double kx, double ky) {
    double n2 = kx * kx + ky * ky;
    if (n2 >= 1.0) throw Error("klein_to_hplane: point outside disk");
    double f = 1.0 + std::sqrt(1.0 - n2);
    double u = kx / f, v = ky / f;  // Poincare disk
    double den = (1.0 - u) * (1.0 - u) + v * v;
    return HPoint(-2.0 * v / den, (1.0 - u * u - v * v) / den);
}

void to_hyperboloid(const HPoint& p, double& X0, double& X1, double& X2) {
    double n = p.x * p.x + p.y * p.y;
    X0 = (n + 1.0) / (2.0 * p.y);
    X1 = (n - 1.0) / (2.0 * p.y);
    X2 = p.x / p.y;
}

HPoint hyperboloid_to_hplane(double X0, double X1, double X2) {
    double y = 1.0 / (X0 - X1);
    return HPoint(X2 * y, y);
}

}  // namespace geofill
