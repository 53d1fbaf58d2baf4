#pragma once

// Closed hyperbolic surface given as a fundamental polygon with side-pairing
// isometries. Provides geodesic representatives of words, tracing through the
// fundamental domain, group-element enumeration, surface distance, the
// injectivity radius, and extraction of the complementary polygons of a
// filling geodesic.

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geofill/trig.hpp"

namespace geofill {

struct TrivialOrNonHyperbolicWord : Error { using Error::Error; };
struct TracingDidNotClose : Error { using Error::Error; };
struct RadiusCapExceeded : Error { using Error::Error; };
struct CutoffInsufficient : Error { using Error::Error; };
struct NotFilling : Error { using Error::Error; };
struct ArrangementDegeneracy : Error { using Error::Error; };
struct BadSurfaceFile : Error { using Error::Error; };

// Free-homotopy class as a cyclic word: letter +k is generator k-1,
// letter -k its inverse (k >= 1).
struct CurveWord {
    std::vector<int> letters;

    CurveWord() = default;
    explicit CurveWord(std::vector<int> l) : letters(std::move(l)) {}

    CurveWord cyclically_reduced() const;
    bool is_cyclically_reduced() const;
    CurveWord inverse() const;
    std::string str() const;                 // e.g. "1 -2 1"
    static CurveWord parse(const std::string& s);
};

struct ClosedGeodesic {
    CurveWord word;
    Isometry holonomy;
    HGeodesic axis;
    double length = 0.0;
};

// Point on the surface, represented by its canonical lift in the fundamental
// polygon (boundary ownership: lowest side index wins).
struct SurfacePoint {
    HPoint rep{0, 1};
};

struct GroupElement {
    Isometry iso;
    std::vector<int> word;  // in generator letters
};

struct TracedGeodesic {
    std::vector<HSegment> arcs;          // clipped to the fundamental polygon
    std::vector<HGeodesic> arc_lifts;    // complete geodesic containing arc i
    std::vector<int> exit_sides;         // side through which arc i leaves
    // homotopy word read off from the crossed sides; holonomy_of(word) is
    // conjugate to the holonomy of the traced geodesic (extra letters can
    // appear at exact vertex crossings)
    CurveWord word;
    double total_length = 0.0;
};

class Surface {
  public:
    // gluings[s] maps side s onto side partner[s] reversing the boundary
    // orientation; must satisfy gluings[partner[s]] = gluings[s]^-1.
    Surface(int genus, ConvexPolygon polygon, std::vector<int> partner,
            std::vector<Isometry> gluings, std::map<std::string, CurveWord> named_words);

    // Builds the gluing maps from the vertex correspondence: side s is carried
    // onto side partner[s] with the boundary orientation reversed.
    static Surface from_polygon(int genus, ConvexPolygon polygon, std::vector<int> partner,
                                std::map<std::string, CurveWord> named_words);

    // Genus-2 reference surface: regular octagon, all angles pi/4, opposite
    // sides identified (side word a b c d a^-1 b^-1 c^-1 d^-1), the surface
    // whose systole is 2 arccosh(1 + sqrt 2). Ships a validated filling word
    // "gamma0".
    static Surface bolza();

    static Surface load(std::istream& in);
    void save(std::ostream& out) const;

    int genus() const { return genus_; }
    const ConvexPolygon& polygon() const { return poly_; }
    int sides() const { return poly_.size(); }
    int partner(int side) const { return partner_[side]; }
    const Isometry& gluing(int side) const { return gluings_[side]; }
    const std::vector<Isometry>& generators() const { return generators_; }
    int generator_count() const { return static_cast<int>(generators_.size()); }
    // side whose gluing map is generator k (letter k+1)
    int generator_side(int k) const { return gen_side_[k]; }
    // letter l with letter_iso(l) == gluing(side)
    int side_letter(int side) const { return side_letter_[side]; }
    const CurveWord& relator() const { return relator_; }
    const std::map<std::string, CurveWord>& named_words() const { return words_; }

    double area() const { return 4.0 * M_PI * (genus_ - 1); }
    double circumradius() const { return circumradius_; }
    double diameter() const { return diameter_; }
    double lift_radius_cap() const { return lift_cap_; }
    void set_lift_radius_cap(double r) { lift_cap_ = r; }

    Isometry holonomy_of(const CurveWord& w) const;
    Isometry letter_iso(int letter) const;

    // Canonical representative in the fundamental polygon; the returned
    // isometry g satisfies g * p = rep.
    std::pair<SurfacePoint, Isometry> canonicalize(const HPoint& p) const;

    // All group elements g with dist(center, g * x0) <= radius + diameter,
    // x0 the polygon centroid; sufficient for the translates of the polygon
    // to cover the radius-ball around center.
    std::vector<GroupElement> lifts_within(const HPoint& center, double radius) const;

    // Raw breadth-first enumeration: every element with
    // dist(center, g * x0) <= accept_radius (no extra margin added).
    std::vector<GroupElement> enumerate_elements(const HPoint& center, double accept_radius) const;

  private:
    void validate() const;
    void build_relator();

    int genus_;
    ConvexPolygon poly_;
    std::vector<int> partner_;
    std::vector<Isometry> gluings_;
    std::vector<Isometry> generators_;
    std::vector<int> gen_side_;
    std::vector<int> side_letter_;
    CurveWord relator_;
    std::map<std::string, CurveWord> words_;
    double circumradius_ = 0.0;
    double diameter_ = 0.0;
    double lift_cap_ = 12.0;
};

ClosedGeodesic geodesic_of(const CurveWord& w, const Surface& s);

// One period of g clipped to the fundamental polygon; concatenation under the
// side pairings is continuous and closes up.
TracedGeodesic trace_geodesic(const ClosedGeodesic& g, const Surface& s);

// Same, but from an axis lift and period length directly; usable when the
// holonomy matrix would overflow plain doubles.
TracedGeodesic trace_geodesic(const HGeodesic& axis, double length, const Surface& s);

// Open trace: the geodesic ray from p with direction (tx, ty), followed for
// exactly the given length and clipped to polygon arcs; does not close up.
TracedGeodesic trace_ray(const HPoint& p, double tx, double ty, double length,
                         const Surface& s);

// Transverse crossing of a traced ray with a traced closed geodesic. The
// crossing lift is reported in the fundamental-polygon frame where it happens
// ("local frame") together with the isometry back to the ray's start frame;
// transporting the data eagerly would collapse it numerically for long rays.
struct RayCrossing {
    double s = 0.0;         // arclength along the ray from its start point
    double s_target = 0.0;  // arclength along the target, from its trace origin
    double angle = 0.0;     // minimal crossing angle, in (0, pi/2]
    int side = 0;           // side of the oriented target just before the crossing
    HPoint point{0, 1};     // crossing lift, local frame
    HGeodesic flank;        // target lift through it, local frame, oriented
    Isometry frame;         // maps the local frame to the ray's start frame
};

// Crossings of the surface ray from p with direction (tx, ty), up to the given
// length, with the traced closed geodesic `target`; sorted by s.
std::vector<RayCrossing> trace_ray_crossings(const HPoint& p, double tx, double ty,
                                             double length, const TracedGeodesic& target,
                                             const Surface& s);

double surface_distance(const SurfacePoint& p, const SurfacePoint& q, const Surface& s);

// Half the systole.
double injectivity_radius(const Surface& s);

// Interval of arclength parameters of g inside the polygon, if any.
std::optional<std::pair<double, double>> clip_to_polygon(const HGeodesic& g,
                                                         const ConvexPolygon& poly);

// The complementary polygons of a filling geodesic, each returned as a lift
// in H. Throws NotFilling when some complementary face is not a disk.
std::vector<ConvexPolygon> complementary_polygons(const ClosedGeodesic& g0, const Surface& s);

// Distinct complete-geodesic lifts of g0 meeting the ball of the given radius
// around the polygon centroid.
std::vector<HGeodesic> lifts_of_geodesic(const ClosedGeodesic& g0, const Surface& s,
                                         double radius);

}  // namespace geofill
