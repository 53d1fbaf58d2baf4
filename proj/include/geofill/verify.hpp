#pragma once

// Brute-force oracles for the plane lemmas. Each oracle rebuilds random
// configurations directly from angle/length parameters via explicit
// geometry and measures the claimed conclusion, independently of the
// closed-form expressions under test.

#include <cstdint>
#include <string>
#include <vector>

#include "geofill/trig.hpp"

namespace geofill {

struct TrialConfig {
    std::uint64_t seed = 7;
    int trials = 10000;
    double tolerance = 1e-9;
};

struct TrialStat {
    std::string name;
    double value = 0.0;
};

struct TrialReport {
    std::string name;
    int trials = 0;
    int failures = 0;
    std::vector<TrialStat> stats;

    bool passed() const { return failures == 0; }
    double stat(const std::string& key) const;
    std::string str() const;
};

// Interleaving test on ideal endpoints: true iff the complete geodesics
// cross transversally.
bool geodesics_cross(const HGeodesic& g1, const HGeodesic& g2);

// Segments of length >= m(theta0) meeting two geodesics at angles >= theta0
// keep them disjoint; locates the sharpness frontier by bisection at angles
// exactly theta0 and compares it against disjointness_threshold.
TrialReport oracle_lemma_angle(const TrialConfig& cfg);

// Random hypothesis-satisfying flank configurations plus random geodesics
// crossing both flanks: the central segment always stays within epsilon.
TrialReport oracle_lemma_tech(const TrialConfig& cfg);

// Random chords of test polygons never beat the ear minimum angle, and
// chords along ear inner sides approach it.
TrialReport oracle_lemma_poly(const TrialConfig& cfg);

// The three quadrilateral identities of the shadowing lemma re-derived by
// explicit construction and measurement, plus the h' > h/2 inequality.
TrialReport oracle_quadrilateral(const TrialConfig& cfg);

}  // namespace geofill
