#pragma once

// Command-line front end: configuration parsing, report files, and SVG
// figures. Exposed as a library entry point so integration tests can drive
// the exact code path of the installed binary.

#include <cstdint>
#include <string>
#include <vector>

#include "geofill/density.hpp"

namespace geofill {

struct MissingArtifacts : Error { using Error::Error; };

enum class RunMode { shadow, dense, ut_dense, lemmas, plot };

struct RunConfig {
    std::string surface = "bolza";  // builtin name or surface file path
    std::string gamma0;             // word or named-word key; empty = "gamma0"
    std::vector<double> epsilons;   // each in (0, 1/2]
    RunMode mode = RunMode::dense;
    std::uint64_t seed = 7;
    int trials = 1000;      // ut-dense probes / lemma trials
    int segments = 1;       // random input segments in shadow mode
    double seg_len = 2.0;   // max random segment length
    double probe_len = 0.0; // ut-dense probe length, 0 = injectivity radius / 2
    std::string out = ".";  // output directory for reports and figures
    double tolerance = 1e-9;
    bool disk = false;      // render figures in the Poincare disk
    int threads = 1;        // parallelism cap (GEOFILL_THREADS)
};

// exit status: 0 all checks certified, 1 certification failure, 2 bad input
int cmd_construct(const RunConfig& cfg);
int cmd_verify_lemmas(const RunConfig& cfg);
int cmd_plot(const RunConfig& cfg);
int cmd_surface_info(const RunConfig& cfg);

// Full argv-level entry point (subcommands construct, verify-lemmas, plot,
// surface-info); returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace geofill
