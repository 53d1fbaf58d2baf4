#include "geofill/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "geofill/verify.hpp"

namespace geofill {

namespace {

namespace fs = std::filesystem;

// --- SVG emission ---
// Figures are deterministic byte-for-byte: fixed sample counts, fixed %.4f
// coordinate formatting, element order follows input order.

struct SvgCanvas {
    bool disk = false;       // Poincare disk view; else half-plane window
    double x0 = 0, x1 = 1;   // half-plane window
    double y0 = 0, y1 = 1;
    std::ostringstream body;

    static constexpr double kSize = 1000.0;

    void window_from(const std::vector<HPoint>& pts, double margin) {
        x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
        for (const HPoint& p : pts) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
        double w = std::max(x1 - x0, y1 - y0);
        x0 -= margin * w, x1 += margin * w;
        y0 -= margin * w, y1 += margin * w;
        y0 = std::max(y0, 1e-6);
    }

    // half-plane -> Poincare disk, w = (z - i) / (z + i)
    static void to_disk(const HPoint& p, double& u, double& v) {
        double a = p.x, b = p.y;
        double den = a * a + (b + 1.0) * (b + 1.0);
        u = (a * a + b * b - 1.0) / den;
        v = -2.0 * a / den;
    }

    void map(const HPoint& p, double& X, double& Y) const {
        if (disk) {
            double u, v;
            to_disk(p, u, v);
            X = 0.5 * kSize + 0.46 * kSize * u;
            Y = 0.5 * kSize - 0.46 * kSize * v;
            return;
        }
        double s = kSize / std::max(x1 - x0, y1 - y0);
        X = (p.x - x0) * s;
        Y = kSize - (p.y - y0) * s;
    }

    void polyline(const std::vector<HPoint>& pts, const char* cls, const char* stroke,
                  double width) {
        body << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke
             << "\" stroke-width=\"" << width << "\" points=\"";
        char buf[64];
        for (size_t i = 0; i < pts.size(); ++i) {
            double X, Y;
            map(pts[i], X, Y);
            std::snprintf(buf, sizeof buf, "%s%.4f,%.4f", i ? " " : "", X, Y);
            body << buf;
        }
        body << "\"/>\n";
    }

    void dot(const HPoint& p, const char* cls, const char* fill, double r) {
        double X, Y;
        map(p, X, Y);
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "<circle class=\"%s\" cx=\"%.4f\" cy=\"%.4f\" r=\"%.2f\" fill=\"%s\"/>\n",
                      cls, X, Y, r, fill);
        body << buf;
    }

    void write(const fs::path& file) const {
        std::ofstream out(file, std::ios::binary);
        if (!out) throw Error("cannot write " + file.string());
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"1000\" "
               "height=\"1000\" viewBox=\"0 0 1000 1000\">\n"
            << "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
        if (disk)
            out << "<circle cx=\"500\" cy=\"500\" r=\"460\" fill=\"none\" stroke=\"#888\" "
                   "stroke-width=\"1\"/>\n";
        out << body.str() << "</svg>\n";
    }
};

std::vector<HPoint> sample_segment(const HPoint& a, const HPoint& b, int n) {
    HGeodesic g = geodesic_through(a, b);
    double ta = param_of(g, a), tb = param_of(g, b);
    std::vector<HPoint> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(point_at(g, ta + (tb - ta) * i / n));
    return pts;
}

// complete geodesic clipped to parameter window [-span, span] around its
// closest point to i; enough for disk figures (the rest is visually ideal)
std::vector<HPoint> sample_complete(const HGeodesic& g, double span, int n) {
    std::vector<HPoint> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(point_at(g, -span + 2.0 * span * i / n));
    return pts;
}

std::vector<HPoint> sample_circle(const HPoint& c, double R, int n) {
    HGeodesic up = geodesic_from_direction(c, 0.0, 1.0);
    HPoint top = point_at(up, param_of(up, c) + R);
    std::vector<HPoint> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(apply(rotation_about(c, 2.0 * M_PI * i / n), top));
    return pts;
}

void draw_polygon(SvgCanvas& svg, const ConvexPolygon& poly) {
    int n = poly.size();
    for (int i = 0; i < n; ++i)
        svg.polyline(sample_segment(poly.vertices()[i], poly.vertices()[(i + 1) % n], 48), "side",
                     "black", 1.5);
}

void draw_trace(SvgCanvas& svg, const TracedGeodesic& t, const char* cls, const char* stroke,
                double width) {
    for (const HSegment& a : t.arcs) svg.polyline(sample_segment(a.a, a.b, 32), cls, stroke, width);
}

// --- configuration plumbing ---

Surface load_surface(const RunConfig& cfg) {
    if (cfg.surface == "bolza") return Surface::bolza();
    std::ifstream in(cfg.surface, std::ios::binary);
    if (!in) throw BadSurfaceFile("cannot open surface file: " + cfg.surface);
    return Surface::load(in);
}

CurveWord resolve_word(const RunConfig& cfg, const Surface& s) {
    std::string key = cfg.gamma0.empty() ? "gamma0" : cfg.gamma0;
    auto it = s.named_words().find(key);
    if (it != s.named_words().end()) return it->second;
    if (cfg.gamma0.empty())
        throw Error("surface defines no named word \"gamma0\"; pass --gamma0");
    return CurveWord::parse(cfg.gamma0);
}

void check_epsilons(const RunConfig& cfg) {
    if (cfg.epsilons.empty()) throw OutOfRange("at least one --epsilon value required");
    for (double e : cfg.epsilons)
        if (!(e > 0.0 && e <= 0.5))
            throw OutOfRange("epsilon " + std::to_string(e) + " not in (0, 1/2]");
}

fs::path ensure_out(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    std::string t(buf);
    for (char& c : t)
        if (c == '.') c = 'p';
    return t;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
}

// Random input segments for shadow mode: endpoints rejection-sampled in the
// fundamental polygon, length in [0.2, seg_len].
std::vector<SurfaceSegment> random_segments(const Surface& s, int n, double max_len,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const ConvexPolygon& poly = s.polygon();
    double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
    for (const HPoint& v : poly.vertices()) {
        x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
    }
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> ulen(0.2, max_len);
    auto sample_point = [&] {
        for (;;) {
            HPoint p(ux(rng), uy(rng));
            if (poly.contains(p, 1e-9)) return p;
        }
    };
    std::vector<SurfaceSegment> out;
    while (static_cast<int>(out.size()) < n) {
        HPoint a = sample_point();
        double phi = uang(rng), len = ulen(rng);
        HGeodesic g = geodesic_from_direction(a, std::cos(phi), std::sin(phi));
        out.push_back({a, point_at(g, param_of(g, a) + len)});
    }
    return out;
}

int threads_from_env() {
    const char* v = std::getenv("GEOFILL_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw OutOfRange(std::string("bad GEOFILL_THREADS value: ") + v);
    return static_cast<int>(n);
}

int run_lemmas(const RunConfig& cfg, const fs::path& dir) {
    TrialConfig tc;
    tc.seed = cfg.seed;
    tc.trials = cfg.trials;
    tc.tolerance = cfg.tolerance;
    std::vector<TrialReport> reports = {oracle_lemma_angle(tc), oracle_lemma_tech(tc),
                                        oracle_lemma_poly(tc), oracle_lemma_quad(tc)};
    std::ostringstream all;
    bool ok = true;
    for (const TrialReport& r : reports) {
        all << r.str() << "\n";
        std::cout << r.name << " trials=" << r.trials << " failures=" << r.failures << " "
                  << (r.passed() ? "PASS" : "FAIL") << "\n";
        ok = ok && r.passed();
    }
    write_text(dir / "lemmas.txt", all.str());
    return ok ? 0 : 1;
}

}  // namespace

int cmd_construct(const RunConfig& cfg) {
    fs::path dir = ensure_out(cfg);
    if (cfg.mode == RunMode::lemmas) return run_lemmas(cfg, dir);
    if (cfg.mode == RunMode::plot) return cmd_plot(cfg);

    check_epsilons(cfg);
    Surface s = load_surface(cfg);
    ClosedGeodesic g0 = geodesic_of(resolve_word(cfg, s), s);
    ConstructionConstants k = compute_constants(s, g0);

    bool ok = true;
    char row[256];
    for (double eps : cfg.epsilons) {
        if (cfg.mode == RunMode::dense) {
            DenseResult r = build_dense_geodesic(s, k, eps);
            write_text(dir / ("report_dense_eps" + eps_tag(eps) + ".txt"),
                       r.report.str() + r.report.cert.str());
            std::snprintf(row, sizeof row,
                          "dense eps=%.6g segments=%d length=%.9g gap=%.6g fitted-C=%.6g %s\n", eps,
                          r.report.n_segments, r.report.length, r.report.max_gap, r.report.fitted_C,
                          r.report.passed() ? "PASS" : "FAIL");
            std::cout << row;
            ok = ok && r.report.passed();
        } else if (cfg.mode == RunMode::ut_dense) {
            double l = cfg.probe_len > 0.0 ? cfg.probe_len : 0.5 * injectivity_radius(s);
            UTResult r = build_ut_dense_geodesic(s, k, eps, l, cfg.trials,
                                                 static_cast<unsigned>(cfg.seed));
            write_text(dir / ("report_ut_eps" + eps_tag(eps) + ".txt"),
                       r.report.str() + r.report.cert.str());
            std::snprintf(row, sizeof row,
                          "ut-dense eps=%.6g l=%.6g length=%.9g probes=%d/%d worst=%.6g %s\n", eps,
                          l, r.report.length, r.report.within, r.report.trials, r.report.worst,
                          r.report.passed() ? "PASS" : "FAIL");
            std::cout << row;
            ok = ok && r.report.passed();
        } else {
            auto segs = random_segments(s, cfg.segments, cfg.seg_len, cfg.seed);
            auto [gamma, cert] = build_shadowing_geodesic(segs, s, k, eps);
            write_text(dir / ("report_shadow_eps" + eps_tag(eps) + ".txt"), cert.str());
            std::snprintf(row, sizeof row, "shadow eps=%.6g segments=%d length=%.9g bound=%.9g %s\n",
                          eps, cfg.segments, cert.length, cert.upper_bound,
                          cert.passed() ? "PASS" : "FAIL");
            std::cout << row;
            ok = ok && cert.passed();
        }
    }
    return ok ? 0 : 1;
}

int cmd_verify_lemmas(const RunConfig& cfg) { return run_lemmas(cfg, ensure_out(cfg)); }

int cmd_plot(const RunConfig& cfg) {
    fs::path dir = ensure_out(cfg);
    Surface s = load_surface(cfg);

    if (cfg.mode == RunMode::shadow) {
        // nesting diagram: the loop's junction flanks and the tightened axis,
        // carried to the first piece's frame, in the Poincare disk
        if (cfg.epsilons.empty())
            throw MissingArtifacts("nesting plot needs --epsilon for the construction run");
        check_epsilons(cfg);
        ClosedGeodesic g0 = geodesic_of(resolve_word(cfg, s), s);
        ConstructionConstants k = compute_constants(s, g0);
        auto segs = random_segments(s, cfg.segments, cfg.seg_len, cfg.seed);
        std::vector<ExtendedSegment> ext;
        for (const auto& c : segs) ext.push_back(extend_segment(c, k, s, cfg.epsilons[0]));
        ChainedLoop loop = chain(ext, k, s);
        ShadowGeodesic gamma = tighten(loop, s);
        std::vector<Isometry> V = alignment_steps(loop);

        SvgCanvas svg;
        svg.disk = true;
        Isometry T;  // frame of piece j -> frame of piece 0
        for (size_t j = 0; j < loop.pieces.size(); ++j) {
            const ChainedLoop::Piece& p = loop.pieces[j];
            Isometry local = T * p.start.to_piece;
            svg.polyline(sample_complete(apply_geodesic(local, p.start.flank), 7.0, 96), "flank",
                         "#2b6cb0", 1.2);
            svg.polyline(sample_segment(apply(T, p.start.point), apply(T, p.end.point), 32),
                         "piece", "#333333", 1.0);
            T = T * V[j];
        }
        svg.polyline(sample_complete(gamma.axis, 8.0, 128), "axis", "#c0392b", 2.0);
        svg.write(dir / "nesting.svg");
        return 0;
    }

    SvgCanvas svg;
    svg.disk = cfg.disk;
    svg.window_from(s.polygon().vertices(), 0.25);
    draw_polygon(svg, s.polygon());

    if (cfg.mode == RunMode::dense || cfg.mode == RunMode::ut_dense) {
        // full picture: gamma0, cover, chords, and the dense geodesic
        if (cfg.epsilons.empty()) throw MissingArtifacts("dense plot needs --epsilon");
        check_epsilons(cfg);
        double eps = cfg.epsilons[0];
        ClosedGeodesic g0 = geodesic_of(resolve_word(cfg, s), s);
        DenseResult r = build_dense_geodesic(s, g0, eps);
        draw_trace(svg, trace_geodesic(g0, s), "gamma0", "#2b6cb0", 1.2);
        for (const BallChords& bc : r.chords) {
            svg.polyline(sample_circle(bc.center.rep, bc.R, 96), "cover", "#27ae60", 0.8);
            svg.dot(bc.center.rep, "center", "#27ae60", 3.0);
            for (const HSegment& c : bc.chords)
                svg.polyline(sample_segment(c.a, c.b, 32), "chord", "#8e44ad", 0.8);
        }
        draw_trace(svg, r.traced, "arc", "#c0392b", 0.6);
        svg.write(dir / ("dense_eps" + eps_tag(eps) + ".svg"));
        return 0;
    }

    if (!cfg.gamma0.empty())
        draw_trace(svg, trace_geodesic(geodesic_of(resolve_word(cfg, s), s), s), "arc", "#c0392b",
                   1.2);
    svg.write(dir / "domain.svg");
    return 0;
}

int cmd_surface_info(const RunConfig& cfg) {
    Surface s = load_surface(cfg);
    double inj = injectivity_radius(s);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "genus=%d sides=%d area=%.9g circumradius=%.9g diameter=%.9g\n", s.genus(),
                  s.sides(), s.area(), s.circumradius(), s.diameter());
    std::cout << buf;
    std::snprintf(buf, sizeof buf, "systole=%.9g injectivity-radius=%.9g\n", 2.0 * inj, inj);
    std::cout << buf;
    for (const auto& [name, w] : s.named_words()) {
        ClosedGeodesic g = geodesic_of(w, s);
        std::snprintf(buf, sizeof buf, "word %s = \"%s\" length=%.9g\n", name.c_str(),
                      w.str().c_str(), g.length);
        std::cout << buf;
    }
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"epsilon-dense closed geodesics on hyperbolic surfaces"};
    app.require_subcommand(1);

    std::string mode = "dense";
    std::string eps_list;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--surface", cfg.surface, "builtin name (bolza) or surface file");
        c->add_option("--gamma0", cfg.gamma0, "filling word or named-word key");
        c->add_option("--epsilon", eps_list, "comma-separated epsilon values in (0, 1/2]");
        c->add_option("--mode", mode, "shadow | dense | ut-dense | lemmas | plot");
        c->add_option("--seed", cfg.seed, "random seed");
        c->add_option("--trials", cfg.trials, "probe / lemma trial count");
        c->add_option("--segments", cfg.segments, "random input segments (shadow mode)");
        c->add_option("--seg-len", cfg.seg_len, "max random segment length");
        c->add_option("--probe-len", cfg.probe_len, "ut-dense probe length (0 = injrad/2)");
        c->add_option("--out", cfg.out, "output directory");
        c->add_option("--tolerance", cfg.tolerance, "oracle tolerance override");
        c->add_flag("--disk", cfg.disk, "render figures in the Poincare disk");
    };
    CLI::App* construct = app.add_subcommand("construct", "build and certify a dense geodesic");
    CLI::App* lemmas = app.add_subcommand("verify-lemmas", "run the plane-lemma oracles");
    CLI::App* plot = app.add_subcommand("plot", "emit SVG figures");
    CLI::App* info = app.add_subcommand("surface-info", "print surface invariants");
    add_common(construct);
    add_common(lemmas);
    add_common(plot);
    add_common(info);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        cfg.threads = threads_from_env();
        if (mode == "shadow") cfg.mode = RunMode::shadow;
        else if (mode == "dense") cfg.mode = RunMode::dense;
        else if (mode == "ut-dense") cfg.mode = RunMode::ut_dense;
        else if (mode == "lemmas") cfg.mode = RunMode::lemmas;
        else if (mode == "plot") cfg.mode = RunMode::plot;
        else throw OutOfRange("unknown mode: " + mode);
        if (!eps_list.empty()) {
            std::istringstream in(eps_list);
            std::string tok;
            while (std::getline(in, tok, ',')) cfg.epsilons.push_back(std::stod(tok));
        }

        if (construct->parsed()) return cmd_construct(cfg);
        if (lemmas->parsed()) return cmd_verify_lemmas(cfg);
        if (plot->parsed()) return cmd_plot(cfg);
        return cmd_surface_info(cfg);
    } catch (const BadSurfaceFile& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotFilling& e) {
        std::cerr << "error: NotFilling: " << e.what() << "\n";
        return 2;
    } catch (const OutOfRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifacts& e) {
        std::cerr << "error: MissingArtifacts: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad numeric argument: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "certification error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace geofill
