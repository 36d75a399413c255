#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cra/digest.hpp"
#include "cra/format.hpp"
#include "cra/geofence.hpp"
#include "cra/metrics.hpp"
#include "cra/model.hpp"
#include "cra/optimize.hpp"
#include "cra/simulate.hpp"
#include "cra/stationary.hpp"
#include "cra/validate.hpp"
#include "cra/version.hpp"

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "json";
};

struct RunContext {
    GlobalOpts g;
    std::vector<std::string> argv;  // as received, recorded verbatim in the manifest
};

// Output files are assembled in memory and flushed together, so a run that
// fails validation or computation never leaves partial files behind.
struct OutFile {
    std::string name;
    std::string bytes;
};

int run_cli(const std::vector<std::string>& args);

std::string manifest_json(const RunContext& ctx, const std::string& sub,
                          const std::vector<std::pair<std::string, std::uint64_t>>& outs) {
    cra::JsonWriter w;
    w.begin_object();
    w.key("tool").value("cra");
    w.key("version").value(cra::kVersion);
    w.key("subcommand").value(sub);
    w.key("seed").value(std::to_string(ctx.g.seed));
    w.key("out_dir").value(ctx.g.out_dir);
    w.key("format").value(ctx.g.format);
    w.key("argv").begin_array();
    for (const std::string& a : ctx.argv) w.value(a);
    w.end_array();
    w.key("outputs").begin_array();
    for (const auto& [name, digest] : outs) {
        w.begin_object();
        w.key("file").value(name);
        w.key("fnv1a64").value(cra::digest_hex(digest));
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.close();
    if (!os) throw std::runtime_error("write failed: " + p.string());
}

std::vector<std::pair<std::string, std::uint64_t>> emit(const RunContext& ctx,
                                                        const std::string& sub,
                                                        const std::vector<OutFile>& files) {
    namespace fs = std::filesystem;
    fs::create_directories(ctx.g.out_dir);
    std::vector<std::pair<std::string, std::uint64_t>> outs;
    for (const OutFile& f : files) {
        write_file(fs::path(ctx.g.out_dir) / f.name, f.bytes);
        outs.emplace_back(f.name, cra::fnv1a64(std::string_view(f.bytes)));
    }
    write_file(fs::path(ctx.g.out_dir) / (sub + "_manifest.json"), manifest_json(ctx, sub, outs));
    return outs;
}

void print_written(const RunContext& ctx,
                   const std::vector<std::pair<std::string, std::uint64_t>>& outs) {
    for (const auto& [name, digest] : outs)
        std::cout << "wrote " << (std::filesystem::path(ctx.g.out_dir) / name).string()
                  << " fnv1a64=" << cra::digest_hex(digest) << "\n";
}

struct AnalyzeOpts {
    double p = 0, q = 0, ps = 0, pse = 0, palpha = 0;
    std::vector<double> omegas{0.0, 0.5, 1.0};
};

int cmd_analyze(const RunContext& ctx, const AnalyzeOpts& o) {
    cra::SourceModel src(o.p, o.q);
    cra::ChannelPair ch(o.ps, o.pse);
    cra::Policy pol(o.palpha);
    cra::MetricReport rep = cra::metric_report(src, ch, pol, o.omegas);

    std::cout << "correlation_class = " << cra::to_string(cra::correlation_class(src)) << "\n"
              << "cra = " << cra::fmt17(rep.cra) << "\n"
              << "accuracy = " << cra::fmt17(rep.accuracy) << "\n"
              << "confidentiality = " << cra::fmt17(rep.confidentiality) << "\n"
              << "non_confidential_accuracy = " << cra::fmt17(rep.non_confidential_accuracy)
              << "\n";
    for (const auto& [om, v] : rep.weighted)
        std::cout << "a_omega(" << cra::fmt17(om) << ") = " << cra::fmt17(v) << "\n";

    OutFile f;
    if (ctx.g.format == "json") {
        cra::JsonWriter w;
        w.begin_object();
        w.key("p").value(o.p);
        w.key("q").value(o.q);
        w.key("ps").value(o.ps);
        w.key("pse").value(o.pse);
        w.key("p_alpha").value(o.palpha);
        w.key("correlation_class").value(cra::to_string(cra::correlation_class(src)));
        w.key("cra").value(rep.cra);
        w.key("accuracy").value(rep.accuracy);
        w.key("confidentiality").value(rep.confidentiality);
        w.key("non_confidential_accuracy").value(rep.non_confidential_accuracy);
        w.key("weighted").begin_array();
        for (const auto& [om, v] : rep.weighted) {
            w.begin_object();
            w.key("omega").value(om);
            w.key("value").value(v);
            w.end_object();
        }
        w.end_array();
        w.key("pi").begin_array();
        for (double v : rep.pi) w.value(v);
        w.end_array();
        w.end_object();
        f = {"analyze.json", w.str()};
    } else {
        std::string csv = "metric,omega,value\n";
        csv += "cra,," + cra::fmt17(rep.cra) + "\n";
        csv += "accuracy,," + cra::fmt17(rep.accuracy) + "\n";
        csv += "confidentiality,," + cra::fmt17(rep.confidentiality) + "\n";
        csv += "non_confidential_accuracy,," + cra::fmt17(rep.non_confidential_accuracy) + "\n";
        for (const auto& [om, v] : rep.weighted)
            csv += "a_omega," + cra::fmt17(om) + "," + cra::fmt17(v) + "\n";
        for (int s = 0; s < 8; ++s) {
            cra::JointState st = cra::JointState::from_index(s);
            csv += "pi_" + std::to_string(st.x) + std::to_string(st.a) + std::to_string(st.b) +
                   ",," + cra::fmt17(rep.pi[s]) + "\n";
        }
        f = {"analyze.csv", csv};
    }
    print_written(ctx, emit(ctx, "analyze", {f}));
    return 0;
}

struct SweepOpts {
    double p = 0, q = 0, ps = 0, pse = 0;
    double start = 0.05, stop = 1.0, step = 0.05;
    bool numeric = false, sim = false;
    long long sim_horizon = 50'000;
    int sim_runs = 400;
    long long warmup = 1'000;
    double omega = 0.5;
};

int cmd_sweep(const RunContext& ctx, const SweepOpts& o) {
    cra::SourceModel src(o.p, o.q);
    cra::ChannelPair ch(o.ps, o.pse);
    if (!(o.start > 0.0) || !(o.step > 0.0) || o.start > o.stop || o.stop > 1.0)
        throw std::domain_error("grid must satisfy 0 < start <= stop <= 1 with step > 0");
    if (o.omega < 0.0 || o.omega > 1.0) throw std::domain_error("omega must lie in [0, 1]");
    if (o.sim) {
        if (o.sim_horizon < 2 || o.sim_runs < 1)
            throw std::domain_error("simulation needs horizon >= 2 and runs >= 1");
        if (o.warmup < 0 || o.warmup >= o.sim_horizon)
            throw std::domain_error("warmup must lie in [0, horizon)");
    }

    std::vector<double> grid;
    for (long long k = 0;; ++k) {
        double x = o.start + static_cast<double>(k) * o.step;
        if (x > o.stop + 1e-12) break;
        grid.push_back(std::min(x, o.stop));
    }

    std::vector<cra::SimEstimate> sims;
    if (o.sim) {
        cra::SimConfig cfg;
        cfg.horizon = o.sim_horizon;
        cfg.runs = o.sim_runs;
        cfg.warmup = o.warmup;
        cfg.seed = ctx.g.seed;
        for (const auto& [x, est] : cra::sweep_sim(src, ch, grid, cfg)) {
            (void)x;
            sims.push_back(est);
        }
    }

    std::string csv = "p_alpha,cra_closed,cra_numeric,cra_sim_mean,cra_sim_stderr,a0,a1,a_omega\n";
    double best_x = grid.front();
    double best_v = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid[i];
        cra::Policy pol(x);
        double closed = cra::avg_cra_closed(src, ch, pol);
        if (closed > best_v) {
            best_v = closed;
            best_x = x;
        }
        std::string numeric, sim_mean, sim_se;
        if (o.numeric) {
            cra::JointStationary pi =
                cra::stationary_numeric(cra::build_kernel(src, cra::lambda_set(pol, ch)));
            numeric = cra::fmt17(cra::avg_cra_from_pi(pi));
        }
        if (o.sim) {
            sim_mean = cra::fmt17(sims[i].mean_cra);
            sim_se = cra::fmt17(sims[i].se_cra);
        }
        csv += cra::fmt17(x) + "," + cra::fmt17(closed) + "," + numeric + "," + sim_mean + "," +
               sim_se + "," + cra::fmt17(cra::marginal_accuracy(src, ch, pol)) + "," +
               cra::fmt17(cra::marginal_confidentiality(src, ch, pol)) + "," +
               cra::fmt17(cra::weighted_metric(src, ch, pol, o.omega)) + "\n";
    }

    std::cout << "rows = " << grid.size() << "\n"
              << "grid_argmax_p_alpha = " << cra::fmt17(best_x) << "\n"
              << "grid_max_cra = " << cra::fmt17(best_v) << "\n";
    print_written(ctx, emit(ctx, "sweep", {{"sweep.csv", csv}}));
    return 0;
}

struct OptimizeOpts {
    double p = 0, q = 0, ps = 0, pse = 0;
    double pmin = 1e-3, pmax = 1.0;
};

int cmd_optimize(const RunContext& ctx, const OptimizeOpts& o) {
    cra::SourceModel src(o.p, o.q);
    cra::ChannelPair ch(o.ps, o.pse);
    cra::OptimizerResult res = cra::optimize(src, ch, cra::Interval{o.pmin, o.pmax});

    std::cout << "p_alpha_star = " << cra::fmt17(res.p_alpha_star) << "\n"
              << "value = " << cra::fmt17(res.value) << "\n"
              << "delta = " << cra::fmt17(res.delta) << "\n"
              << "branch = " << cra::to_string(res.branch) << "\n";

    OutFile f;
    if (ctx.g.format == "json") {
        cra::JsonWriter w;
        w.begin_object();
        w.key("p").value(o.p);
        w.key("q").value(o.q);
        w.key("ps").value(o.ps);
        w.key("pse").value(o.pse);
        w.key("pmin").value(o.pmin);
        w.key("pmax").value(o.pmax);
        w.key("p_alpha_star").value(res.p_alpha_star);
        w.key("value").value(res.value);
        w.key("delta").value(res.delta);
        w.key("branch").value(cra::to_string(res.branch));
        w.end_object();
        f = {"optimize.json", w.str()};
    } else {
        f = {"optimize.csv", std::string("p_alpha_star,value,delta,branch\n") +
                                 cra::fmt17(res.p_alpha_star) + "," + cra::fmt17(res.value) + "," +
                                 cra::fmt17(res.delta) + "," + cra::to_string(res.branch) + "\n"};
    }
    print_written(ctx, emit(ctx, "optimize", {f}));
    return 0;
}

struct ValidateCliOpts {
    int tuples = 200;
    bool no_sim = false;
    long long sim_horizon = 5'000;
    int sim_runs = 50;
    int sim_tuples = 8;
    double sigma = 5.0;
    bool inject = false;
    long long series_n = 2'000;
};

int cmd_validate(const RunContext& ctx, const ValidateCliOpts& o) {
    if (o.tuples < 1) throw std::domain_error("tuples must be >= 1");
    if (o.series_n < 0) throw std::domain_error("series-n must be >= 0");
    if (!o.no_sim) {
        if (o.sim_horizon < 2 || o.sim_runs < 2 || o.sim_tuples < 1)
            throw std::domain_error("simulation check needs horizon >= 2, runs >= 2, tuples >= 1");
        if (!(o.sigma > 0.0)) throw std::domain_error("sigma must be positive");
    }

    cra::ValidateOptions vo;
    vo.tuples = o.tuples;
    vo.seed = ctx.g.seed;
    vo.series_n = o.series_n;
    vo.sim = !o.no_sim;
    vo.sim_horizon = o.sim_horizon;
    vo.sim_runs = o.sim_runs;
    vo.sim_tuples = o.sim_tuples;
    vo.sim_sigma = o.sigma;
    vo.inject_fault = o.inject;
    cra::ValidationReport rep = cra::run_validation(vo);

    for (const cra::CheckResult& c : rep.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " margin=" << cra::fmt17(c.margin)
                  << " tolerance=" << cra::fmt17(c.tolerance) << "\n";
    std::cout << "validation = " << (rep.pass ? "PASS" : "FAIL") << "\n";

    OutFile f;
    if (ctx.g.format == "json") {
        cra::JsonWriter w;
        w.begin_object();
        w.key("pass").value(rep.pass);
        w.key("seed").value(std::to_string(ctx.g.seed));
        w.key("tuples").value(o.tuples);
        w.key("series_n").value(static_cast<long long>(o.series_n));
        w.key("sim").value(!o.no_sim);
        w.key("sim_horizon").value(static_cast<long long>(o.sim_horizon));
        w.key("sim_runs").value(o.sim_runs);
        w.key("sim_tuples").value(o.sim_tuples);
        w.key("sim_sigma").value(o.sigma);
        w.key("inject_fault").value(o.inject);
        w.key("checks").begin_array();
        for (const cra::CheckResult& c : rep.checks) {
            w.begin_object();
            w.key("name").value(c.name);
            w.key("pass").value(c.pass);
            w.key("margin").value(c.margin);
            w.key("tolerance").value(c.tolerance);
            w.key("detail").value(c.detail);
            w.end_object();
        }
        w.end_array();
        w.end_object();
        f = {"validate_report.json", w.str()};
    } else {
        std::string csv = "check,pass,margin,tolerance\n";
        for (const cra::CheckResult& c : rep.checks)
            csv += c.name + "," + (c.pass ? "pass" : "fail") + "," + cra::fmt17(c.margin) + "," +
                   cra::fmt17(c.tolerance) + "\n";
        f = {"validate_report.csv", csv};
    }
    print_written(ctx, emit(ctx, "validate", {f}));
    return rep.pass ? 0 : 1;
}

struct GeofenceOpts {
    std::string scene_path;
    std::string emit_name;
    bool demo = false;
    int demo_grid = 120;
    double p = 0.3, q = 0.3;
    double tau = 0.3;
    double pmin = 1e-3, pmax = 1.0;
};

int cmd_geofence(const RunContext& ctx, const GeofenceOpts& o) {
    int modes = int(!o.scene_path.empty()) + int(o.demo) + int(!o.emit_name.empty());
    if (modes != 1)
        throw std::domain_error(
            "geofence needs exactly one of --scene FILE, --demo, --emit-demo-scene NAME");
    if (o.demo_grid < 2) throw std::domain_error("demo grid must be at least 2 cells per side");

    if (!o.emit_name.empty()) {
        if (o.emit_name.find('/') != std::string::npos ||
            o.emit_name.find('\\') != std::string::npos)
            throw std::domain_error(
                "--emit-demo-scene takes a bare file name; it is written into --out-dir");
        cra::Scene scene = cra::demo_scene(o.demo_grid, o.demo_grid);
        std::cout << "scene_digest = " << cra::digest_hex(cra::scene_digest(scene)) << "\n";
        print_written(ctx, emit(ctx, "geofence", {{o.emit_name, cra::serialize_scene(scene)}}));
        return 0;
    }

    if (!(o.tau > 0.0 && o.tau < 1.0)) throw std::domain_error("tau must lie strictly inside (0, 1)");
    cra::SourceModel src(o.p, o.q);

    cra::Scene scene;
    if (o.demo) {
        scene = cra::demo_scene(o.demo_grid, o.demo_grid);
    } else {
        std::ifstream is(o.scene_path, std::ios::binary);
        if (!is) {
            std::cerr << "error: cannot read scene file: " << o.scene_path << "\n";
            return 2;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        try {
            scene = cra::parse_scene(ss.str());
        } catch (const std::exception& e) {
            std::cerr << "error: malformed scene: " << e.what() << "\n";
            return 2;
        }
    }

    cra::GeofenceMaps maps = cra::build_maps(scene, src, cra::Interval{o.pmin, o.pmax});
    cra::GeofenceContour contour = cra::extract_contour(maps.cra, o.tau);

    double bob_ps = scene.bob_ps_override ? *scene.bob_ps_override
                                          : cra::success_probability(scene, scene.bob);
    std::cout << "scene_digest = " << cra::digest_hex(cra::scene_digest(scene)) << "\n"
              << "bob_ps = " << cra::fmt17(bob_ps) << "\n"
              << "holes = " << maps.holes << "\n"
              << "polylines = " << contour.polylines.size() << "\n";

    auto csv_of = [](const cra::SpatialMap& m) {
        std::ostringstream os;
        cra::write_map_csv(os, m);
        return os.str();
    };
    auto bin_of = [](const cra::SpatialMap& m) {
        std::ostringstream os;
        cra::write_map_binary(os, m);
        return os.str();
    };

    std::vector<OutFile> files;
    files.push_back({"eve_success_map.csv", csv_of(maps.eve_success)});
    files.push_back({"eve_success_map.bin", bin_of(maps.eve_success)});
    files.push_back({"cra_map.csv", csv_of(maps.cra)});
    files.push_back({"cra_map.bin", bin_of(maps.cra)});
    files.push_back({"p_alpha_map.csv", csv_of(maps.p_alpha)});
    files.push_back({"p_alpha_map.bin", bin_of(maps.p_alpha)});
    files.push_back({"contour.geojson", cra::contour_geojson(contour)});
    files.push_back({"geofence_scene.json", cra::serialize_scene(scene)});
    print_written(ctx, emit(ctx, "geofence", files));

    if (maps.holes > 0) {
        std::cerr << "error: optimization failed at " << maps.holes << " map cells\n";
        return 1;
    }
    return 0;
}

int cmd_rerun(const RunContext& ctx, const std::string& manifest_path) {
    std::ifstream is(manifest_path, std::ios::binary);
    if (!is) {
        std::cerr << "error: cannot read manifest: " << manifest_path << "\n";
        return 2;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    nlohmann::json j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        std::cerr << "error: malformed manifest json\n";
        return 2;
    }
    if (j.value("tool", std::string()) != "cra") {
        std::cerr << "error: manifest was not produced by this tool\n";
        return 2;
    }
    std::string sub = j.value("subcommand", std::string());
    if (sub.empty() || sub == "rerun") {
        std::cerr << "error: manifest subcommand '" << sub << "' cannot be replayed\n";
        return 2;
    }
    if (!j.contains("argv") || !j["argv"].is_array() || !j.contains("outputs") ||
        !j["outputs"].is_array()) {
        std::cerr << "error: manifest lacks argv/outputs arrays\n";
        return 2;
    }

    std::vector<std::string> args;
    for (const auto& el : j["argv"]) {
        if (!el.is_string()) {
            std::cerr << "error: manifest argv holds a non-string entry\n";
            return 2;
        }
        args.push_back(el.get<std::string>());
    }
    for (const std::string& a : args) {
        if (a == "rerun") {
            std::cerr << "error: recorded argv re-enters rerun\n";
            return 2;
        }
    }

    // replay verbatim except the output directory, which is redirected into a
    // scratch area so the comparison never races the original files
    std::vector<std::string> replay;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out-dir") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out-dir=", 0) == 0) continue;
        replay.push_back(args[i]);
    }
    namespace fs = std::filesystem;
    fs::path scratch = fs::path(ctx.g.out_dir) / "rerun_scratch";
    fs::create_directories(scratch);
    replay.push_back("--out-dir");
    replay.push_back(scratch.string());

    std::cout << "replaying " << sub << "\n";
    int code = run_cli(replay);
    if (code != 0) {
        std::cerr << "error: replay exited with code " << code << "\n";
        return 1;
    }

    bool all = true;
    long long n = 0;
    for (const auto& el : j["outputs"]) {
        if (!el.is_object() || !el.contains("file") || !el["file"].is_string() ||
            !el.contains("fnv1a64") || !el["fnv1a64"].is_string()) {
            std::cerr << "error: malformed outputs entry in manifest\n";
            return 2;
        }
        std::string name = el["file"].get<std::string>();
        std::string want = el["fnv1a64"].get<std::string>();
        std::string have;
        try {
            have = cra::digest_hex(cra::fnv1a64_file((scratch / name).string()));
        } catch (const std::exception&) {
            have = "unreadable";
        }
        bool ok = (have == want);
        all = all && ok;
        ++n;
        std::cout << (ok ? "match " : "MISMATCH ") << name << " recorded=" << want
                  << " replay=" << have << "\n";
    }
    std::cout << "rerun = " << (all ? "PASS" : "FAIL") << " (" << n << " files)\n";
    print_written(ctx, emit(ctx, "rerun", {}));
    return all ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args) {
    // depth guard: rerun replays one recorded command but never another rerun
    static int depth = 0;
    if (depth >= 2) {
        std::cerr << "error: nested replay is not supported\n";
        return 2;
    }
    struct DepthGuard {
        int& d;
        explicit DepthGuard(int& d_) : d(d_) { ++d; }
        ~DepthGuard() { --d; }
    } guard(depth);

    CLI::App app{"semantic-aware secure reconstruction toolkit"};
    app.name("cra");
    app.set_version_flag("--version", cra::kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed for randomized operations")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory receiving output files")
        ->capture_default_str();
    app.add_option("--format", g.format, "report file format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    AnalyzeOpts az;
    CLI::App* analyze = app.add_subcommand("analyze", "metrics of one parameter point");
    analyze->fallthrough();
    analyze->add_option("--p", az.p, "source 0->1 flip probability")->required();
    analyze->add_option("--q", az.q, "source 1->0 flip probability")->required();
    analyze->add_option("--ps", az.ps, "legitimate-channel success probability")->required();
    analyze->add_option("--pse", az.pse, "adversary-channel success probability")->required();
    analyze->add_option("--palpha", az.palpha, "transmission probability")->required();
    analyze->add_option("--omega", az.omegas, "weights for the blended marginal metric")
        ->delimiter(',')
        ->capture_default_str();

    SweepOpts sw;
    CLI::App* sweep = app.add_subcommand("sweep", "metric table over a transmission grid");
    sweep->fallthrough();
    sweep->add_option("--p", sw.p, "source 0->1 flip probability")->required();
    sweep->add_option("--q", sw.q, "source 1->0 flip probability")->required();
    sweep->add_option("--ps", sw.ps, "legitimate-channel success probability")->required();
    sweep->add_option("--pse", sw.pse, "adversary-channel success probability")->required();
    sweep->add_option("--grid-start", sw.start, "first transmission probability")
        ->capture_default_str();
    sweep->add_option("--grid-stop", sw.stop, "last transmission probability")
        ->capture_default_str();
    sweep->add_option("--grid-step", sw.step, "grid increment")->capture_default_str();
    sweep->add_flag("--numeric", sw.numeric, "fill the linear-solver column");
    sweep->add_flag("--sim", sw.sim, "fill the simulation columns");
    sweep->add_option("--sim-horizon", sw.sim_horizon, "slots per simulated run")
        ->capture_default_str();
    sweep->add_option("--sim-runs", sw.sim_runs, "independent runs per grid point")
        ->capture_default_str();
    sweep->add_option("--warmup", sw.warmup, "slots discarded per run")->capture_default_str();
    sweep->add_option("--omega", sw.omega, "weight of the blended marginal column")
        ->capture_default_str();

    OptimizeOpts op;
    CLI::App* optimize = app.add_subcommand("optimize", "best transmission probability");
    optimize->fallthrough();
    optimize->add_option("--p", op.p, "source 0->1 flip probability")->required();
    optimize->add_option("--q", op.q, "source 1->0 flip probability")->required();
    optimize->add_option("--ps", op.ps, "legitimate-channel success probability")->required();
    optimize->add_option("--pse", op.pse, "adversary-channel success probability")->required();
    optimize->add_option("--pmin", op.pmin, "feasible interval lower end")->capture_default_str();
    optimize->add_option("--pmax", op.pmax, "feasible interval upper end")->capture_default_str();

    ValidateCliOpts va;
    CLI::App* validate = app.add_subcommand("validate", "cross-validation battery");
    validate->fallthrough();
    validate->add_option("--tuples", va.tuples, "random tuples per analytical check")
        ->capture_default_str();
    validate->add_flag("--no-sim", va.no_sim, "skip the simulation-agreement check");
    validate->add_option("--sim-horizon", va.sim_horizon, "slots per simulated run")
        ->capture_default_str();
    validate->add_option("--sim-runs", va.sim_runs, "independent runs per tuple")
        ->capture_default_str();
    validate->add_option("--sim-tuples", va.sim_tuples, "tuples in the simulation check")
        ->capture_default_str();
    validate->add_option("--sigma", va.sigma, "simulation acceptance band in standard errors")
        ->capture_default_str();
    validate->add_option("--series-n", va.series_n, "series route truncation age")
        ->capture_default_str();
    validate->add_flag("--inject-fault", va.inject,
                       "flip one coefficient sign to prove the battery can fail");

    GeofenceOpts gf;
    CLI::App* geofence = app.add_subcommand("geofence", "spatial safety-boundary maps");
    geofence->fallthrough();
    geofence->add_option("--scene", gf.scene_path, "scene JSON file");
    geofence->add_flag("--demo", gf.demo, "use the built-in demonstration scene");
    geofence->add_option("--emit-demo-scene", gf.emit_name,
                         "write the demonstration scene JSON into --out-dir and exit");
    geofence->add_option("--demo-grid", gf.demo_grid, "demo scene cells per side")
        ->capture_default_str();
    geofence->add_option("--p", gf.p, "source 0->1 flip probability")->capture_default_str();
    geofence->add_option("--q", gf.q, "source 1->0 flip probability")->capture_default_str();
    geofence->add_option("--tau", gf.tau, "metric threshold traced by the contour")
        ->capture_default_str();
    geofence->add_option("--pmin", gf.pmin, "per-cell feasible interval lower end")
        ->capture_default_str();
    geofence->add_option("--pmax", gf.pmax, "per-cell feasible interval upper end")
        ->capture_default_str();

    std::string rr_manifest;
    CLI::App* rerun = app.add_subcommand("rerun", "replay a manifest and compare digests");
    rerun->fallthrough();
    rerun->add_option("manifest", rr_manifest, "manifest file from a previous run")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunContext ctx{g, args};
    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(ctx, az);
        if (app.got_subcommand(sweep)) return cmd_sweep(ctx, sw);
        if (app.got_subcommand(optimize)) return cmd_optimize(ctx, op);
        if (app.got_subcommand(validate)) return cmd_validate(ctx, va);
        if (app.got_subcommand(geofence)) return cmd_geofence(ctx, gf);
        if (app.got_subcommand(rerun)) return cmd_rerun(ctx, rr_manifest);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    if (argc > 1) args.assign(argv + 1, argv + argc);
    return run_cli(args);
}
