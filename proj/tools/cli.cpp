#include "cli.hpp"

#include "sphw/config.hpp"
#include "sphw/errors.hpp"
#include "sphw/experiments.hpp"
#include "sphw/transport.hpp"
#include "sphw/verify.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

namespace sphw::cli {

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

DiscreteMeasure load_cloud(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidParameter("cannot open " + path);
    return read_snapshot_csv(f, path);
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& output, bool quiet,
            std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    }
    if (output) cfg.output_dir = *output;
    spdlog::set_level(spdlog::level::from_str(cfg.verbosity));

    const ProgressFn progress = [&](std::string_view msg) {
        if (!quiet) err << msg << '\n';
    };
    const StudyResult study =
        run_convergence_study(cfg.plan, EvalOptions{PairSearch::Auto, cfg.workers}, cfg.parallel_runs, progress);
    emit_report(study, cfg.output_dir, to_json(cfg));

    out << std::setprecision(17) << "family,k,n,W_k_kplus1,C_rate\n";
    for (const RateRow& r : study.rates.rows) {
        out << to_string(cfg.plan.family) << ',' << r.k << ',' << r.n << ',' << r.distance << ',';
        if (r.rate) out << *r.rate;
        out << '\n';
    }
    if (!quiet) err << "outputs written to " << cfg.output_dir.string() << '\n';
    return kOk;
}

int cmd_distance(const std::string& a_path, const std::string& b_path, const std::optional<std::string>& plan_path,
                 std::ostream& out, std::ostream& err) {
    DiscreteMeasure a, b;
    try {
        a = load_cloud(a_path);
        b = load_cloud(b_path);
        if (a.dim != b.dim) {
            throw MismatchError("dimension mismatch: " + a_path + " is " + std::to_string(a.dim) + "D, " + b_path +
                                " is " + std::to_string(b.dim) + "D");
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    out << std::setprecision(17);
    if (a.dim == 1 && !plan_path) {
        out << "W1 = " << w1_1d_discrete(a, b) << " (solver: exact 1D)\n";
        return kOk;
    }
    const LpResult r = w1_lp(a, b);
    out << "W1 = " << r.distance << " (solver: network simplex, " << r.pivots << " pivots)\n";
    if (plan_path) {
        std::ofstream f(*plan_path);
        if (!f) throw Error("cannot open " + *plan_path + " for writing");
        write_plan_csv(r.plan, f);
    }
    return kOk;
}

int cmd_verify(const std::string& fault, std::ostream& out, std::ostream& err) {
    VerifyOptions opt;
    if (fault == "flip-gradient-sign") {
        opt.fault = GradientFault::FlipSignForNegativeX;
    } else if (!fault.empty() && fault != "none") {
        err << "error: unknown fault '" << fault << "'\n";
        return kUsage;
    }
    const std::vector<CheckResult> results = run_fast_checks(opt);
    bool all = true;
    for (const CheckResult& r : results) {
        out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(38) << r.name << ' ' << r.detail << "  ("
            << std::setprecision(3) << r.seconds << " s)\n";
        all = all && r.passed;
    }
    out << (all ? "all checks passed\n" : "some checks failed\n");
    return all ? kOk : kRuntime;
}

int cmd_profile(const std::string& snapshot, const std::string& kernel_name, double h, std::optional<double> lo,
                std::optional<double> hi, std::size_t points, const std::optional<std::string>& output,
                std::ostream& out, std::ostream& err) {
    DiscreteMeasure cloud;
    Kernel kernel = Kernel::gaussian_1d(1.0);
    try {
        cloud = load_cloud(snapshot);
        kernel = Kernel::make(kernel_family_from_string(kernel_name), h);
        if (kernel.dim() != cloud.dim) throw MismatchError("kernel dimension does not match the snapshot");
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    ParticleState p;
    p.dim = cloud.dim;
    p.pos = cloud.points;
    p.mass = cloud.weights;
    p.vel.assign(p.size(), Vec2{});

    Vec2 bmin = p.pos.front();
    Vec2 bmax = p.pos.front();
    for (const Vec2& x : p.pos) {
        bmin = {std::min(bmin.x, x.x), std::min(bmin.y, x.y)};
        bmax = {std::max(bmax.x, x.x), std::max(bmax.y, x.y)};
    }
    const double pad = std::isinf(kernel.support_radius()) ? 4.0 * h : kernel.support_radius();
    const double a = lo.value_or(std::min(bmin.x, bmin.y) - pad);
    const double b = hi.value_or(std::max(bmax.x, bmax.y) + pad);
    const std::vector<Vec2> grid = p.dim == 1 ? line_grid(a, b, points) : square_grid({a, a}, {b, b}, points);
    const DensityProfile prof = density_profile(p, kernel, grid);
    if (output) {
        std::ofstream f(*output);
        if (!f) throw Error("cannot open " + *output + " for writing");
        write_profile_csv(prof, p.dim, f);
    } else {
        write_profile_csv(prof, p.dim, out);
    }
    return kOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle hydrodynamics convergence studies measured in the Wasserstein-1 distance", "sphw"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run a convergence study from a JSON configuration");
    run->add_option("config", config_path, "configuration or manifest file")->required();
    run->add_option("-o,--output", output, "output directory (overrides the configuration)");
    run->add_flag("-q,--quiet", quiet, "suppress progress messages");

    std::string file_a, file_b;
    std::optional<std::string> plan_path;
    auto* distance = app.add_subcommand("distance", "W1 distance between two snapshot files");
    distance->add_option("a", file_a, "first snapshot CSV")->required();
    distance->add_option("b", file_b, "second snapshot CSV")->required();
    distance->add_option("--plan", plan_path, "write the optimal plan (forces the LP solver)");

    std::string fault;
    auto* verify = app.add_subcommand("verify", "run the fast self-checks");
    verify->add_option("--inject-fault", fault, "deliberate defect for mutation testing: flip-gradient-sign");

    std::string profile_in;
    std::string kernel_name = "gaussian_1d";
    double h = 1.0;
    std::optional<double> lo, hi;
    std::size_t points = 201;
    std::optional<std::string> profile_out;
    auto* profile = app.add_subcommand("profile", "export the summation density of a snapshot on a grid");
    profile->add_option("snapshot", profile_in, "snapshot CSV")->required();
    profile->add_option("--kernel", kernel_name, "gaussian_1d or wendland_cubic_2d");
    profile->add_option("--smoothing-length", h, "kernel smoothing length h")->check(CLI::PositiveNumber);
    profile->add_option("--lo", lo, "grid lower bound (each axis)");
    profile->add_option("--hi", hi, "grid upper bound (each axis)");
    profile->add_option("--points", points, "points per axis")->check(CLI::Range(2, 100000));
    profile->add_option("-o,--output", profile_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return kUsage;
    }

    try {
        if (*run) return cmd_run(config_path, output, quiet, out, err);
        if (*distance) return cmd_distance(file_a, file_b, plan_path, out, err);
        if (*verify) return cmd_verify(fault, out, err);
        if (*profile) return cmd_profile(profile_in, kernel_name, h, lo, hi, points, profile_out, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}

} // namespace sphw::cli
