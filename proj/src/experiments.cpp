#include "sphw/experiments.hpp"

#include "sphw/errors.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace sphw {

std::string to_string(Family f) {
    switch (f) {
    case Family::Expansion1D: return "expansion_1d";
    case Family::RotatingSquare2D: return "rotating_square_2d";
    case Family::Morse2D: return "morse_2d";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "expansion_1d") return Family::Expansion1D;
    if (name == "rotating_square_2d") return Family::RotatingSquare2D;
    if (name == "morse_2d") return Family::Morse2D;
    throw InvalidParameter("unknown experiment family '" + std::string(name) + "'");
}

int family_dim(Family f) { return f == Family::Expansion1D ? 1 : 2; }

int desk_scale_cap(Family f) { return f == Family::Expansion1D ? 7 : 5; }

int full_scale_cap(Family f) { return f == Family::Expansion1D ? 9 : 6; }

std::size_t ExperimentPlan::particle_count(int k) const {
    return std::size_t{1} << (dim() * k);
}

void ExperimentPlan::validate() const {
    if (is_hydro()) {
        EosPolytropic{gamma, k_eos}.validate();
        if (gamma < 1.0) throw InvalidParameter("gamma must be at least 1");
    }
    if (theta != 0 && theta != 1) throw InvalidParameter("theta must be 0 or 1");
    if (!(h_mode.value > 0.0)) throw InvalidParameter("h must be positive");
    if (resolutions.size() < 2) throw InvalidParameter("resolutions need at least two entries");
    const int cap = full_scale ? full_scale_cap(family) : desk_scale_cap(family);
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
        if (resolutions[i] < 1) throw InvalidParameter("resolutions must be at least 1");
        if (i > 0 && resolutions[i] <= resolutions[i - 1]) {
            throw InvalidParameter("resolutions must be strictly increasing");
        }
        if (resolutions[i] > cap) {
            throw InvalidParameter("resolution " + std::to_string(resolutions[i]) + " exceeds the cap " +
                                   std::to_string(cap) + (full_scale ? "" : " (set full_scale to raise it)"));
        }
    }
    IntegratorConfig{dt, t_end, {}}.validate();
    if (snapshots < 2) throw InvalidParameter("snapshots must be at least 2");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidParameter("eta must be nonnegative");
    if (family == Family::Morse2D) morse.validate();
}

ExperimentPlan ExperimentPlan::defaults(Family f) {
    ExperimentPlan p;
    p.family = f;
    switch (f) {
    case Family::Expansion1D:
        p.resolutions = {1, 2, 3, 4, 5, 6, 7};
        break;
    case Family::RotatingSquare2D:
        p.resolutions = {1, 2, 3, 4, 5};
        break;
    case Family::Morse2D:
        p.resolutions = {1, 2, 3, 4};
        p.dt = 1e-2;
        p.t_end = 100.0;
        p.eta = 10.0;
        break;
    }
    return p;
}

InitialSpec initial_spec(const ExperimentPlan& plan, int k) {
    const char* name = plan.family == Family::Expansion1D        ? "uniform_box_1d"
                       : plan.family == Family::RotatingSquare2D ? "rotating_square_2d"
                                                                 : "morse_cloud_2d";
    InitialSpec s = preset(name, plan.particle_count(k));
    s.mode = plan.init_mode;
    s.seed = plan.seed + static_cast<std::uint64_t>(k);
    return s;
}

ForceModel force_model(const ExperimentPlan& plan) {
    ForceModel fm;
    fm.theta = plan.theta;
    if (plan.is_hydro()) {
        fm.eos = EosPolytropic{plan.gamma, plan.k_eos};
    } else {
        fm.eos.reset();
        fm.interaction = plan.morse;
    }
    fm.eta = DragField::uniform(plan.eta);
    return fm;
}

Kernel plan_kernel(const ExperimentPlan& plan, const InitialSpec& spec) {
    const double h = select_h(spec, plan.h_mode);
    return plan.dim() == 1 ? Kernel::gaussian_1d(h) : Kernel::wendland_cubic_2d(h);
}

IntegratorConfig integrator_config(const ExperimentPlan& plan) {
    return IntegratorConfig{plan.dt, plan.t_end, uniform_snapshot_times(plan.t_end, plan.snapshots)};
}

ResolutionRun run_resolution(const ExperimentPlan& plan, int k, const EvalOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const InitialSpec spec = initial_spec(plan, k);
    const Kernel kernel = plan_kernel(plan, spec);
    const ForceModel fm = force_model(plan);
    const ParticleState p0 = make_initial_state(spec);

    ResolutionRun r;
    r.k = k;
    r.n = p0.size();
    r.h = kernel.h();
    r.support = make_support_diagnostic(p0, fm, kernel);
    try {
        r.snapshots = run(p0, fm, kernel, integrator_config(plan), opt);
    } catch (const DivergenceError& e) {
        throw DivergenceError(e.step(), to_string(plan.family) + " k=" + std::to_string(k) + ": " + e.what());
    }
    if (r.support.enabled) {
        for (const ParticleState& s : r.snapshots) {
            const double bound = r.support.radius(s.t);
            if (!check_support(s, bound)) {
                r.support_ok = false;
                spdlog::warn("{} k={}: support {} exceeds bound {} at t={}", to_string(plan.family), k,
                             max_abs_position(s), bound, s.t);
            }
        }
    }
    for (const Vec2& v : r.snapshots.back().vel) r.final_max_speed = std::max(r.final_max_speed, norm(v));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

StudyResult run_convergence_study(const ExperimentPlan& plan, const EvalOptions& opt, int parallel_runs,
                                  const ProgressFn& progress) {
    plan.validate();
    StudyResult out;
    out.plan = plan;
    const std::size_t m = plan.resolutions.size();
    out.runs.resize(m);

    // Largest runs first so a parallel pool finishes evenly.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = m - 1 - i;
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard lock(mu);
                if (next == m || failure) return;
                idx = order[next++];
            }
            try {
                ResolutionRun r = run_resolution(plan, plan.resolutions[idx], opt);
                std::lock_guard lock(mu);
                if (progress) {
                    std::ostringstream msg;
                    msg << to_string(plan.family) << " k=" << r.k << " n=" << r.n << " done in "
                        << std::setprecision(3) << r.seconds << " s";
                    progress(msg.str());
                }
                out.runs[idx] = std::move(r);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        const int threads = std::max(1, std::min<int>(parallel_runs, static_cast<int>(m)));
        std::vector<std::jthread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> distances;
    std::vector<int> ks;
    std::vector<std::size_t> ns;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        PairDistance pd;
        pd.k = out.runs[i].k;
        pd.n = out.runs[i].n;
        pd.sup = sup_wasserstein_over_time(out.runs[i].snapshots, out.runs[i + 1].snapshots);
        if (progress) {
            std::ostringstream msg;
            msg << "W(" << pd.k << "," << out.runs[i + 1].k << ") = " << std::setprecision(17)
                << pd.sup.max_distance;
            progress(msg.str());
        }
        distances.push_back(pd.sup.max_distance);
        ks.push_back(pd.k);
        ns.push_back(pd.n);
        out.pairs.push_back(std::move(pd));
    }
    if (distances.size() >= 2) {
        out.rates = convergence_rates(distances, plan.dim(), ks, ns);
    } else {
        out.rates.dim = plan.dim();
        out.rates.rows.push_back(RateRow{ks[0], ns[0], distances[0], std::nullopt});
    }
    return out;
}

DensityProfile density_profile(const ParticleState& p, const Kernel& k, std::span<const Vec2> grid) {
    DensityProfile d;
    d.points.assign(grid.begin(), grid.end());
    d.values = density_at(p, k, grid);
    return d;
}

std::vector<Vec2> line_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw InvalidParameter("line grid needs count >= 2 and hi > lo");
    std::vector<Vec2> g(count);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = {lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1), 0.0};
    }
    return g;
}

std::vector<Vec2> square_grid(const Vec2& lo, const Vec2& hi, std::size_t count) {
    if (count < 2 || !(hi.x > lo.x) || !(hi.y > lo.y)) {
        throw InvalidParameter("square grid needs count >= 2 and a nonempty box");
    }
    std::vector<Vec2> g;
    g.reserve(count * count);
    const double c = static_cast<double>(count - 1);
    for (std::size_t iy = 0; iy < count; ++iy) {
        for (std::size_t ix = 0; ix < count; ++ix) {
            g.push_back({lo.x + (hi.x - lo.x) * ix / c, lo.y + (hi.y - lo.y) * iy / c});
        }
    }
    return g;
}

double trapezoid_mass(const DensityProfile& profile) {
    double s = 0.0;
    for (std::size_t i = 1; i < profile.points.size(); ++i) {
        s += 0.5 * (profile.values[i] + profile.values[i - 1]) * (profile.points[i].x - profile.points[i - 1].x);
    }
    return s;
}

void write_snapshot_csv(const ParticleState& p, std::span<const double> rho, std::ostream& os) {
    os << (p.dim == 1 ? "t,id,x0,v0,rho,mass\n" : "t,id,x0,x1,v0,v1,rho,mass\n");
    os << std::setprecision(17);
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << p.t << ',' << i << ',' << p.pos[i].x << ',';
        if (p.dim == 2) os << p.pos[i].y << ',';
        os << p.vel[i].x << ',';
        if (p.dim == 2) os << p.vel[i].y << ',';
        os << (i < rho.size() ? rho[i] : 0.0) << ',' << p.mass[i] << '\n';
    }
}

DiscreteMeasure read_snapshot_csv(std::istream& is, const std::string& source) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            cells.push_back(cell);
        }
        return cells;
    };
    std::string line;
    if (!std::getline(is, line)) throw InvalidParameter(source + ": empty file");
    const std::vector<std::string> header = split(line);
    auto column = [&](const std::string& name) -> long {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<long>(it - header.begin());
    };
    const long cx = column("x0");
    const long cy = column("x1");
    const long cm = column("mass");
    if (cx < 0) throw InvalidParameter(source + ":1: missing column x0");

    DiscreteMeasure m;
    m.dim = cy >= 0 ? 2 : 1;
    std::size_t lineno = 1;
    double total = 0.0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split(line);
        auto number = [&](long c, const char* name) {
            if (c >= static_cast<long>(cells.size())) {
                throw InvalidParameter(source + ":" + std::to_string(lineno) + ": missing " + name);
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
                return v;
            } catch (const std::exception&) {
                throw InvalidParameter(source + ":" + std::to_string(lineno) + ": bad " + name + " '" + cells[c] + "'");
            }
        };
        Vec2 x{number(cx, "x0"), cy >= 0 ? number(cy, "x1") : 0.0};
        const double w = cm >= 0 ? number(cm, "mass") : 1.0;
        m.points.push_back(x);
        m.weights.push_back(w);
        total += w;
    }
    if (m.points.empty()) throw InvalidParameter(source + ": no rows");
    if (!(total > 0.0)) throw InvalidParameter(source + ": total mass must be positive");
    for (double& w : m.weights) w /= total;
    return m;
}

void write_profile_csv(const DensityProfile& profile, int dim, std::ostream& os) {
    os << (dim == 1 ? "x0,rho\n" : "x0,x1,rho\n") << std::setprecision(17);
    for (std::size_t i = 0; i < profile.points.size(); ++i) {
        os << profile.points[i].x << ',';
        if (dim == 2) os << profile.points[i].y << ',';
        os << profile.values[i] << '\n';
    }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << std::setprecision(17);
    return f;
}

void close_output(std::ofstream& f, const std::filesystem::path& path) {
    f.close();
    if (!f) throw Error("failed writing " + path.string());
}

} // namespace

void emit_report(const StudyResult& study, const std::filesystem::path& dir, const std::string& config_json) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "snapshots", ec);
    if (ec) throw Error("cannot create " + (dir / "snapshots").string() + ": " + ec.message());
    const std::string family = to_string(study.plan.family);

    {
        const auto path = dir / "rates.csv";
        auto f = open_output(path);
        f << "family,k,n,W_k_kplus1,C_rate\n";
        for (const RateRow& r : study.rates.rows) {
            f << family << ',' << r.k << ',' << r.n << ',' << r.distance << ',';
            if (r.rate) f << *r.rate;
            f << '\n';
        }
        close_output(f, path);
    }
    {
        const auto path = dir / "distances.csv";
        auto f = open_output(path);
        f << "family,k,n,t,W\n";
        for (const PairDistance& pd : study.pairs) {
            for (std::size_t s = 0; s < pd.sup.times.size(); ++s) {
                f << family << ',' << pd.k << ',' << pd.n << ',' << pd.sup.times[s] << ',' << pd.sup.distances[s]
                  << '\n';
            }
        }
        close_output(f, path);
    }
    for (const ResolutionRun& r : study.runs) {
        const InitialSpec spec = initial_spec(study.plan, r.k);
        const Kernel kernel = plan_kernel(study.plan, spec);
        for (std::size_t j = 0; j < r.snapshots.size(); ++j) {
            const auto path = dir / "snapshots" / ("k" + std::to_string(r.k) + "_s" + std::to_string(j) + ".csv");
            auto f = open_output(path);
            const ParticleState& s = r.snapshots[j];
            write_snapshot_csv(s, compute_density(s, kernel).rho, f);
            close_output(f, path);
        }
    }
    {
        nlohmann::json manifest;
        manifest["config"] = nlohmann::json::parse(config_json);
        // No wall-clock timings, so a rerun from the manifest reproduces it
        // byte for byte.
        nlohmann::json runs = nlohmann::json::array();
        for (const ResolutionRun& r : study.runs) {
            runs.push_back({{"k", r.k},
                            {"n", r.n},
                            {"h", r.h},
                            {"support_ok", r.support_ok},
                            {"final_max_speed", r.final_max_speed}});
        }
        manifest["runs"] = std::move(runs);
        if (study.plan.is_hydro() && study.plan.gamma <= 1.0) {
            manifest["note"] = "gamma = 1 lies outside proof coverage";
        }
        const auto path = dir / "manifest.json";
        auto f = open_output(path);
        f << manifest.dump(2) << '\n';
        close_output(f, path);
    }
}

} // namespace sphw
