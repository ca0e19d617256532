#include <doctest.h>

#include "sphw/config.hpp"
#include "sphw/errors.hpp"
#include "sphw/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace sphw;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sphw_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentPlan small_1d(int theta) {
    ExperimentPlan p = ExperimentPlan::defaults(Family::Expansion1D);
    p.theta = theta;
    p.resolutions = {1, 2, 3};
    p.dt = 1e-2;
    p.t_end = 0.2;
    p.snapshots = 3;
    return p;
}

const fs::path kGolden = fs::path(SPHW_TEST_DATA_DIR) / "golden_profile_512.csv";

} // namespace

TEST_CASE("profile of a single unit mass at the origin") {
    ParticleState p;
    p.dim = 1;
    p.mass = {1.0};
    p.pos = {{0.0, 0.0}};
    p.vel = {{}};
    const std::vector<Vec2> grid{{0.0, 0.0}};
    const DensityProfile d = density_profile(p, Kernel::gaussian_1d(1.0), grid);
    REQUIRE(d.values.size() == 1);
    CHECK(d.values[0] == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("equipartition profile matches the recorded golden file") {
    const ParticleState p = equipartition(preset("uniform_box_1d", 512));
    const DensityProfile d = density_profile(p, Kernel::gaussian_1d(1.0), line_grid(-3.0, 4.0, 71));
    for (double v : d.values) CHECK(v >= 0.0);

    if (const char* update = std::getenv("SPHW_UPDATE_GOLDEN"); update && *update == '1') {
        std::ofstream f(kGolden);
        write_profile_csv(d, 1, f);
    }
    std::ifstream f(kGolden);
    REQUIRE_MESSAGE(f.good(), "missing ", kGolden.string());
    std::string line;
    std::getline(f, line);
    std::size_t i = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        REQUIRE(i < d.values.size());
        const auto comma = line.find(',');
        const double x = std::stod(line.substr(0, comma));
        const double rho = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(x == doctest::Approx(d.points[i].x).epsilon(1e-15));
        CHECK(rho == doctest::Approx(d.values[i]).epsilon(1e-13));
        ++i;
    }
    CHECK(i == d.values.size());
    // Plateau of the unit-box indicator convolved with a unit Gaussian.
    CHECK(d.values[35] == doctest::Approx(std::erf(0.5)).epsilon(1e-4));
}

TEST_CASE("trapezoid mass of a wide profile is one") {
    const ParticleState p = equipartition(preset("uniform_box_1d", 512));
    const DensityProfile d = density_profile(p, Kernel::gaussian_1d(1.0), line_grid(-8.0, 9.0, 2001));
    CHECK(std::abs(trapezoid_mass(d) - 1.0) <= 1e-3);
}

TEST_CASE("2D profile grid covers the tensor product") {
    const std::vector<Vec2> g = square_grid({0.0, 0.0}, {1.0, 2.0}, 3);
    REQUIRE(g.size() == 9);
    CHECK(g.front() == Vec2{0.0, 0.0});
    CHECK(g[1] == Vec2{0.5, 0.0});
    CHECK(g.back() == Vec2{1.0, 2.0});
    CHECK_THROWS_AS(line_grid(1.0, 0.0, 5), InvalidParameter);
}

TEST_CASE("snapshot CSV has the fixed columns and reads back") {
    ParticleState p = equipartition(preset("rotating_square_2d", 4));
    p.t = 0.5;
    const DensityField rho = compute_density(p, Kernel::wendland_cubic_2d(1.0));
    std::stringstream ss;
    write_snapshot_csv(p, rho.rho, ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "t,id,x0,x1,v0,v1,rho,mass");
    ss.seekg(0);
    const DiscreteMeasure m = read_snapshot_csv(ss);
    CHECK(m.dim == 2);
    CHECK(m.points == p.pos);
    CHECK(m.weights == p.mass);

    std::stringstream one("t,id,x0,v0,rho,mass\n0,0,0.25,0,1,0.5\n0,1,0.75,0,1,0.5\n");
    const DiscreteMeasure d1 = read_snapshot_csv(one);
    CHECK(d1.dim == 1);
    CHECK(d1.points[1].x == 0.75);
}

TEST_CASE("snapshot reader defaults to uniform weights and reports bad rows") {
    std::stringstream plain("id,x0\n0,1\n1,2\n2,3\n3,4\n");
    const DiscreteMeasure m = read_snapshot_csv(plain);
    CHECK(m.weights == std::vector<double>(4, 0.25));

    std::stringstream bad("id,x0\n0,1\n1,oops\n");
    try {
        read_snapshot_csv(bad, "cloud.csv");
        FAIL("expected a parse error");
    } catch (const InvalidParameter& e) {
        CHECK(std::string(e.what()).find("cloud.csv:3") != std::string::npos);
    }
    std::stringstream nox("id,y\n0,1\n");
    CHECK_THROWS_AS(read_snapshot_csv(nox), InvalidParameter);
}

TEST_CASE("plan validation") {
    ExperimentPlan p = small_1d(1);
    CHECK_NOTHROW(p.validate());
    p.resolutions = {2, 2};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = small_1d(1);
    p.resolutions = {1, 8};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p.full_scale = true;
    CHECK_NOTHROW(p.validate());
    p = small_1d(1);
    p.snapshots = 1;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    CHECK(ExperimentPlan::defaults(Family::RotatingSquare2D).particle_count(3) == 64);
    CHECK(family_from_string("morse_2d") == Family::Morse2D);
    CHECK_THROWS_AS(family_from_string("euler_3d"), InvalidParameter);
}

TEST_CASE("study produces a rate table with one row per pair") {
    const StudyResult s = run_convergence_study(small_1d(1));
    REQUIRE(s.runs.size() == 3);
    REQUIRE(s.pairs.size() == 2);
    REQUIRE(s.rates.rows.size() == 2);
    CHECK(s.rates.rows[0].k == 1);
    CHECK(s.rates.rows[0].n == 2);
    CHECK_FALSE(s.rates.rows[0].rate.has_value());
    const double expected = std::log2(s.pairs[1].sup.max_distance / s.pairs[0].sup.max_distance);
    CHECK(*s.rates.rows[1].rate == doctest::Approx(expected).epsilon(1e-15));
    for (const ResolutionRun& r : s.runs) CHECK(r.snapshots.size() == 3);
}

TEST_CASE("gamma = 2 studies coincide for both schemes") {
    const StudyResult a = run_convergence_study(small_1d(0));
    const StudyResult b = run_convergence_study(small_1d(1));
    for (std::size_t r = 0; r < a.runs.size(); ++r) {
        for (std::size_t s = 0; s < a.runs[r].snapshots.size(); ++s) {
            const ParticleState& x = a.runs[r].snapshots[s];
            const ParticleState& y = b.runs[r].snapshots[s];
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(norm(x.pos[i] - y.pos[i]) <= 1e-10 * std::max(1.0, norm(y.pos[i])));
                CHECK(norm(x.vel[i] - y.vel[i]) <= 1e-10 * std::max(1.0, norm(y.vel[i])));
            }
        }
    }
}

TEST_CASE("a diverging run aborts the study naming family and resolution") {
    ExperimentPlan p = ExperimentPlan::defaults(Family::Morse2D);
    p.resolutions = {1, 2};
    p.t_end = 1.0;
    p.morse.c_r = 1e308;
    p.morse.l_r = 1e-3;
    try {
        run_convergence_study(p);
        FAIL("expected a divergence error");
    } catch (const DivergenceError& e) {
        const std::string what = e.what();
        CHECK(what.find("morse_2d") != std::string::npos);
        CHECK(what.find("k=") != std::string::npos);
    }
}

TEST_CASE("report files and manifest round trip") {
    RunConfig cfg;
    cfg.plan = small_1d(1);
    const fs::path first = scratch_dir("report_a");
    const fs::path second = scratch_dir("report_b");
    cfg.output_dir = first;
    emit_report(run_convergence_study(cfg.plan), first, to_json(cfg));

    std::ifstream rates(first / "rates.csv");
    std::string header;
    std::getline(rates, header);
    CHECK(header == "family,k,n,W_k_kplus1,C_rate");
    std::ifstream dist(first / "distances.csv");
    std::getline(dist, header);
    CHECK(header == "family,k,n,t,W");
    CHECK(fs::exists(first / "snapshots" / "k3_s2.csv"));

    const RunConfig again = load_run_config(first / "manifest.json");
    CHECK(to_json(again) == to_json(cfg));
    emit_report(run_convergence_study(again.plan), second, to_json(again));
    for (const char* name : {"rates.csv", "distances.csv", "manifest.json", "snapshots/k2_s1.csv"}) {
        CHECK_MESSAGE(slurp(first / name) == slurp(second / name), name);
    }
    fs::remove_all(first);
    fs::remove_all(second);
}

TEST_CASE("gamma = 1 reports are labeled outside proof coverage") {
    RunConfig cfg;
    cfg.plan = small_1d(1);
    cfg.plan.gamma = 1.0;
    cfg.plan.resolutions = {1, 2};
    const fs::path dir = scratch_dir("gamma1");
    emit_report(run_convergence_study(cfg.plan), dir, to_json(cfg));
    CHECK(slurp(dir / "manifest.json").find("outside proof coverage") != std::string::npos);
    fs::remove_all(dir);
}
