#include "sphw/verify.hpp"

#include "sphw/init.hpp"
#include "sphw/integrator.hpp"
#include "sphw/particles.hpp"
#include "sphw/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace sphw {

namespace {

ParticleState random_state(std::mt19937_64& rng, int dim, std::size_t n) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> w(0.5, 1.5);
    ParticleState p;
    p.dim = dim;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p.pos.push_back({u(rng), dim == 2 ? u(rng) : 0.0});
        p.vel.push_back({u(rng), dim == 2 ? u(rng) : 0.0});
        p.mass.push_back(w(rng));
        total += p.mass.back();
    }
    for (double& m : p.mass) m /= total;
    return p;
}

ForceModel hydro(int theta, double gamma) {
    ForceModel fm;
    fm.theta = theta;
    fm.eos = EosPolytropic{gamma, 1.0};
    return fm;
}

CheckResult timed(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
    CheckResult r;
    r.name = name;
    std::ostringstream detail;
    detail.precision(3);
    const auto start = std::chrono::steady_clock::now();
    try {
        r.passed = body(detail);
    } catch (const std::exception& e) {
        r.passed = false;
        detail << "exception: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.detail = detail.str();
    return r;
}

} // namespace

std::vector<CheckResult> run_fast_checks(const VerifyOptions& opt) {
    std::vector<CheckResult> out;

    out.push_back(timed("scheme coincidence (gamma = 2)", [&](std::ostringstream& d) {
        std::mt19937_64 rng(1);
        std::uniform_int_distribution<std::size_t> count(2, 64);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int dim = trial % 2 ? 2 : 1;
            const ParticleState p = random_state(rng, dim, count(rng));
            const Kernel k = (dim == 1 ? Kernel::gaussian_1d(0.3) : Kernel::wendland_cubic_2d(0.3)).with_fault(opt.fault);
            const DensityField rho = compute_density(p, k);
            const auto a0 = compute_accelerations(p, rho, hydro(0, 2.0), k);
            const auto a1 = compute_accelerations(p, rho, hydro(1, 2.0), k);
            double scale = 0.0;
            double diff = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                scale = std::max(scale, norm(a1[i]));
                diff = std::max(diff, norm(a0[i] - a1[i]));
            }
            worst = std::max(worst, diff / std::max(scale, 1e-300));
        }
        d << "max relative difference " << worst;
        return worst <= 1e-10;
    }));

    out.push_back(timed("LP matches exact 1D distance", [&](std::ostringstream& d) {
        std::mt19937_64 rng(2);
        std::uniform_int_distribution<std::size_t> count(1, 32);
        std::uniform_real_distribution<double> x(-1.0, 1.0);
        std::uniform_real_distribution<double> w(0.05, 1.0);
        auto measure = [&] {
            DiscreteMeasure m;
            m.dim = 1;
            const std::size_t n = count(rng);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                m.points.push_back({x(rng), 0.0});
                m.weights.push_back(w(rng));
                total += m.weights.back();
            }
            for (double& v : m.weights) v /= total;
            return m;
        };
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const DiscreteMeasure a = measure();
            const DiscreteMeasure b = measure();
            worst = std::max(worst, std::abs(w1_lp(a, b).distance - w1_1d_discrete(a, b)));
        }
        d << "max |LP - exact| " << worst;
        return worst <= 1e-9;
    }));

    out.push_back(timed("equipartition distance 1/(4n)", [&](std::ostringstream& d) {
        const auto uniform = GridDensity::uniform(Box::unit(1)).to_1d();
        double worst = 0.0;
        for (std::size_t n = 2; n <= 1024; n *= 2) {
            const ParticleState p = equipartition(preset("uniform_box_1d", n));
            const double w = w1_1d_vs_density(DiscreteMeasure::from_particles(p), uniform);
            worst = std::max(worst, std::abs(w - 1.0 / (4.0 * static_cast<double>(n))));
        }
        d << "max deviation " << worst;
        return worst <= 1e-12;
    }));

    out.push_back(timed("momentum conservation (theta = 1)", [&](std::ostringstream& d) {
        std::mt19937_64 rng(3);
        const ParticleState p0 = random_state(rng, 2, 49);
        const Kernel k = Kernel::wendland_cubic_2d(0.3).with_fault(opt.fault);
        const ParticleState p = run(p0, hydro(1, 7.0), k, IntegratorConfig{1e-3, 1.0, {}}).back();
        double scale = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) scale += p.mass[i] * norm(p.vel[i]);
        const double drift = norm(momentum(p) - momentum(p0)) / scale;
        d << "relative drift over 1000 steps " << drift;
        return drift <= 1e-12;
    }));

    return out;
}

} // namespace sphw
