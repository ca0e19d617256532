#include "sphw/integrator.hpp"

#include "sphw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sphw {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be nonnegative");
    for (double t : snapshot_times) {
        if (t < 0.0 || t > t_end + 0.5 * dt) {
            throw InvalidParameter("snapshot time " + std::to_string(t) + " outside [0, t_end]");
        }
    }
}

std::size_t IntegratorConfig::step_count() const {
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

std::vector<std::size_t> IntegratorConfig::snapshot_steps() const {
    std::vector<std::size_t> steps;
    steps.reserve(snapshot_times.size());
    const std::size_t last = step_count();
    for (double t : snapshot_times) {
        steps.push_back(std::min(last, static_cast<std::size_t>(std::llround(t / dt))));
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

std::vector<double> uniform_snapshot_times(double t_end, std::size_t count) {
    if (count < 2) throw InvalidParameter("snapshot count must be at least 2");
    std::vector<double> t(count);
    for (std::size_t j = 0; j < count; ++j) t[j] = t_end * static_cast<double>(j) / static_cast<double>(count - 1);
    return t;
}

Leapfrog::Leapfrog(ForceModel fm, Kernel kernel, EvalOptions opt)
    : fm_(std::move(fm)), kernel_(kernel), opt_(opt) {
    fm_.validate();
}

void Leapfrog::refresh(const ParticleState& p) {
    DensityField d;
    if (fm_.eos) d = compute_density(p, kernel_, opt_);
    accel_ = conservative_accelerations(p, d, fm_, kernel_, opt_);
    cache_valid_ = true;
}

void Leapfrog::step(ParticleState& p, double dt) {
    if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (!cache_valid_ || accel_.size() != p.size()) refresh(p);
    const double half = 0.5 * dt;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = fm_.eta(p.pos[i]);
        p.vel[i] = (p.vel[i] + half * accel_[i]) / (1.0 + half * eta);
        p.pos[i] += dt * p.vel[i];
    }
    refresh(p);
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = fm_.eta(p.pos[i]);
        p.vel[i] += half * (accel_[i] - eta * p.vel[i]);
    }
    p.t += dt;
}

ParticleState step(const ParticleState& p, const ForceModel& fm, const Kernel& k, double dt,
                   const EvalOptions& opt) {
    Leapfrog lf(fm, k, opt);
    ParticleState out = p;
    lf.step(out, dt);
    return out;
}

Trajectory run(const ParticleState& p0, const ForceModel& fm, const Kernel& k,
               const IntegratorConfig& cfg, const EvalOptions& opt) {
    cfg.validate();
    p0.validate();
    const std::size_t total = cfg.step_count();
    std::vector<std::size_t> wanted = cfg.snapshot_steps();
    if (wanted.empty()) wanted.push_back(total);

    Trajectory out;
    out.reserve(wanted.size());
    ParticleState p = p0;
    std::size_t next = 0;
    if (wanted[next] == 0) {
        out.push_back(p);
        ++next;
    }
    if (next == wanted.size()) return out;

    Leapfrog lf(fm, k, opt);
    for (std::size_t s = 1; s <= total; ++s) {
        lf.step(p, cfg.dt);
        // Keep time an exact multiple of dt instead of an accumulated sum.
        p.t = p0.t + static_cast<double>(s) * cfg.dt;
        if (!p.is_finite()) throw DivergenceError(s, "non-finite position or velocity");
        if (s == wanted[next]) {
            out.push_back(p);
            if (++next == wanted.size()) break;
        }
    }
    return out;
}

} // namespace sphw
