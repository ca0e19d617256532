#pragma once

#include "sphw/forces.hpp"
#include "sphw/kernels.hpp"
#include "sphw/particles.hpp"

#include <cstddef>
#include <vector>

namespace sphw {

struct IntegratorConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    /// Requested output times; each is realized at the nearest step multiple.
    std::vector<double> snapshot_times;

    void validate() const;
    std::size_t step_count() const;
    /// Step index at which each snapshot is taken (sorted, deduplicated).
    std::vector<std::size_t> snapshot_steps() const;
};

/// Uniform grid {j T / (count - 1)}, j = 0..count-1.
std::vector<double> uniform_snapshot_times(double t_end, std::size_t count);

/**
 * Kick-drift-kick leapfrog with linear drag folded into the two half kicks:
 *
 *   v' = (v + dt/2 a(x)) / (1 + dt/2 eta(x))          implicit first half
 *   x' = x + dt v'
 *   v'' = v' + dt/2 (a(x') - eta(x') v')               explicit second half
 *
 * where a collects pressure, -grad V and interaction terms. For pure drag
 * the velocity is multiplied by (1 - eta dt/2) / (1 + eta dt/2) per step,
 * which has modulus at most one for every eta dt >= 0.
 */
class Leapfrog {
public:
    Leapfrog(ForceModel fm, Kernel kernel, EvalOptions opt = {});

    /// Advances the state by one step. Accelerations at the end of a step
    /// are cached and reused by the next call on the same trajectory.
    void step(ParticleState& p, double dt);
    void reset_cache() { cache_valid_ = false; }

    const ForceModel& model() const noexcept { return fm_; }
    const Kernel& kernel() const noexcept { return kernel_; }

private:
    void refresh(const ParticleState& p);

    ForceModel fm_;
    Kernel kernel_;
    EvalOptions opt_;
    std::vector<Vec2> accel_;
    bool cache_valid_ = false;
};

/// One leapfrog step from scratch (no cached accelerations).
ParticleState step(const ParticleState& p, const ForceModel& fm, const Kernel& k, double dt,
                   const EvalOptions& opt = {});

using Trajectory = std::vector<ParticleState>;

/// Integrates to cfg.t_end, recording snapshots at cfg.snapshot_times
/// (t = 0 and t_end are always included when requested; an empty request
/// records only the final state). Throws DivergenceError naming the step
/// at which a non-finite value appears.
Trajectory run(const ParticleState& p0, const ForceModel& fm, const Kernel& k,
               const IntegratorConfig& cfg, const EvalOptions& opt = {});

} // namespace sphw
