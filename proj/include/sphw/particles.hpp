#pragma once

#include "sphw/forces.hpp"
#include "sphw/kernels.hpp"
#include "sphw/vec.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sphw {

/// Masses, positions and velocities of n numerical particles at time t.
/// Positions are the motion map evaluated at the particle labels; with
/// unit total mass the state is the discrete measure sum_k m_k delta_{x_k}.
struct ParticleState {
    int dim = 1;
    std::vector<double> mass;
    std::vector<Vec2> pos;
    std::vector<Vec2> vel;
    double t = 0.0;

    std::size_t size() const noexcept { return mass.size(); }
    double total_mass() const noexcept;
    bool is_finite() const noexcept;
    /// Throws InvalidParameter on inconsistent sizes, nonpositive masses,
    /// non-finite entries, or a nonzero second coordinate in 1D.
    void validate() const;
};

struct DensityField {
    std::vector<double> rho;
};

/// Compressed neighbor lists: for each i, the sorted indices j with
/// |x_i - x_j| <= cutoff, including i itself.
class NeighborLists {
public:
    NeighborLists() = default;

    std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::span<const std::uint32_t> operator[](std::size_t i) const {
        return {indices_.data() + offsets_[i], indices_.data() + offsets_[i + 1]};
    }
    double cutoff() const noexcept { return cutoff_; }

private:
    friend NeighborLists build_neighbor_lists(const ParticleState&, double);
    friend NeighborLists build_neighbor_lists_brute_force(const ParticleState&, double);

    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> indices_;
    double cutoff_ = 0.0;
};

/// Uniform-grid cell list search.
NeighborLists build_neighbor_lists(const ParticleState& p, double cutoff);
/// O(n^2) reference search, same output layout.
NeighborLists build_neighbor_lists_brute_force(const ParticleState& p, double cutoff);

enum class PairSearch {
    Auto,     ///< cell lists for compact kernels, all pairs otherwise
    AllPairs,
    CellList
};

struct EvalOptions {
    PairSearch search = PairSearch::Auto;
    int workers = 1;
};

/// rho_i = sum_j m_j W_h(x_i - x_j), self term included.
DensityField compute_density(const ParticleState& p, const Kernel& k, const EvalOptions& opt = {});

/// Summation density at arbitrary evaluation points.
std::vector<double> density_at(const ParticleState& p, const Kernel& k, std::span<const Vec2> points);

/// Pressure, external-potential and interaction accelerations; everything
/// except the drag term. Density is required only when fm.eos is set.
std::vector<Vec2> conservative_accelerations(const ParticleState& p, const DensityField& d,
                                             const ForceModel& fm, const Kernel& k,
                                             const EvalOptions& opt = {});

/// Full right-hand side
///   a_k = -sum_i m_i grad W(x_k - x_i) [F(rho_k) + theta F(rho_i)]
///         - grad V(x_k) - eta(x_k) v_k + sum_i m_i K(x_k - x_i).
std::vector<Vec2> compute_accelerations(const ParticleState& p, const DensityField& d,
                                        const ForceModel& fm, const Kernel& k,
                                        const EvalOptions& opt = {});

Vec2 momentum(const ParticleState& p);
double angular_momentum(const ParticleState& p);
/// sum_k m_k a_k for a given acceleration field.
Vec2 total_force(const ParticleState& p, std::span<const Vec2> accel);
/// sum_k m_k x_k x a_k.
double total_torque(const ParticleState& p, std::span<const Vec2> accel);

/// A-priori bound on how far the support can spread:
///   r(t) = r0 + t |v0|_inf + t^2/2 (M1 + |grad V|_inf + |K|_inf).
struct SupportDiagnostic {
    double r0 = 0.0;
    double v0_sup = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double grad_v_sup = 0.0;
    double interaction_sup = 0.0;
    bool enabled = true;
    std::string note;

    /// Nondecreasing in t; infinity when disabled.
    double radius(double t) const;
};

/// Builds the diagnostic from the initial state. For theta = 1 the
/// constants follow from the kernel and the pressure function on
/// [0, max W]; for theta = 0 the caller must supply M1.
SupportDiagnostic make_support_diagnostic(const ParticleState& p0, const ForceModel& fm,
                                          const Kernel& k,
                                          std::optional<double> user_m1 = std::nullopt);

bool check_support(const ParticleState& p, double bound);
double max_abs_position(const ParticleState& p);

} // namespace sphw
