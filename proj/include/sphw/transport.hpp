#pragma once

#include "sphw/particles.hpp"
#include "sphw/vec.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sphw {

/// Weighted point cloud with probability weights.
struct DiscreteMeasure {
    int dim = 1;
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
    /// Throws InvalidParameter unless weights are nonnegative, sum to one
    /// within 1e-12, and points are finite.
    void validate() const;

    static DiscreteMeasure dirac(int dim, Vec2 at);
    static DiscreteMeasure uniform(int dim, std::vector<Vec2> points);
    /// Positions weighted by mass / total mass.
    static DiscreteMeasure from_particles(const ParticleState& p);
};

struct PlanEntry {
    std::size_t source;
    std::size_t target;
    double mass;
};

/// Coupling with the given marginals, stored sparsely.
struct TransportPlan {
    std::vector<PlanEntry> entries;
    double cost = 0.0;

    /// Largest deviation of the row/column sums from the marginal weights.
    double marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
    double min_mass() const;
};

void write_plan_csv(const TransportPlan& plan, std::ostream& os);

/// Exact W1 on the line: integral of |F_mu - F_nu| over the merged support.
double w1_1d_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct LpOptions {
    /// Upper bound on n_mu * n_nu arcs held in memory.
    std::size_t max_arcs = std::size_t{1} << 24;
};

struct LpResult {
    double distance = 0.0;
    TransportPlan plan;
    std::size_t pivots = 0;
};

/// Exact W1 in any dimension via network simplex on the complete bipartite
/// graph with Euclidean costs. Throws ResourceError if the arc count
/// exceeds opt.max_arcs.
LpResult w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LpOptions& opt = {});

/// Dual certificate for a plan: potentials from shortest paths in the
/// residual graph. When no negative cycle exists, dual_value is a lower
/// bound on the optimum and gap = plan.cost - dual_value.
struct DualCertificate {
    bool negative_cycle = false;
    double dual_value = 0.0;
    double gap = 0.0;
    double max_violation = 0.0;
    std::vector<double> source_potential;
    std::vector<double> target_potential;
};

DualCertificate certify_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const TransportPlan& plan);

/// Probability density on the line, constant between consecutive breaks.
struct PiecewiseConstantDensity1D {
    std::vector<double> breaks; ///< strictly increasing, size m + 1
    std::vector<double> values; ///< size m, nonnegative

    static PiecewiseConstantDensity1D uniform(double a, double b);
    /// Throws InvalidParameter for malformed breaks or negative values and
    /// when the total mass differs from one by more than 1e-12.
    void validate() const;
    double cdf(double x) const;
};

/// Exact integral of |F_mu - F_rho| for a discrete measure against a
/// piecewise-constant density.
double w1_1d_vs_density(const DiscreteMeasure& mu, const PiecewiseConstantDensity1D& rho);

/// Exact 1D solver for 1D measures, network simplex otherwise.
double w1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LpOptions& opt = {});

struct SupResult {
    double max_distance = 0.0;
    double argmax_time = 0.0;
    std::vector<double> times;
    std::vector<double> distances;
};

/// max over the shared time grid of W1 between same-time snapshots.
/// Throws MismatchError if the grids differ.
SupResult sup_wasserstein_over_time(const std::vector<ParticleState>& a,
                                    const std::vector<ParticleState>& b,
                                    const LpOptions& opt = {});

struct RateRow {
    int k = 0;
    std::size_t n = 0;
    double distance = 0.0;        ///< W_{k,k+1}
    std::optional<double> rate;   ///< (1/d) log2 |W_{k,k+1} / W_{k-1,k}|
};

struct RateTable {
    int dim = 1;
    std::vector<RateRow> rows;

    /// Last defined rate, if any.
    std::optional<double> final_rate() const;
    bool has_undefined_rate() const;
};

/// Rates from consecutive distances. ks and ns label the coarser resolution
/// of each pair; they may be empty, in which case k counts from 1.
RateTable convergence_rates(const std::vector<double>& distances, int dim,
                            const std::vector<int>& ks = {}, const std::vector<std::size_t>& ns = {});

} // namespace sphw
