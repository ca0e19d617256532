#include "sphw/transport.hpp"

#include "network_simplex.hpp"
#include "sphw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace sphw {

namespace {

constexpr double kWeightTolerance = 1e-12;

void require_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim != nu.dim) {
        throw MismatchError("measure dimensions differ: " + std::to_string(mu.dim) + " vs " +
                            std::to_string(nu.dim));
    }
}

// Positive-weight atoms only; zero-weight points cannot carry mass.
struct Compacted {
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

Compacted compact(const DiscreteMeasure& m) {
    Compacted c;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.weights[i] > 0.0) {
            c.index.push_back(i);
            c.weight.push_back(m.weights[i]);
        }
    }
    return c;
}

} // namespace

void DiscreteMeasure::validate() const {
    if (dim != 1 && dim != 2) throw InvalidParameter("measure dimension must be 1 or 2");
    if (points.size() != weights.size()) throw InvalidParameter("points and weights differ in length");
    if (points.empty()) throw InvalidParameter("measure has no atoms");
    // Compensated sum keeps the check meaningful for large atom counts.
    double total = 0.0;
    double carry = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!(weights[i] >= 0.0)) throw InvalidParameter("negative weight at atom " + std::to_string(i));
        if (!is_finite(points[i])) throw InvalidParameter("non-finite point at atom " + std::to_string(i));
        const double y = weights[i] - carry;
        const double next = total + y;
        carry = (next - total) - y;
        total = next;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) {
        throw InvalidParameter("weights sum to " + std::to_string(total) + ", expected 1");
    }
}

DiscreteMeasure DiscreteMeasure::dirac(int dim, Vec2 at) { return {dim, {at}, {1.0}}; }

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<Vec2> points) {
    const double w = 1.0 / static_cast<double>(points.size());
    std::vector<double> weights(points.size(), w);
    return {dim, std::move(points), std::move(weights)};
}

DiscreteMeasure DiscreteMeasure::from_particles(const ParticleState& p) {
    const double total = p.total_mass();
    DiscreteMeasure m{p.dim, p.pos, {}};
    m.weights.reserve(p.size());
    for (double w : p.mass) m.weights.push_back(w / total);
    return m;
}

double TransportPlan::marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
    std::vector<double> row(mu.size(), 0.0);
    std::vector<double> col(nu.size(), 0.0);
    for (const PlanEntry& e : entries) {
        row.at(e.source) += e.mass;
        col.at(e.target) += e.mass;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) err = std::max(err, std::abs(row[i] - mu.weights[i]));
    for (std::size_t j = 0; j < col.size(); ++j) err = std::max(err, std::abs(col[j] - nu.weights[j]));
    return err;
}

double TransportPlan::min_mass() const {
    double m = std::numeric_limits<double>::infinity();
    for (const PlanEntry& e : entries) m = std::min(m, e.mass);
    return m;
}

void write_plan_csv(const TransportPlan& plan, std::ostream& os) {
    const auto old = os.precision(17);
    os << "i,j,mass\n";
    for (const PlanEntry& e : plan.entries) os << e.source << ',' << e.target << ',' << e.mass << '\n';
    os.precision(old);
}

// ---------------------------------------------------------------------------
// One-dimensional exact solvers
// ---------------------------------------------------------------------------

double w1_1d_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    require_same_dim(mu, nu);
    if (mu.dim != 1) throw MismatchError("w1_1d_discrete requires one-dimensional measures");
    mu.validate();
    nu.validate();

    // Merge atoms of both measures; at equal positions the source atom is
    // processed first, which does not affect the integral.
    struct Atom {
        double x;
        double dw; // +w for mu, -w for nu
        int side;
    };
    std::vector<Atom> atoms;
    atoms.reserve(mu.size() + nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) atoms.push_back({mu.points[i].x, mu.weights[i], 0});
    for (std::size_t j = 0; j < nu.size(); ++j) atoms.push_back({nu.points[j].x, -nu.weights[j], 1});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
        return a.x < b.x || (a.x == b.x && a.side < b.side);
    });

    // Track the two CDFs separately so the difference carries no drift
    // from alternating additions.
    double f_mu = 0.0;
    double f_nu = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
        if (atoms[k].dw >= 0.0) {
            f_mu += atoms[k].dw;
        } else {
            f_nu -= atoms[k].dw;
        }
        total += std::abs(f_mu - f_nu) * (atoms[k + 1].x - atoms[k].x);
    }
    return total;
}

PiecewiseConstantDensity1D PiecewiseConstantDensity1D::uniform(double a, double b) {
    if (!(b > a)) throw InvalidParameter("uniform density needs a < b");
    return {{a, b}, {1.0 / (b - a)}};
}

void PiecewiseConstantDensity1D::validate() const {
    if (breaks.size() < 2 || values.size() + 1 != breaks.size()) {
        throw InvalidParameter("density needs m values on m + 1 breaks");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) throw InvalidParameter("density breaks must increase");
        if (!(values[i] >= 0.0)) throw InvalidParameter("density values must be nonnegative");
        mass += values[i] * (breaks[i + 1] - breaks[i]);
    }
    if (std::abs(mass - 1.0) > kWeightTolerance) {
        throw InvalidParameter("density integrates to " + std::to_string(mass) + ", expected 1");
    }
}

double PiecewiseConstantDensity1D::cdf(double x) const {
    double f = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (x <= breaks[i]) break;
        const double right = std::min(x, breaks[i + 1]);
        f += values[i] * (right - breaks[i]);
    }
    return std::min(f, 1.0);
}

double w1_1d_vs_density(const DiscreteMeasure& mu, const PiecewiseConstantDensity1D& rho) {
    if (mu.dim != 1) throw MismatchError("w1_1d_vs_density requires a one-dimensional measure");
    mu.validate();
    rho.validate();

    std::vector<std::size_t> order(mu.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return mu.points[a].x < mu.points[b].x; });

    // Breakpoints of both CDFs. Between consecutive breakpoints F_mu is
    // constant and F_rho is affine, so |F_mu - F_rho| integrates exactly.
    std::vector<double> xs(rho.breaks);
    for (std::size_t i : order) xs.push_back(mu.points[i].x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double total = 0.0;
    double f_mu = 0.0;
    std::size_t next_atom = 0;
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const double a = xs[s];
        const double b = xs[s + 1];
        while (next_atom < order.size() && mu.points[order[next_atom]].x <= a) {
            f_mu += mu.weights[order[next_atom]];
            ++next_atom;
        }
        const double g0 = f_mu - rho.cdf(a);
        const double g1 = f_mu - rho.cdf(b);
        const double len = b - a;
        if ((g0 >= 0.0 && g1 >= 0.0) || (g0 <= 0.0 && g1 <= 0.0)) {
            total += 0.5 * std::abs(g0 + g1) * len;
        } else {
            // Sign change: two triangles meeting at the root.
            const double root = len * g0 / (g0 - g1);
            total += 0.5 * std::abs(g0) * root + 0.5 * std::abs(g1) * (len - root);
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Network simplex
// ---------------------------------------------------------------------------

LpResult w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LpOptions& opt) {
    require_same_dim(mu, nu);
    mu.validate();
    nu.validate();
    const Compacted a = compact(mu);
    const Compacted b = compact(nu);
    const std::size_t arcs = a.index.size() * b.index.size();
    if (arcs > opt.max_arcs) {
        throw ResourceError("transport problem needs " + std::to_string(arcs) + " arcs, budget is " +
                            std::to_string(opt.max_arcs) + "; subsample the measures or raise the budget");
    }

    detail::TransportSimplex simplex(a.weight, b.weight, [&](std::size_t i, std::size_t j) {
        return norm(mu.points[a.index[i]] - nu.points[b.index[j]]);
    });
    LpResult result;
    result.pivots = simplex.run();
    for (std::size_t i = 0; i < a.index.size(); ++i) {
        for (std::size_t j = 0; j < b.index.size(); ++j) {
            const double f = simplex.flow(i, j);
            if (f > 0.0) result.plan.entries.push_back({a.index[i], b.index[j], f});
        }
    }
    result.plan.cost = simplex.total_cost();
    result.distance = result.plan.cost;
    return result;
}

DualCertificate certify_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const TransportPlan& plan) {
    require_same_dim(mu, nu);
    const std::size_t n1 = mu.size();
    const std::size_t n2 = nu.size();
    std::vector<std::vector<char>> used(n1, std::vector<char>(n2, 0));
    for (const PlanEntry& e : plan.entries) {
        if (e.mass > 0.0) used.at(e.source).at(e.target) = 1;
    }

    // Residual graph: source -> target with cost c for every pair, and
    // target -> source with cost -c where the plan ships mass. Distances
    // from a virtual node joined to everything with zero cost.
    std::vector<double> ds(n1, 0.0);
    std::vector<double> dt(n2, 0.0);
    const double tol = 1e-15;
    DualCertificate cert;
    bool changed = true;
    std::size_t iter = 0;
    const std::size_t max_iter = n1 + n2 + 1;
    while (changed && iter < max_iter) {
        changed = false;
        ++iter;
        for (std::size_t i = 0; i < n1; ++i) {
            for (std::size_t j = 0; j < n2; ++j) {
                const double c = norm(mu.points[i] - nu.points[j]);
                if (ds[i] + c < dt[j] - tol) {
                    dt[j] = ds[i] + c;
                    changed = true;
                }
                if (used[i][j] && dt[j] - c < ds[i] - tol) {
                    ds[i] = dt[j] - c;
                    changed = true;
                }
            }
        }
    }
    cert.negative_cycle = changed;

    // Potentials psi = ds, phi = dt satisfy phi_j - psi_i <= c_ij.
    double violation = 0.0;
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            violation = std::max(violation, dt[j] - ds[i] - norm(mu.points[i] - nu.points[j]));
        }
    }
    double dual = 0.0;
    for (std::size_t j = 0; j < n2; ++j) dual += nu.weights[j] * dt[j];
    for (std::size_t i = 0; i < n1; ++i) dual -= mu.weights[i] * ds[i];
    cert.max_violation = violation;
    // A violation of v lowers any feasible dual bound by at most v.
    cert.dual_value = dual - violation;
    cert.gap = cert.negative_cycle ? std::numeric_limits<double>::infinity() : plan.cost - cert.dual_value;
    cert.source_potential = std::move(ds);
    cert.target_potential = std::move(dt);
    return cert;
}

double w1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LpOptions& opt) {
    require_same_dim(mu, nu);
    if (mu.dim == 1) return w1_1d_discrete(mu, nu);
    return w1_lp(mu, nu, opt).distance;
}

SupResult sup_wasserstein_over_time(const std::vector<ParticleState>& a,
                                    const std::vector<ParticleState>& b, const LpOptions& opt) {
    if (a.size() != b.size() || a.empty()) throw MismatchError("trajectories have different time grids");
    SupResult r;
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (std::abs(a[s].t - b[s].t) > 1e-12 * std::max(1.0, std::abs(a[s].t))) {
            throw MismatchError("snapshot " + std::to_string(s) + " taken at different times");
        }
        const double w = w1_distance(DiscreteMeasure::from_particles(a[s]), DiscreteMeasure::from_particles(b[s]), opt);
        r.times.push_back(a[s].t);
        r.distances.push_back(w);
        if (s == 0 || w > r.max_distance) {
            r.max_distance = w;
            r.argmax_time = a[s].t;
        }
    }
    return r;
}

std::optional<double> RateTable::final_rate() const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->rate) return it->rate;
    }
    return std::nullopt;
}

bool RateTable::has_undefined_rate() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].rate) return true;
    }
    return false;
}

RateTable convergence_rates(const std::vector<double>& distances, int dim, const std::vector<int>& ks,
                            const std::vector<std::size_t>& ns) {
    if (distances.size() < 2) throw InvalidParameter("convergence rates need at least two distances");
    if (dim != 1 && dim != 2) throw InvalidParameter("rate dimension must be 1 or 2");
    RateTable t;
    t.dim = dim;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        RateRow row;
        row.k = i < ks.size() ? ks[i] : static_cast<int>(i) + 1;
        row.n = i < ns.size() ? ns[i] : 0;
        row.distance = distances[i];
        if (i > 0 && distances[i] > 0.0 && distances[i - 1] > 0.0) {
            row.rate = std::log2(std::abs(distances[i] / distances[i - 1])) / dim;
        }
        t.rows.push_back(row);
    }
    return t;
}

} // namespace sphw
