#include "sphw/particles.hpp"

#include "sphw/errors.hpp"
#include "sphw/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sphw {

double ParticleState::total_mass() const noexcept {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
}

bool ParticleState::is_finite() const noexcept {
    for (std::size_t i = 0; i < size(); ++i) {
        if (!sphw::is_finite(pos[i]) || !sphw::is_finite(vel[i])) return false;
    }
    return true;
}

void ParticleState::validate() const {
    if (dim != 1 && dim != 2) throw InvalidParameter("particle dimension must be 1 or 2");
    if (pos.size() != mass.size() || vel.size() != mass.size()) {
        throw InvalidParameter("particle arrays have inconsistent sizes");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (!(mass[i] > 0.0) || !std::isfinite(mass[i])) {
            throw InvalidParameter("particle " + std::to_string(i) + " has nonpositive mass");
        }
        if (!sphw::is_finite(pos[i]) || !sphw::is_finite(vel[i])) {
            throw InvalidParameter("particle " + std::to_string(i) + " has non-finite state");
        }
        if (dim == 1 && (pos[i].y != 0.0 || vel[i].y != 0.0)) {
            throw InvalidParameter("1D particle " + std::to_string(i) +
                                   " has a nonzero second coordinate");
        }
    }
}

// ---------------------------------------------------------------------------
// Neighbor search
// ---------------------------------------------------------------------------

NeighborLists build_neighbor_lists_brute_force(const ParticleState& p, double cutoff) {
    if (!(cutoff > 0.0)) throw InvalidParameter("neighbor cutoff must be positive");
    const std::size_t n = p.size();
    const double c2 = cutoff * cutoff;
    NeighborLists nl;
    nl.cutoff_ = cutoff;
    nl.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (norm2(p.pos[i] - p.pos[j]) <= c2) nl.indices_.push_back(static_cast<std::uint32_t>(j));
        }
        nl.offsets_[i + 1] = nl.indices_.size();
    }
    return nl;
}

NeighborLists build_neighbor_lists(const ParticleState& p, double cutoff) {
    if (!(cutoff > 0.0)) throw InvalidParameter("neighbor cutoff must be positive");
    const std::size_t n = p.size();
    NeighborLists nl;
    nl.cutoff_ = cutoff;
    nl.offsets_.assign(n + 1, 0);
    if (n == 0) return nl;

    Vec2 lo = p.pos[0];
    Vec2 hi = p.pos[0];
    for (const Vec2& x : p.pos) {
        lo = {std::min(lo.x, x.x), std::min(lo.y, x.y)};
        hi = {std::max(hi.x, x.x), std::max(hi.y, x.y)};
    }
    // Cells at least one cutoff wide; widen them if the grid would be much
    // larger than the particle count.
    double cell = cutoff;
    auto cells_along = [&](double extent) {
        return static_cast<std::size_t>(std::floor(extent / cell)) + 1;
    };
    const std::size_t max_cells = 4 * n + 16;
    while (cells_along(hi.x - lo.x) * cells_along(hi.y - lo.y) > max_cells) cell *= 2.0;
    const std::size_t nx = cells_along(hi.x - lo.x);
    const std::size_t ny = cells_along(hi.y - lo.y);

    auto cell_of = [&](const Vec2& x) {
        const auto cx = std::min(nx - 1, static_cast<std::size_t>((x.x - lo.x) / cell));
        const auto cy = std::min(ny - 1, static_cast<std::size_t>((x.y - lo.y) / cell));
        return std::pair{cx, cy};
    };

    // Counting sort of particle indices by cell keeps each cell's members
    // in ascending index order.
    std::vector<std::size_t> head(nx * ny + 1, 0);
    std::vector<std::size_t> particle_cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [cx, cy] = cell_of(p.pos[i]);
        particle_cell[i] = cy * nx + cx;
        ++head[particle_cell[i] + 1];
    }
    for (std::size_t c = 0; c < nx * ny; ++c) head[c + 1] += head[c];
    std::vector<std::uint32_t> members(n);
    {
        std::vector<std::size_t> fill(head.begin(), head.end() - 1);
        for (std::size_t i = 0; i < n; ++i) members[fill[particle_cell[i]]++] = static_cast<std::uint32_t>(i);
    }

    const double c2 = cutoff * cutoff;
    nl.indices_.reserve(n * 16);
    std::vector<std::uint32_t> found;
    for (std::size_t i = 0; i < n; ++i) {
        found.clear();
        const std::size_t cx = particle_cell[i] % nx;
        const std::size_t cy = particle_cell[i] / nx;
        for (std::size_t yy = cy > 0 ? cy - 1 : 0; yy <= std::min(ny - 1, cy + 1); ++yy) {
            for (std::size_t xx = cx > 0 ? cx - 1 : 0; xx <= std::min(nx - 1, cx + 1); ++xx) {
                const std::size_t c = yy * nx + xx;
                for (std::size_t m = head[c]; m < head[c + 1]; ++m) {
                    const std::uint32_t j = members[m];
                    if (norm2(p.pos[i] - p.pos[j]) <= c2) found.push_back(j);
                }
            }
        }
        std::sort(found.begin(), found.end());
        nl.indices_.insert(nl.indices_.end(), found.begin(), found.end());
        nl.offsets_[i + 1] = nl.indices_.size();
    }
    return nl;
}

// ---------------------------------------------------------------------------
// Density and accelerations
// ---------------------------------------------------------------------------

namespace {

// Longest bounding-box side. A 3x3 block of cells one cutoff wide prunes
// nothing until the cloud spans more than three cutoffs.
double cloud_extent(const ParticleState& p) {
    if (p.size() == 0) return 0.0;
    Vec2 lo = p.pos[0];
    Vec2 hi = p.pos[0];
    for (const Vec2& x : p.pos) {
        lo = {std::min(lo.x, x.x), std::min(lo.y, x.y)};
        hi = {std::max(hi.x, x.x), std::max(hi.y, x.y)};
    }
    return std::max(hi.x - lo.x, hi.y - lo.y);
}

bool use_cell_list(const ParticleState& p, const Kernel& k, const EvalOptions& opt) {
    switch (opt.search) {
    case PairSearch::AllPairs:
        return false;
    case PairSearch::CellList:
        if (!k.has_compact_support()) {
            throw InvalidParameter("cell lists require a kernel with compact support");
        }
        return true;
    case PairSearch::Auto:
        return k.has_compact_support() && cloud_extent(p) > 3.0 * k.support_radius();
    }
    return false;
}

// Visits the neighbor indices of particle i in ascending order. Skipped
// pairs contribute exact zeros, so both paths sum identical terms.
template <class F>
void for_each_partner(std::size_t i, std::size_t n, const NeighborLists* nl, F&& f) {
    if (nl) {
        for (std::uint32_t j : (*nl)[i]) f(static_cast<std::size_t>(j));
    } else {
        for (std::size_t j = 0; j < n; ++j) f(j);
    }
}

} // namespace

DensityField compute_density(const ParticleState& p, const Kernel& k, const EvalOptions& opt) {
    const std::size_t n = p.size();
    DensityField d;
    d.rho.assign(n, 0.0);
    std::optional<NeighborLists> nl;
    if (use_cell_list(p, k, opt)) nl = build_neighbor_lists(p, k.support_radius());
    const NeighborLists* lists = nl ? &*nl : nullptr;
    parallel_for(n, opt.workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double s = 0.0;
            for_each_partner(i, n, lists, [&](std::size_t j) { s += p.mass[j] * k.value(p.pos[i] - p.pos[j]); });
            d.rho[i] = s;
        }
    });
    return d;
}

std::vector<double> density_at(const ParticleState& p, const Kernel& k, std::span<const Vec2> points) {
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t g = 0; g < points.size(); ++g) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) s += p.mass[j] * k.value(points[g] - p.pos[j]);
        out[g] = s;
    }
    return out;
}

std::vector<Vec2> conservative_accelerations(const ParticleState& p, const DensityField& d,
                                             const ForceModel& fm, const Kernel& k,
                                             const EvalOptions& opt) {
    const std::size_t n = p.size();
    std::vector<Vec2> a(n);

    std::vector<double> f;
    std::optional<NeighborLists> nl;
    if (fm.eos) {
        if (d.rho.size() != n) throw MismatchError("density field does not match particle count");
        f.resize(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = f_theta(*fm.eos, fm.theta, d.rho[i]);
        if (use_cell_list(p, k, opt)) nl = build_neighbor_lists(p, k.support_radius());
    }
    const NeighborLists* lists = nl ? &*nl : nullptr;
    const double theta = fm.theta;

    parallel_for(n, opt.workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t kk = b; kk < e; ++kk) {
            Vec2 acc;
            if (fm.eos) {
                const double fk = f[kk];
                for_each_partner(kk, n, lists, [&](std::size_t i) {
                    const Vec2 g = k.gradient(p.pos[kk] - p.pos[i]);
                    acc -= (p.mass[i] * (fk + theta * f[i])) * g;
                });
            }
            if (fm.interaction) {
                Vec2 ks;
                for (std::size_t i = 0; i < n; ++i) {
                    ks += p.mass[i] * morse_force(*fm.interaction, p.pos[kk] - p.pos[i]);
                }
                acc += ks;
            }
            if (!fm.v_ext.is_zero) acc -= fm.v_ext.gradient(p.pos[kk]);
            a[kk] = acc;
        }
    });
    if (p.dim == 1) {
        for (Vec2& v : a) v.y = 0.0;
    }
    return a;
}

std::vector<Vec2> compute_accelerations(const ParticleState& p, const DensityField& d,
                                        const ForceModel& fm, const Kernel& k,
                                        const EvalOptions& opt) {
    std::vector<Vec2> a = conservative_accelerations(p, d, fm, k, opt);
    for (std::size_t i = 0; i < p.size(); ++i) a[i] -= fm.eta(p.pos[i]) * p.vel[i];
    return a;
}

Vec2 momentum(const ParticleState& p) {
    Vec2 s;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.mass[i] * p.vel[i];
    return s;
}

double angular_momentum(const ParticleState& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.mass[i] * cross(p.pos[i], p.vel[i]);
    return s;
}

Vec2 total_force(const ParticleState& p, std::span<const Vec2> accel) {
    Vec2 s;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.mass[i] * accel[i];
    return s;
}

double total_torque(const ParticleState& p, std::span<const Vec2> accel) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.mass[i] * cross(p.pos[i], accel[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Support diagnostic
// ---------------------------------------------------------------------------

double SupportDiagnostic::radius(double t) const {
    if (!enabled) return std::numeric_limits<double>::infinity();
    return r0 + t * v0_sup + 0.5 * t * t * (m1 + grad_v_sup + interaction_sup);
}

SupportDiagnostic make_support_diagnostic(const ParticleState& p0, const ForceModel& fm,
                                          const Kernel& k, std::optional<double> user_m1) {
    SupportDiagnostic diag;
    diag.r0 = max_abs_position(p0);
    for (const Vec2& v : p0.vel) diag.v0_sup = std::max(diag.v0_sup, norm(v));
    diag.grad_v_sup = fm.v_ext.is_zero ? 0.0 : fm.v_ext.grad_sup;
    diag.interaction_sup = fm.interaction ? fm.interaction->force_sup() : 0.0;

    if (!fm.eos) {
        diag.m1 = 0.0;
    } else if (fm.theta == 1) {
        const EosPolytropic& eos = *fm.eos;
        if (eos.gamma < 2.0) {
            diag.enabled = false;
            diag.note = "F_1 is unbounded near zero density for gamma < 2; support bound unavailable";
            spdlog::warn("support diagnostic disabled: {}", diag.note);
            return diag;
        }
        // F_1(u) = K u^(gamma-2) is nondecreasing on [0, max W].
        const double wmax = k.max_value();
        diag.m2 = eos.k_eos * std::pow(wmax, eos.gamma - 2.0);
        if (eos.gamma == 2.0) {
            diag.m3 = 0.0;
        } else if (eos.gamma < 3.0) {
            diag.m3 = std::numeric_limits<double>::infinity();
        } else {
            diag.m3 = eos.k_eos * (eos.gamma - 2.0) * std::pow(wmax, eos.gamma - 3.0);
        }
        diag.m1 = 2.0 * diag.m2 * k.max_gradient_norm();
    } else if (user_m1) {
        diag.m1 = *user_m1;
    } else {
        diag.enabled = false;
        diag.note = "theta = 0 requires a user-supplied M1";
        spdlog::debug("support diagnostic disabled: {}", diag.note);
    }
    return diag;
}

bool check_support(const ParticleState& p, double bound) { return max_abs_position(p) <= bound; }

double max_abs_position(const ParticleState& p) {
    double r = 0.0;
    for (const Vec2& x : p.pos) r = std::max(r, norm(x));
    return r;
}

} // namespace sphw
