#include "sphw/init.hpp"

#include "sphw/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace sphw {

Box Box::unit(int dim) { return Box{dim, {0.0, 0.0}, {1.0, dim == 1 ? 0.0 : 1.0}}; }

double Box::volume() const {
    const double wx = hi.x - lo.x;
    return dim == 1 ? wx : wx * (hi.y - lo.y);
}

bool Box::contains(const Vec2& x) const {
    if (x.x < lo.x || x.x > hi.x) return false;
    if (dim == 1) return x.y == 0.0;
    return x.y >= lo.y && x.y <= hi.y;
}

void Box::validate() const {
    if (dim != 1 && dim != 2) throw InvalidParameter("box dimension must be 1 or 2");
    if (!(hi.x > lo.x)) throw InvalidParameter("box must have positive width");
    if (dim == 2 && !(hi.y > lo.y)) throw InvalidParameter("box must have positive height");
}

GridDensity GridDensity::uniform(const Box& box) {
    return GridDensity{box, 1, 1, {1.0 / box.volume()}};
}

void GridDensity::validate() const {
    box.validate();
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
        throw InvalidParameter("density grid shape does not match its values");
    }
    if (box.dim == 1 && ny != 1) throw InvalidParameter("1D density grid must have ny = 1");
    double mass = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("density values must be nonnegative");
        mass += v;
    }
    mass *= box.volume() / static_cast<double>(values.size());
    if (std::abs(mass - 1.0) > 1e-12) {
        throw InvalidParameter("initial density integrates to " + std::to_string(mass) + ", expected 1");
    }
}

double GridDensity::at(const Vec2& x) const {
    if (!box.contains(x) && !(box.dim == 1 && x.x >= box.lo.x && x.x <= box.hi.x)) return 0.0;
    const double fx = (x.x - box.lo.x) / (box.hi.x - box.lo.x);
    const int ix = std::min(nx - 1, static_cast<int>(fx * nx));
    int iy = 0;
    if (box.dim == 2) {
        const double fy = (x.y - box.lo.y) / (box.hi.y - box.lo.y);
        iy = std::min(ny - 1, static_cast<int>(fy * ny));
    }
    return values[static_cast<std::size_t>(iy) * nx + ix];
}

double GridDensity::mass_in(const Vec2& a, const Vec2& b) const {
    const double cw = (box.hi.x - box.lo.x) / nx;
    const double ch = box.dim == 2 ? (box.hi.y - box.lo.y) / ny : 1.0;
    auto overlap = [](double a0, double a1, double b0, double b1) {
        return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
    };
    double m = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double y0 = box.lo.y + iy * ch;
        const double oy = box.dim == 2 ? overlap(a.y, b.y, y0, y0 + ch) : 1.0;
        if (oy == 0.0) continue;
        for (int ix = 0; ix < nx; ++ix) {
            const double x0 = box.lo.x + ix * cw;
            const double ox = overlap(a.x, b.x, x0, x0 + cw);
            m += values[static_cast<std::size_t>(iy) * nx + ix] * ox * oy;
        }
    }
    return m;
}

PiecewiseConstantDensity1D GridDensity::to_1d() const {
    if (box.dim != 1) throw MismatchError("to_1d requires a one-dimensional density");
    PiecewiseConstantDensity1D d;
    const double cw = (box.hi.x - box.lo.x) / nx;
    for (int i = 0; i <= nx; ++i) d.breaks.push_back(i == nx ? box.hi.x : box.lo.x + i * cw);
    d.values = values;
    return d;
}

namespace velocity_fields {
VelocityField zero() {
    return [](const Vec2&) { return Vec2{}; };
}
VelocityField rotation() {
    return [](const Vec2& x) { return Vec2{-x.y, x.x}; };
}
} // namespace velocity_fields

double InitialSpec::particle_volume() const { return domain().volume() / static_cast<double>(n); }

void InitialSpec::validate() const {
    if (dim != 1 && dim != 2) throw InvalidParameter("dimension must be 1 or 2");
    if (density.box.dim != dim) throw InvalidParameter("density dimension does not match spec dimension");
    density.validate();
    if (n < 1) throw InvalidParameter("particle count must be at least 1");
    if (!velocity) throw InvalidParameter("velocity field is not set");
}

std::size_t integer_root(std::size_t n, int dim) {
    if (dim == 1) return n;
    auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    for (std::size_t c = r > 0 ? r - 1 : 0; c <= r + 1; ++c) {
        if (c * c == n) return c;
    }
    return 0;
}

namespace {

Vec2 initial_velocity(const InitialSpec& spec, const Vec2& x) {
    Vec2 v = spec.velocity(x);
    if (spec.dim == 1) v.y = 0.0;
    return v;
}

} // namespace

ParticleState equipartition(const InitialSpec& spec) {
    spec.validate();
    const Box& box = spec.domain();
    ParticleState p;
    p.dim = spec.dim;

    if (spec.dim == 1) {
        const std::size_t n = spec.n;
        const double width = box.hi.x - box.lo.x;
        for (std::size_t i = 1; i <= n; ++i) {
            const double a = box.lo.x + width * static_cast<double>(i - 1) / static_cast<double>(n);
            const double b = i == n ? box.hi.x : box.lo.x + width * static_cast<double>(i) / static_cast<double>(n);
            const double x = box.lo.x + width * (static_cast<double>(i) / static_cast<double>(n) -
                                                 1.0 / (2.0 * static_cast<double>(n)));
            const double m = spec.density.mass_in({a, 0.0}, {b, 0.0});
            if (m <= 0.0) continue; // empty cells carry no particle
            p.pos.push_back({x, 0.0});
            p.mass.push_back(m);
        }
    } else {
        const std::size_t k = integer_root(spec.n, 2);
        if (k == 0) {
            throw InvalidParameter("2D equipartition needs a perfect-square particle count, got " +
                                   std::to_string(spec.n));
        }
        const double v0 = spec.particle_volume();
        const double wx = (box.hi.x - box.lo.x) / static_cast<double>(k);
        const double wy = (box.hi.y - box.lo.y) / static_cast<double>(k);
        for (std::size_t ix = 0; ix < k; ++ix) {
            for (std::size_t iy = 0; iy < k; ++iy) {
                const Vec2 x{box.lo.x + (static_cast<double>(ix) + 0.5) * wx,
                             box.lo.y + (static_cast<double>(iy) + 0.5) * wy};
                const double m = spec.density.at(x) * v0;
                if (m <= 0.0) continue;
                p.pos.push_back(x);
                p.mass.push_back(m);
            }
        }
    }
    if (p.mass.empty()) throw InvalidParameter("initial density is zero at every cell");
    const double total = p.total_mass();
    if (total != 1.0) {
        for (double& m : p.mass) m /= total;
    }
    p.vel.reserve(p.size());
    for (const Vec2& x : p.pos) p.vel.push_back(initial_velocity(spec, x));
    return p;
}

ParticleState sample_iid(const InitialSpec& spec, std::uint64_t seed) {
    spec.validate();
    const GridDensity& g = spec.density;
    const Box& box = g.box;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Inverse CDF over cell masses, then uniform inside the chosen cell.
    std::vector<double> cumulative(g.values.size());
    double acc = 0.0;
    for (std::size_t c = 0; c < g.values.size(); ++c) {
        acc += g.values[c];
        cumulative[c] = acc;
    }
    const double cw = (box.hi.x - box.lo.x) / g.nx;
    const double ch = spec.dim == 2 ? (box.hi.y - box.lo.y) / g.ny : 0.0;

    ParticleState p;
    p.dim = spec.dim;
    p.mass.assign(spec.n, 1.0 / static_cast<double>(spec.n));
    p.pos.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double u = unit(rng) * acc;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t c = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                                    g.values.size() - 1);
        const std::size_t ix = c % static_cast<std::size_t>(g.nx);
        const std::size_t iy = c / static_cast<std::size_t>(g.nx);
        const double x = std::min(box.hi.x, box.lo.x + (static_cast<double>(ix) + unit(rng)) * cw);
        double y = 0.0;
        if (spec.dim == 2) y = std::min(box.hi.y, box.lo.y + (static_cast<double>(iy) + unit(rng)) * ch);
        p.pos.push_back({x, y});
    }
    p.vel.reserve(p.size());
    for (const Vec2& x : p.pos) p.vel.push_back(initial_velocity(spec, x));
    return p;
}

ParticleState make_initial_state(const InitialSpec& spec) {
    return spec.mode == InitMode::Equipartition ? equipartition(spec) : sample_iid(spec, spec.seed);
}

double select_h(const InitialSpec& spec, const SmoothingLength& mode) {
    if (!(mode.value > 0.0) || !std::isfinite(mode.value)) {
        throw InvalidParameter("smoothing length parameter must be positive");
    }
    if (mode.kind == SmoothingLength::Kind::Fixed) return mode.value;
    if (mode.value < 1.2 || mode.value > 1.5) {
        spdlog::warn("smoothing factor epsilon = {} outside the customary range [1.2, 1.5]", mode.value);
    }
    return mode.value * std::pow(spec.particle_volume(), 1.0 / spec.dim);
}

InitialSpec preset(std::string_view name, std::size_t n) {
    InitialSpec s;
    s.n = n;
    if (name == "uniform_box_1d") {
        s.dim = 1;
        s.density = GridDensity::uniform(Box::unit(1));
        s.velocity = velocity_fields::zero();
    } else if (name == "rotating_square_2d") {
        s.dim = 2;
        s.density = GridDensity::uniform(Box::unit(2));
        s.velocity = velocity_fields::rotation();
    } else if (name == "morse_cloud_2d") {
        s.dim = 2;
        s.density = GridDensity::uniform(Box::unit(2));
        s.velocity = velocity_fields::zero();
    } else {
        throw InvalidParameter("unknown initial preset '" + std::string(name) + "'");
    }
    return s;
}

} // namespace sphw
