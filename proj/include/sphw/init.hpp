#pragma once

#include "sphw/particles.hpp"
#include "sphw/transport.hpp"
#include "sphw/vec.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sphw {

/// Axis-aligned box; in 1D only the x extent is used.
struct Box {
    int dim = 1;
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};

    static Box unit(int dim);
    double volume() const;
    bool contains(const Vec2& x) const;
    void validate() const;
};

/// Density that is constant on each cell of an nx-by-ny grid over a box
/// (ny = 1 in 1D). Values are per unit volume.
struct GridDensity {
    Box box;
    int nx = 1;
    int ny = 1;
    std::vector<double> values; ///< row-major, index iy * nx + ix

    static GridDensity uniform(const Box& box);
    void validate() const;
    double at(const Vec2& x) const;
    /// Exact mass of the sub-box [a, b] (intersected with the domain).
    double mass_in(const Vec2& a, const Vec2& b) const;
    PiecewiseConstantDensity1D to_1d() const;
};

using VelocityField = std::function<Vec2(const Vec2&)>;

namespace velocity_fields {
VelocityField zero();
/// Rigid rotation about the origin, v = (-y, x).
VelocityField rotation();
} // namespace velocity_fields

enum class InitMode { Equipartition, Iid };

struct InitialSpec {
    int dim = 1;
    GridDensity density = GridDensity::uniform(Box::unit(1));
    std::size_t n = 1;
    VelocityField velocity = velocity_fields::zero();
    InitMode mode = InitMode::Equipartition;
    std::uint64_t seed = 0;

    const Box& domain() const { return density.box; }
    /// Representative particle volume |domain| / n.
    double particle_volume() const;
    void validate() const;
};

/// Cell-midpoint construction. In 1D each point carries the exact mass of
/// its cell; in 2D (n must be a perfect square) masses are rho0(x_i) V0,
/// renormalized to unit total.
ParticleState equipartition(const InitialSpec& spec);

/// n i.i.d. draws from the density, weights 1/n, reproducible per seed.
ParticleState sample_iid(const InitialSpec& spec, std::uint64_t seed);

/// Dispatches on spec.mode.
ParticleState make_initial_state(const InitialSpec& spec);

struct SmoothingLength {
    enum class Kind { Fixed, Scaled } kind = Kind::Fixed;
    double value = 1.0; ///< h for Fixed, epsilon for Scaled

    static SmoothingLength fixed(double h) { return {Kind::Fixed, h}; }
    static SmoothingLength scaled(double epsilon) { return {Kind::Scaled, epsilon}; }
};

/// Fixed: h as given. Scaled: epsilon * V0^(1/d); warns when epsilon lies
/// outside the customary [1.2, 1.5].
double select_h(const InitialSpec& spec, const SmoothingLength& mode);

/// Named presets: "uniform_box_1d", "rotating_square_2d", "morse_cloud_2d".
InitialSpec preset(std::string_view name, std::size_t n);

/// Integer root r with r^dim == n, or 0 if n is not a perfect power.
std::size_t integer_root(std::size_t n, int dim);

} // namespace sphw
