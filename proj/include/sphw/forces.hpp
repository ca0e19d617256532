#pragma once

#include "sphw/vec.hpp"

#include <functional>
#include <optional>

namespace sphw {

/// Polytropic equation of state P(rho) = K rho^gamma. The internal-energy
/// derivative is then dF/drho = P / rho^2 = K rho^(gamma - 2).
struct EosPolytropic {
    double gamma = 2.0;
    double k_eos = 1.0;

    void validate() const;
};

/// Pressure function F_theta of the unified scheme:
///   theta = 1:  F_1(rho) = K rho^(gamma-2)
///   theta = 0:  F_0(rho) = (1/rho) d/drho (rho^2 F_1) = K gamma rho^(gamma-2)
/// Throws SingularityError for rho = 0 when gamma < 2.
double f_theta(const EosPolytropic& eos, int theta, double rho);

/// Derivative of F_theta with respect to rho (used for Lipschitz constants).
double f_theta_derivative(const EosPolytropic& eos, int theta, double rho);

/// Morse pair interaction U(r) = C_r exp(-r/l_r) - C_a exp(-r/l_a), with a
/// quintic smoothstep taper below r_cut so that the force is C^2 and K(0) = 0.
struct MorseInteraction {
    double c_a = 2.0;
    double c_r = 1.5;
    double l_a = 1.0;
    double l_r = 2.0;
    double r_cut = 0.1;

    void validate() const;

    double potential(double r) const;
    /// dU/dr
    double potential_derivative(double r) const;
    /// sup over x of |K(x)|, located by dense sampling plus golden-section refinement.
    double force_sup() const;
};

/// Quintic smoothstep s(u) = u^3 (10 - 15u + 6u^2), clamped to [0, 1].
double smoothstep5(double u);

/// Force per unit mass K(x) = -U'(|x|) psi(|x|) x/|x|.
Vec2 morse_force(const MorseInteraction& m, const Vec2& x);

/// External potential V with its gradient. grad_sup is an upper bound for
/// |grad V| (infinity when unbounded), used only by the support diagnostic.
struct ExternalPotential {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> gradient;
    double grad_sup = 0.0;
    bool is_zero = true;

    static ExternalPotential zero();
    /// V(y) = (stiffness/2) |y|^2
    static ExternalPotential harmonic(double stiffness = 1.0);
};

/// Drag coefficient field eta(y) >= 0. Constants take a fast path.
struct DragField {
    double constant = 0.0;
    std::function<double(const Vec2&)> field;
    /// sup of eta over space
    double sup = 0.0;

    static DragField uniform(double eta);
    static DragField from_function(std::function<double(const Vec2&)> f, double sup);

    double operator()(const Vec2& y) const { return field ? field(y) : constant; }
    bool is_uniform() const { return !field; }
};

/// Complete right-hand-side model. Without an equation of state the pressure
/// term is absent (the pure interaction-drag experiment).
struct ForceModel {
    int theta = 1;
    std::optional<EosPolytropic> eos = EosPolytropic{};
    ExternalPotential v_ext = ExternalPotential::zero();
    DragField eta = DragField::uniform(0.0);
    std::optional<MorseInteraction> interaction;

    void validate() const;
};

/// -grad V(y) - eta(y) u; pressure and interaction are assembled in sph_core.
Vec2 external_accel(const ForceModel& fm, const Vec2& y, const Vec2& u);

} // namespace sphw
