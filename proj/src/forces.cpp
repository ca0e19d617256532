#include "sphw/forces.hpp"

#include "sphw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sphw {

void EosPolytropic::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidParameter("gamma must be positive, got " + std::to_string(gamma));
    }
    if (!(k_eos > 0.0) || !std::isfinite(k_eos)) {
        throw InvalidParameter("k_eos must be positive, got " + std::to_string(k_eos));
    }
}

double f_theta(const EosPolytropic& eos, int theta, double rho) {
    if (theta != 0 && theta != 1) throw InvalidParameter("theta must be 0 or 1");
    const double exponent = eos.gamma - 2.0;
    if (exponent < 0.0 && rho <= 0.0) {
        throw SingularityError("pressure function singular at rho = " + std::to_string(rho) +
                               " for gamma = " + std::to_string(eos.gamma));
    }
    const double base = eos.k_eos * std::pow(rho, exponent);
    return theta == 1 ? base : eos.gamma * base;
}

double f_theta_derivative(const EosPolytropic& eos, int theta, double rho) {
    if (theta != 0 && theta != 1) throw InvalidParameter("theta must be 0 or 1");
    const double exponent = eos.gamma - 2.0;
    if (exponent == 0.0) return 0.0;
    if (exponent < 1.0 && rho <= 0.0) {
        throw SingularityError("pressure function derivative singular at rho = 0");
    }
    const double base = eos.k_eos * exponent * std::pow(rho, exponent - 1.0);
    return theta == 1 ? base : eos.gamma * base;
}

void MorseInteraction::validate() const {
    for (double v : {c_a, c_r, l_a, l_r, r_cut}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidParameter("Morse parameters must be strictly positive");
        }
    }
}

double MorseInteraction::potential(double r) const {
    return c_r * std::exp(-r / l_r) - c_a * std::exp(-r / l_a);
}

double MorseInteraction::potential_derivative(double r) const {
    return -(c_r / l_r) * std::exp(-r / l_r) + (c_a / l_a) * std::exp(-r / l_a);
}

double smoothstep5(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

Vec2 morse_force(const MorseInteraction& m, const Vec2& x) {
    const double r = norm(x);
    if (r == 0.0) return {};
    const double taper = r < m.r_cut ? smoothstep5(r / m.r_cut) : 1.0;
    return (-m.potential_derivative(r) * taper / r) * x;
}

double MorseInteraction::force_sup() const {
    auto magnitude = [&](double r) {
        const double taper = r < r_cut ? smoothstep5(r / r_cut) : 1.0;
        return std::abs(potential_derivative(r)) * taper;
    };
    // Both exponentials decay, so the supremum sits within a few ranges of
    // the origin; sample densely, then refine the best bracket.
    const double r_max = 100.0 * std::max({l_a, l_r, r_cut});
    constexpr int samples = 200000;
    const double dr = r_max / samples;
    double best = 0.0;
    int best_i = 0;
    for (int i = 1; i <= samples; ++i) {
        const double v = magnitude(i * dr);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    double a = std::max(0.0, (best_i - 1) * dr);
    double b = (best_i + 1) * dr;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (magnitude(c) > magnitude(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return std::max(best, magnitude(0.5 * (a + b)));
}

ExternalPotential ExternalPotential::zero() {
    ExternalPotential v;
    v.value = [](const Vec2&) { return 0.0; };
    v.gradient = [](const Vec2&) { return Vec2{}; };
    v.grad_sup = 0.0;
    v.is_zero = true;
    return v;
}

ExternalPotential ExternalPotential::harmonic(double stiffness) {
    ExternalPotential v;
    v.value = [stiffness](const Vec2& y) { return 0.5 * stiffness * norm2(y); };
    v.gradient = [stiffness](const Vec2& y) { return stiffness * y; };
    v.grad_sup = std::numeric_limits<double>::infinity();
    v.is_zero = false;
    return v;
}

DragField DragField::uniform(double eta) {
    if (!(eta >= 0.0)) throw InvalidParameter("drag coefficient must be nonnegative");
    DragField d;
    d.constant = eta;
    d.sup = eta;
    return d;
}

DragField DragField::from_function(std::function<double(const Vec2&)> f, double sup) {
    DragField d;
    d.field = std::move(f);
    d.sup = sup;
    return d;
}

void ForceModel::validate() const {
    if (theta != 0 && theta != 1) {
        throw InvalidParameter("theta must be 0 or 1, got " + std::to_string(theta));
    }
    if (eos) eos->validate();
    if (interaction) interaction->validate();
    if (eta.is_uniform() && !(eta.constant >= 0.0)) {
        throw InvalidParameter("drag coefficient must be nonnegative");
    }
}

Vec2 external_accel(const ForceModel& fm, const Vec2& y, const Vec2& u) {
    Vec2 a = -fm.eta(y) * u;
    if (!fm.v_ext.is_zero) a -= fm.v_ext.gradient(y);
    return a;
}

} // namespace sphw
