#pragma once

#include "sphw/vec.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace sphw {

enum class KernelFamily {
    Gaussian1D,     ///< (1/(h sqrt(pi))) exp(-x^2/h^2), unbounded support
    WendlandCubic2D ///< C (1 + 3q/2)(2 - q)^3 for q = |x|/h <= 2, zero beyond
};

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Harness-only fault injection used to check that the verification suite
/// notices a broken kernel gradient. Never enabled by production code paths.
enum class GradientFault {
    None,
    FlipSignForNegativeX ///< gradient becomes even instead of odd
};

/**
 * @brief Radial smoothing kernel W_h.
 *
 * Immutable after construction. Values and gradients are analytic; the
 * Wendland normalization constant is chosen so the kernel integrates to one
 * over the plane (the bare 1/8 prefactor integrates to 0.8*pi*h^2 instead).
 */
class Kernel {
public:
    /// Gaussian on the real line. A positive cutoff truncates the support
    /// (not normalized afterwards); zero keeps the exact full-support form.
    static Kernel gaussian_1d(double h, double cutoff = 0.0);
    static Kernel wendland_cubic_2d(double h);
    static Kernel make(KernelFamily family, double h);

    /// Same kernel with its prefactor replaced; used to demonstrate the
    /// normalization defect of the unscaled Wendland formula.
    Kernel with_norm_const(double norm_const) const;
    Kernel with_fault(GradientFault fault) const;

    KernelFamily family() const noexcept { return family_; }
    double h() const noexcept { return h_; }
    int dim() const noexcept { return dim_; }
    double norm_const() const noexcept { return norm_const_; }

    /// Radius beyond which value and gradient vanish; infinity for the
    /// untruncated Gaussian.
    double support_radius() const noexcept;
    bool has_compact_support() const noexcept;

    double value(const Vec2& x) const noexcept;
    Vec2 gradient(const Vec2& x) const noexcept;

    /// sup |W_h| and sup |grad W_h| over the whole space, in closed form.
    double max_value() const noexcept;
    double max_gradient_norm() const noexcept;

private:
    Kernel(KernelFamily family, double h, int dim, double norm_const, double cutoff);

    KernelFamily family_;
    double h_;
    int dim_;
    double norm_const_;
    double cutoff_;
    GradientFault fault_ = GradientFault::None;
};

/// Default absolute tolerance for normalization residuals.
inline constexpr double kNormalizationTolerance = 1e-6;

/// |integral of W_h - 1| by adaptive quadrature (Gauss-Kronrod on the half
/// line for the Gaussian, radial Gauss-Kronrod for Wendland).
double kernel_normalization_residual(const Kernel& k);

// Defined inline because they sit in the innermost pair loops.
inline double Kernel::value(const Vec2& x) const noexcept {
    const double r2 = norm2(x);
    switch (family_) {
    case KernelFamily::Gaussian1D:
        if (cutoff_ > 0.0 && r2 > cutoff_ * cutoff_) return 0.0;
        return norm_const_ * std::exp(-r2 / (h_ * h_));
    case KernelFamily::WendlandCubic2D: {
        const double q = std::sqrt(r2) / h_;
        if (q >= 2.0) return 0.0;
        const double t = 2.0 - q;
        return norm_const_ * (1.0 + 1.5 * q) * t * t * t;
    }
    }
    return 0.0;
}

inline Vec2 Kernel::gradient(const Vec2& x) const noexcept {
    const double r2 = norm2(x);
    Vec2 g;
    switch (family_) {
    case KernelFamily::Gaussian1D:
        if (cutoff_ > 0.0 && r2 > cutoff_ * cutoff_) return {};
        g = (-2.0 * norm_const_ * std::exp(-r2 / (h_ * h_)) / (h_ * h_)) * x;
        break;
    case KernelFamily::WendlandCubic2D: {
        // dW/dq = -6 C q (2 - q)^2, and dq/dx = x / (|x| h).
        const double q = std::sqrt(r2) / h_;
        if (q >= 2.0) return {};
        const double t = 2.0 - q;
        g = (-6.0 * norm_const_ * t * t / (h_ * h_)) * x;
        break;
    }
    }
    if (fault_ == GradientFault::FlipSignForNegativeX && x.x < 0.0) g = -g;
    return g;
}

} // namespace sphw
