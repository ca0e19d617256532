#include "sphw/kernels.hpp"

#include "sphw/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace sphw {

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of (1 + 3q/2)(2 - q)^3 q dq over [0, 2] is 16/5, so the radial
// integral of the unscaled shape is 2*pi*16/5*h^2 = 6.4*pi*h^2.
double wendland_norm(double h) { return 1.0 / (6.4 * kPi * h * h); }

void require_positive_h(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidParameter("kernel smoothing length must be positive and finite, got " +
                               std::to_string(h));
    }
}

} // namespace

std::string_view to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::Gaussian1D:
        return "gaussian_1d";
    case KernelFamily::WendlandCubic2D:
        return "wendland_cubic_2d";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "gaussian_1d") return KernelFamily::Gaussian1D;
    if (name == "wendland_cubic_2d") return KernelFamily::WendlandCubic2D;
    throw InvalidParameter("unknown kernel family '" + std::string(name) + "'");
}

Kernel::Kernel(KernelFamily family, double h, int dim, double norm_const, double cutoff)
    : family_(family), h_(h), dim_(dim), norm_const_(norm_const), cutoff_(cutoff) {}

Kernel Kernel::gaussian_1d(double h, double cutoff) {
    require_positive_h(h);
    if (cutoff < 0.0) throw InvalidParameter("gaussian cutoff must be nonnegative");
    return Kernel(KernelFamily::Gaussian1D, h, 1, 1.0 / (h * std::sqrt(kPi)), cutoff);
}

Kernel Kernel::wendland_cubic_2d(double h) {
    require_positive_h(h);
    return Kernel(KernelFamily::WendlandCubic2D, h, 2, wendland_norm(h), 2.0 * h);
}

Kernel Kernel::make(KernelFamily family, double h) {
    return family == KernelFamily::Gaussian1D ? gaussian_1d(h) : wendland_cubic_2d(h);
}

Kernel Kernel::with_norm_const(double norm_const) const {
    Kernel k = *this;
    k.norm_const_ = norm_const;
    return k;
}

Kernel Kernel::with_fault(GradientFault fault) const {
    Kernel k = *this;
    k.fault_ = fault;
    return k;
}

double Kernel::support_radius() const noexcept {
    return cutoff_ > 0.0 ? cutoff_ : std::numeric_limits<double>::infinity();
}

bool Kernel::has_compact_support() const noexcept { return cutoff_ > 0.0; }

double Kernel::max_value() const noexcept { return value(Vec2{}); }

double Kernel::max_gradient_norm() const noexcept {
    switch (family_) {
    case KernelFamily::Gaussian1D:
        // |W'| = 2|x|/h^2 W is maximal at |x| = h / sqrt(2).
        return norm_const_ * std::sqrt(2.0) * std::exp(-0.5) / h_;
    case KernelFamily::WendlandCubic2D:
        // |grad W| = 6 C q (2 - q)^2 / h peaks at q = 2/3.
        return 6.0 * norm_const_ * (2.0 / 3.0) * (4.0 / 3.0) * (4.0 / 3.0) / h_;
    }
    return 0.0;
}

double kernel_normalization_residual(const Kernel& k) {
    using boost::math::quadrature::gauss_kronrod;
    const double h = k.h();
    double integral = 0.0;
    switch (k.family()) {
    case KernelFamily::Gaussian1D: {
        auto f = [&](double s) { return k.value(Vec2{s, 0.0}); };
        const double upper = k.has_compact_support() ? k.support_radius()
                                                     : std::numeric_limits<double>::infinity();
        integral = 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 15, 1e-14);
        break;
    }
    case KernelFamily::WendlandCubic2D: {
        auto f = [&](double r) { return 2.0 * kPi * r * k.value(Vec2{r, 0.0}); };
        integral = gauss_kronrod<double, 31>::integrate(f, 0.0, 2.0 * h, 10, 1e-14);
        break;
    }
    }
    return std::abs(integral - 1.0);
}

} // namespace sphw
