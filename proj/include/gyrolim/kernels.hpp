#pragma once

#include <cmath>
#include <stdexcept>

#include "gyrolim/grid.hpp"
#include "gyrolim/vec2.hpp"

namespace gyrolim {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// V(x) = -(1/2pi) log|x|, the Green function of -Laplace on the plane
inline double coulomb_potential(Vec2 r) {
    const double r2 = r.norm_sq();
    if (r2 == 0.0) throw std::domain_error("coulomb_potential: evaluation at the singularity r = 0");
    return -std::log(r2) / (2.0 * kTwoPi);
}

// grad V(x) = -x / (2pi |x|^2)
inline Vec2 coulomb_gradient(Vec2 r) {
    const double r2 = r.norm_sq();
    if (r2 == 0.0) throw std::domain_error("coulomb_gradient: evaluation at the singularity r = 0");
    const double s = 1.0 / (kTwoPi * r2);
    return {-r.x * s, -r.y * s};
}

// K(x) = (1/2pi) x^perp / |x|^2; satisfies K = -(grad V)^perp and K(x).x = 0
inline Vec2 biot_savart_kernel(Vec2 r) {
    const double r2 = r.norm_sq();
    if (r2 == 0.0) throw std::domain_error("biot_savart_kernel: evaluation at the singularity r = 0");
    const double s = 1.0 / (kTwoPi * r2);
    return {-r.y * s, r.x * s};
}

// G_a: centered Gaussian density on R^2 with covariance a*I
inline double gaussian_density(Vec2 r, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("gaussian_density: covariance scale must be positive");
    return std::exp(-r.norm_sq() / (2.0 * a)) / (kTwoPi * a);
}

// centered Gaussian density on R^d (d = 2 or 4) with covariance a*I
inline double gaussian_density_nd(double dist_sq, double a, int d) {
    if (!(a > 0.0)) throw std::invalid_argument("gaussian_density_nd: covariance scale must be positive");
    return std::exp(-dist_sq / (2.0 * a)) / std::pow(kTwoPi * a, 0.5 * d);
}

// Exact average of V over the h x h cell centered at the singularity.
// With a = h/2:  mean of log|r| over [-a,a]^2 = log(a*sqrt(2)) - 3/2 + pi/4.
inline double coulomb_cell_average(double h) {
    const double a = 0.5 * h;
    const double mean_log = std::log(a * std::sqrt(2.0)) - 1.5 + 0.25 * kPi;
    return -mean_log / kTwoPi;
}

// ||u||_inf <= 2 ||omega||_inf + (1/2pi) ||omega||_1, from the near/far
// splitting of the Biot-Savart kernel (near part |y| <= 2 where
// |K| <= 1/(2pi |y|), far part |y| >= 1 where |K| <= 1/2pi).
inline double velocity_sup_bound(const ScalarGrid& omega) {
    return 2.0 * omega.max_abs() + omega.norm_l1() / kTwoPi;
}

} // namespace gyrolim
