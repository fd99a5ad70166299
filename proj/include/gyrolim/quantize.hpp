#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gyrolim/convolve.hpp"
#include "gyrolim/euler.hpp"
#include "gyrolim/grid.hpp"
#include "gyrolim/kernels.hpp"
#include "gyrolim/vec2.hpp"

namespace gyrolim {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

struct PhasePoint {
    Vec2 q;
    Vec2 p;
};

struct WeightedPhasePoint {
    PhasePoint z;
    double w = 0.0;
};

// Finite arena for the quantized operators: tensor products of the 1D
// harmonic-oscillator eigenbasis at scale sqrt(hbar), per-axis degrees 0..M.
struct HermiteTruncation {
    double hbar = 0.1;
    int max_degree = 12;

    HermiteTruncation() = default;
    HermiteTruncation(double h, int m) : hbar(h), max_degree(m) {
        if (!(hbar > 0.0)) throw std::invalid_argument("HermiteTruncation: hbar must be positive");
        if (max_degree < 4) throw std::invalid_argument("HermiteTruncation: max degree must be >= 4");
    }

    int axis_size() const { return max_degree + 1; }
    int basis_size() const { return axis_size() * axis_size(); }
    int flat(int m1, int m2) const { return m1 * axis_size() + m2; }
};

// |z, hbar>(x) = (pi hbar)^{-d/4} exp(-|x-q|^2 / 2 hbar) exp(i p . x / hbar), d = 2
inline Complex coherent_state(const PhasePoint& z, double hbar, Vec2 x) {
    if (!(hbar > 0.0)) throw std::invalid_argument("coherent_state: hbar must be positive");
    const double amp = std::pow(kPi * hbar, -0.5) * std::exp(-(x - z.q).norm_sq() / (2.0 * hbar));
    const double phase = z.p.dot(x) / hbar;
    return {amp * std::cos(phase), amp * std::sin(phase)};
}

// |<z1|z2>|^2 = exp(-(|q1-q2|^2 + |p1-p2|^2) / 2 hbar)
inline double coherent_overlap_sq(const PhasePoint& a, const PhasePoint& b, double hbar) {
    return std::exp(-((a.q - b.q).norm_sq() + (a.p - b.p).norm_sq()) / (2.0 * hbar));
}

// 1D oscillator eigenfunction of degree n at scale sqrt(hbar)
inline double hermite_function(int n, double hbar, double x) {
    const double xi = x / std::sqrt(hbar);
    double f0 = std::pow(kPi * hbar, -0.25) * std::exp(-0.5 * xi * xi);
    if (n == 0) return f0;
    double f1 = xi * std::sqrt(2.0) * f0;
    for (int k = 1; k < n; ++k) {
        const double f2 = (xi * std::sqrt(2.0 / (k + 1.0))) * f1 - std::sqrt(k / (k + 1.0)) * f0;
        f0 = f1;
        f1 = f2;
    }
    return f1;
}

namespace detail {

// 1D coherent coefficients <phi_n | z> = e^{i p q / 2 hbar} e^{-|a|^2/2} a^n / sqrt(n!)
// with a = (q + i p) / sqrt(2 hbar)
inline VectorXcd coherent_coeffs_1d(double q, double p, double hbar, int max_degree) {
    const Complex alpha(q / std::sqrt(2.0 * hbar), p / std::sqrt(2.0 * hbar));
    const double phase = p * q / (2.0 * hbar);
    VectorXcd c(max_degree + 1);
    c(0) = std::exp(-0.5 * std::norm(alpha)) * Complex(std::cos(phase), std::sin(phase));
    for (int n = 0; n < max_degree; ++n) c(n + 1) = c(n) * alpha / std::sqrt(n + 1.0);
    return c;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// exact ladder matrix elements on the truncated 1D basis
inline MatrixXcd position_matrix_1d(const HermiteTruncation& t) {
    const int s = t.axis_size();
    MatrixXcd m = MatrixXcd::Zero(s, s);
    const double c = std::sqrt(0.5 * t.hbar);
    for (int n = 0; n + 1 < s; ++n) {
        m(n + 1, n) = c * std::sqrt(n + 1.0);
        m(n, n + 1) = c * std::sqrt(n + 1.0);
    }
    return m;
}

inline MatrixXcd momentum_matrix_1d(const HermiteTruncation& t) {
    const int s = t.axis_size();
    MatrixXcd m = MatrixXcd::Zero(s, s);
    const double c = std::sqrt(0.5 * t.hbar);
    for (int n = 0; n + 1 < s; ++n) {
        m(n + 1, n) = Complex(0.0, c * std::sqrt(n + 1.0));
        m(n, n + 1) = Complex(0.0, -c * std::sqrt(n + 1.0));
    }
    return m;
}

inline MatrixXcd position_sq_matrix_1d(const HermiteTruncation& t) {
    const int s = t.axis_size();
    MatrixXcd m = MatrixXcd::Zero(s, s);
    for (int n = 0; n < s; ++n) {
        m(n, n) = 0.5 * t.hbar * (2.0 * n + 1.0);
        if (n + 2 < s) {
            const double v = 0.5 * t.hbar * std::sqrt((n + 1.0) * (n + 2.0));
            m(n + 2, n) = v;
            m(n, n + 2) = v;
        }
    }
    return m;
}

inline MatrixXcd momentum_sq_matrix_1d(const HermiteTruncation& t) {
    const int s = t.axis_size();
    MatrixXcd m = MatrixXcd::Zero(s, s);
    for (int n = 0; n < s; ++n) {
        m(n, n) = 0.5 * t.hbar * (2.0 * n + 1.0);
        if (n + 2 < s) {
            const double v = -0.5 * t.hbar * std::sqrt((n + 1.0) * (n + 2.0));
            m(n + 2, n) = v;
            m(n, n + 2) = v;
        }
    }
    return m;
}

} // namespace detail

// 2D coherent coefficients on the tensor basis
inline VectorXcd coherent_coeffs(const PhasePoint& z, const HermiteTruncation& t) {
    const VectorXcd c1 = detail::coherent_coeffs_1d(z.q.x, z.p.x, t.hbar, t.max_degree);
    const VectorXcd c2 = detail::coherent_coeffs_1d(z.q.y, z.p.y, t.hbar, t.max_degree);
    VectorXcd c(t.basis_size());
    for (int a = 0; a < t.axis_size(); ++a)
        for (int b = 0; b < t.axis_size(); ++b) c(t.flat(a, b)) = c1(a) * c2(b);
    return c;
}

// OP_hbar^T(nu) = (2 pi hbar)^{-2} sum_j w_j |z_j><z_j| on the truncated basis
inline MatrixXcd toeplitz_matrix(const std::vector<WeightedPhasePoint>& atoms, const HermiteTruncation& t) {
    MatrixXcd op = MatrixXcd::Zero(t.basis_size(), t.basis_size());
    const double scale = 1.0 / std::pow(kTwoPi * t.hbar, 2);
    for (const WeightedPhasePoint& a : atoms) {
        if (a.w < 0.0) throw std::invalid_argument("toeplitz_matrix: negative symbol weight");
        if (a.w == 0.0) continue;
        const VectorXcd c = coherent_coeffs(a.z, t);
        op.noalias() += (scale * a.w) * (c * c.adjoint());
    }
    return op;
}

// |x|^2 as a matrix (exact band form on the tensor basis)
inline MatrixXcd position_sq_matrix(const HermiteTruncation& t) {
    const MatrixXcd x2 = detail::position_sq_matrix_1d(t);
    const MatrixXcd id = MatrixXcd::Identity(t.axis_size(), t.axis_size());
    return detail::kron(x2, id) + detail::kron(id, x2);
}

// -hbar^2 Lap as a matrix
inline MatrixXcd momentum_sq_matrix(const HermiteTruncation& t) {
    const MatrixXcd p2 = detail::momentum_sq_matrix_1d(t);
    const MatrixXcd id = MatrixXcd::Identity(t.axis_size(), t.axis_size());
    return detail::kron(p2, id) + detail::kron(id, p2);
}

// magnetic kinetic operator sum_k (-i hbar d_k + (x^perp)^k / 2 eps)^2
//   = |p|^2 + |x|^2 / 4 eps^2 + (x_1 p_2 - x_2 p_1) / eps
inline MatrixXcd kinetic_magnetic_matrix(const HermiteTruncation& t, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("kinetic_magnetic_matrix: eps must be positive");
    const MatrixXcd x = detail::position_matrix_1d(t);
    const MatrixXcd p = detail::momentum_matrix_1d(t);
    const MatrixXcd lz = detail::kron(x, p) - detail::kron(p, x);
    return momentum_sq_matrix(t) + position_sq_matrix(t) / (4.0 * eps * eps) + lz / eps;
}

// Toeplitz quantizations of the symbols 1, |q|^2, |p|^2 by phase-space
// quadrature (independent of the ladder forms). The 2D operators assemble
// from per-axis integrals by the tensor structure of coherent states.
struct QuadratureOps {
    MatrixXcd op_one;
    MatrixXcd op_q2;
    MatrixXcd op_p2;
};

inline QuadratureOps symbol_quadrature_ops(const HermiteTruncation& t, int points_per_axis = 360) {
    const int s = t.axis_size();
    const double alpha_reach = std::sqrt(2.0 * (t.max_degree + 1.0)) + 7.0;
    const double radius = std::sqrt(2.0 * t.hbar) * alpha_reach;
    const int np = points_per_axis;
    const double step = 2.0 * radius / np;

    // per-axis coefficient table at the quadrature nodes
    Eigen::MatrixXcd c(np * np, s);
    Eigen::VectorXd qv(np * np), pv(np * np);
    for (int i = 0; i < np; ++i) {
        const double q = -radius + (i + 0.5) * step;
        for (int j = 0; j < np; ++j) {
            const double p = -radius + (j + 0.5) * step;
            const int row = i * np + j;
            qv(row) = q;
            pv(row) = p;
            c.row(row) = detail::coherent_coeffs_1d(q, p, t.hbar, t.max_degree).transpose();
        }
    }
    const double w = step * step / (kTwoPi * t.hbar);
    auto axis_op = [&](const Eigen::VectorXd& f) -> MatrixXcd {
        return c.transpose() * (w * f.asDiagonal() * c.conjugate());
    };
    const MatrixXcd one_1d = axis_op(Eigen::VectorXd::Ones(np * np));
    const MatrixXcd q2_1d = axis_op(qv.array().square().matrix());
    const MatrixXcd p2_1d = axis_op(pv.array().square().matrix());

    QuadratureOps ops;
    ops.op_one = detail::kron(one_1d, one_1d);
    ops.op_q2 = detail::kron(q2_1d, one_1d) + detail::kron(one_1d, q2_1d);
    ops.op_p2 = detail::kron(p2_1d, one_1d) + detail::kron(one_1d, p2_1d);
    return ops;
}

// Interior-block residuals of the quadratic-symbol identities
//   OP(|q|^2) = |x|^2 + hbar I,   OP(|p|^2) = -hbar^2 Lap + hbar I,
// plus OP(1) = I; degrees above M-2 are excluded (quantization couples them
// to modes outside the truncation).
struct QuadraticSymbolReport {
    double err_q2 = 0.0;
    double err_p2 = 0.0;
    double err_one = 0.0;
};

inline QuadraticSymbolReport quadratic_symbol_identities(const HermiteTruncation& t,
                                                         int points_per_axis = 360) {
    const QuadratureOps ops = symbol_quadrature_ops(t, points_per_axis);
    const MatrixXcd id = MatrixXcd::Identity(t.basis_size(), t.basis_size());
    const MatrixXcd target_q = position_sq_matrix(t) + t.hbar * id;
    const MatrixXcd target_p = momentum_sq_matrix(t) + t.hbar * id;

    QuadraticSymbolReport rep;
    const int dmax = t.max_degree - 2;
    for (int a1 = 0; a1 <= dmax; ++a1)
        for (int a2 = 0; a2 <= dmax; ++a2)
            for (int b1 = 0; b1 <= dmax; ++b1)
                for (int b2 = 0; b2 <= dmax; ++b2) {
                    const int r = t.flat(a1, a2), cc = t.flat(b1, b2);
                    rep.err_q2 = std::max(rep.err_q2, std::abs(ops.op_q2(r, cc) - target_q(r, cc)));
                    rep.err_p2 = std::max(rep.err_p2, std::abs(ops.op_p2(r, cc) - target_p(r, cc)));
                    rep.err_one = std::max(rep.err_one, std::abs(ops.op_one(r, cc) - id(r, cc)));
                }
    return rep;
}

// trace((-i hbar d + x^perp/2 eps)^2 OP((2 pi hbar)^2 nu))
//   = int |p + q^perp/2 eps|^2 nu + (hbar/4 eps^2 + hbar) nu(total)
struct KineticTraceResult {
    double closed_form = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

inline KineticTraceResult kinetic_trace_identity(const std::vector<WeightedPhasePoint>& atoms, double eps,
                                                 const HermiteTruncation& t) {
    if (!(eps > 0.0)) throw std::invalid_argument("kinetic_trace_identity: eps must be positive");
    KineticTraceResult res;
    double total = 0.0;
    for (const WeightedPhasePoint& a : atoms) {
        if (a.w < 0.0) throw std::invalid_argument("kinetic_trace_identity: negative weight");
        const Vec2 drift = a.z.p + a.z.q.perp() / (2.0 * eps);
        if (!std::isfinite(drift.norm_sq()))
            throw std::invalid_argument("kinetic_trace_identity: non-finite second moment");
        res.closed_form += a.w * drift.norm_sq();
        total += a.w;
    }
    res.closed_form += (t.hbar / (4.0 * eps * eps) + t.hbar) * total;

    std::vector<WeightedPhasePoint> scaled = atoms;
    const double f = std::pow(kTwoPi * t.hbar, 2);
    for (WeightedPhasePoint& a : scaled) a.w *= f;
    const MatrixXcd op = toeplitz_matrix(scaled, t);
    const MatrixXcd k = kinetic_magnetic_matrix(t, eps);
    res.numeric = (k.array() * op.transpose().array()).sum().real();
    res.rel_error = std::abs(res.numeric - res.closed_form) / std::max(1e-300, std::abs(res.closed_form));
    return res;
}

// ---------------------------------------------------------------------------
// phase-space fields (4D tensor grids over q and p)

struct PhaseGridSpec {
    GridSpec q{1.0, 16};
    GridSpec p{1.0, 16};
};

struct PhaseField {
    PhaseGridSpec spec;
    std::vector<double> v;

    explicit PhaseField(const PhaseGridSpec& s)
        : spec(s),
          v(static_cast<std::size_t>(s.q.n) * s.q.n * s.p.n * s.p.n, 0.0) {}

    std::size_t index(int iq1, int iq2, int ip1, int ip2) const {
        const std::size_t nq = spec.q.n, np = spec.p.n;
        return ((static_cast<std::size_t>(iq1) * nq + iq2) * np + ip1) * np + ip2;
    }
    double& at(int iq1, int iq2, int ip1, int ip2) { return v[index(iq1, iq2, ip1, ip2)]; }
    double at(int iq1, int iq2, int ip1, int ip2) const { return v[index(iq1, iq2, ip1, ip2)]; }

    double integral() const {
        double s = 0.0;
        for (double x : v) s += x;
        return s * spec.q.cell_area() * spec.p.cell_area();
    }
    double min_value() const {
        double m = 1e300;
        for (double x : v) m = std::min(m, x);
        return m;
    }
};

namespace detail {

inline void require_resolves_hbar(const PhaseGridSpec& spec, double hbar) {
    const double limit = 0.25 * std::sqrt(hbar);
    if (spec.q.spacing() > limit || spec.p.spacing() > limit)
        throw std::invalid_argument("phase grid under-resolves hbar: spacing must be <= sqrt(hbar)/4 = " +
                                    std::to_string(limit));
}

} // namespace detail

// Wigner transform of OP_hbar^T(nu) for an atomic symbol, evaluated from the
// definition: the partial Fourier transform of the coherent kernel along the
// diagonal. The kernel factorizes per axis, so the y-integral splits into 1D
// quadratures.
inline PhaseField wigner_of_toeplitz(const std::vector<WeightedPhasePoint>& atoms, double hbar,
                                     const PhaseGridSpec& spec) {
    if (!(hbar > 0.0)) throw std::invalid_argument("wigner_of_toeplitz: hbar must be positive");
    detail::require_resolves_hbar(spec, hbar);
    PhaseField out(spec);
    const int nq = spec.q.n, np = spec.p.n;

    // y-quadrature for int exp(-hbar y^2/4) exp(i (p_at - xi) y) dy
    const double ry = 8.0 * std::sqrt(2.0 / hbar);
    double pmax = 0.0;
    for (const WeightedPhasePoint& a : atoms) pmax = std::max({pmax, std::abs(a.z.p.x), std::abs(a.z.p.y)});
    pmax += spec.p.half_width;
    const double dy = std::min(0.4, kPi / (4.0 * (pmax + 1.0)));
    const int ny = 2 * static_cast<int>(std::ceil(ry / dy));

    const double prefactor = std::pow(kTwoPi * hbar, -2) * std::pow(kTwoPi, -2) / (kPi * hbar);
    for (const WeightedPhasePoint& a : atoms) {
        if (a.w == 0.0) continue;
        // per-axis gaussian factors in q and fourier integrals in p
        std::vector<double> gq1(nq), gq2(nq);
        for (int i = 0; i < nq; ++i) {
            gq1[i] = std::exp(-(spec.q.coord(i) - a.z.q.x) * (spec.q.coord(i) - a.z.q.x) / hbar);
            gq2[i] = std::exp(-(spec.q.coord(i) - a.z.q.y) * (spec.q.coord(i) - a.z.q.y) / hbar);
        }
        std::vector<double> f1(np), f2(np);
        for (int j = 0; j < np; ++j) {
            const double d1 = a.z.p.x - spec.p.coord(j);
            const double d2 = a.z.p.y - spec.p.coord(j);
            double s1 = 0.0, s2 = 0.0;
            for (int m = 0; m < ny; ++m) {
                const double y = -ry + (m + 0.5) * (2.0 * ry / ny);
                const double g = std::exp(-hbar * y * y / 4.0);
                s1 += g * std::cos(d1 * y);
                s2 += g * std::cos(d2 * y);
            }
            f1[j] = s1 * (2.0 * ry / ny);
            f2[j] = s2 * (2.0 * ry / ny);
        }
        const double scale = prefactor * a.w;
        for (int i1 = 0; i1 < nq; ++i1)
            for (int i2 = 0; i2 < nq; ++i2) {
                const double gq = gq1[i1] * gq2[i2] * scale;
                if (gq == 0.0) continue;
                for (int j1 = 0; j1 < np; ++j1) {
                    const double gf = gq * f1[j1];
                    for (int j2 = 0; j2 < np; ++j2) out.at(i1, i2, j1, j2) += gf * f2[j2];
                }
            }
    }
    return out;
}

// G_{hbar/2}^{4} smoothing of a phase field (separable 1D passes)
inline PhaseField gaussian_smooth_phase(const PhaseField& in, double a) {
    PhaseField out = in;
    const int nq = in.spec.q.n, np = in.spec.p.n;

    auto smooth_axis = [&](int axis) {
        const GridSpec& g = axis < 2 ? in.spec.q : in.spec.p;
        const double h = g.spacing();
        const int reach = static_cast<int>(std::ceil(7.0 * std::sqrt(a) / h));
        std::vector<double> kernel(2 * reach + 1);
        for (int k = -reach; k <= reach; ++k)
            kernel[k + reach] = std::exp(-(k * h) * (k * h) / (2.0 * a)) / std::sqrt(kTwoPi * a) * h;
        PhaseField next = out;
        const int len = axis < 2 ? nq : np;
        for (std::size_t flat = 0; flat < out.v.size(); ++flat) {
            // decompose the flat index
            const std::size_t j2 = flat % np;
            const std::size_t j1 = (flat / np) % np;
            const std::size_t i2 = (flat / np / np) % nq;
            const std::size_t i1 = flat / np / np / nq;
            int idx[4] = {static_cast<int>(i1), static_cast<int>(i2), static_cast<int>(j1),
                          static_cast<int>(j2)};
            double s = 0.0;
            for (int k = -reach; k <= reach; ++k) {
                const int shifted = idx[axis] + k;
                if (shifted < 0 || shifted >= len) continue;
                int src[4] = {idx[0], idx[1], idx[2], idx[3]};
                src[axis] = shifted;
                s += kernel[k + reach] * out.at(src[0], src[1], src[2], src[3]);
            }
            next.v[flat] = s;
        }
        out = next;
    };
    for (int axis = 0; axis < 4; ++axis) smooth_axis(axis);
    return out;
}

inline PhaseField husimi_of_toeplitz(const std::vector<WeightedPhasePoint>& atoms, double hbar,
                                     const PhaseGridSpec& spec) {
    return gaussian_smooth_phase(wigner_of_toeplitz(atoms, hbar, spec), 0.5 * hbar);
}

// Husimi value of an operator given as a matrix on the truncated basis:
// (2 pi hbar)^{-2} <z| A |z>
inline double husimi_from_matrix(const MatrixXcd& a, const HermiteTruncation& t, const PhasePoint& z) {
    const VectorXcd c = coherent_coeffs(z, t);
    const Complex val = (c.adjoint() * a * c)(0, 0);
    return val.real() / std::pow(kTwoPi * t.hbar, 2);
}

// ---------------------------------------------------------------------------
// the initial-data construction: symbol nu_eps = omega(q) delta(p + q^perp/2eps - theta(q))

// smooth cutoff: 1 on |r| <= r0, 0 on |r| >= r1
inline double smooth_cutoff(double r, double r0, double r1) {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double s = (r - r0) / (r1 - r0);
    return std::exp(-1.0 / (1.0 - s * s) + 1.0);
}

struct GyroSymbol {
    ScalarGrid omega;  // probability density on the position grid
    VectorGrid theta;  // bounded drift field on the same grid
    double eps = 0.1;
    double hbar = 0.01;

    double hbar_over_eps() const { return hbar / eps; }
};

// built-in density omega = chi G_{1/2} / Lambda with chi a smooth bump equal
// to 1 on B_1 and 0 outside B_2
inline GyroSymbol make_gyro_symbol(const GridSpec& spec, double eps, double hbar,
                                   const std::function<Vec2(Vec2)>& theta_fn) {
    if (!(eps > 0.0)) throw std::invalid_argument("make_gyro_symbol: eps must be positive");
    if (hbar < 0.0) throw std::invalid_argument("make_gyro_symbol: hbar must be nonnegative");
    if (spec.half_width < 2.5)
        throw std::invalid_argument("make_gyro_symbol: grid must contain B_2 with margin (L >= 2.5)");
    GyroSymbol sym;
    sym.eps = eps;
    sym.hbar = hbar;
    sym.omega = ScalarGrid::from_function(
        spec, [&](Vec2 x) { return smooth_cutoff(x.norm(), 1.0, 2.0) * gaussian_density(x, 0.5); });
    const double lambda = sym.omega.integral();
    for (double& v : sym.omega.data()) v /= lambda;
    sym.theta = VectorGrid(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const Vec2 th = theta_fn(spec.center(i, j));
            sym.theta.x.at(i, j) = th.x;
            sym.theta.y.at(i, j) = th.y;
        }
    return sym;
}

// same construction for any compactly supported smooth probability density
inline GyroSymbol make_gyro_symbol_from(const GridSpec& spec, double eps, double hbar,
                                        const std::function<double(Vec2)>& omega_fn,
                                        const std::function<Vec2(Vec2)>& theta_fn) {
    GyroSymbol sym = make_gyro_symbol(spec, eps, std::max(hbar, 0.0), theta_fn);
    sym.omega = ScalarGrid::from_function(spec, omega_fn);
    const double mass = sym.omega.integral();
    if (!(mass > 0.0)) throw std::invalid_argument("make_gyro_symbol_from: density has no mass on the grid");
    for (double& v : sym.omega.data()) v /= mass;
    return sym;
}

// The momentum sheet is a graph over q, so quadrature in q alone discretizes
// nu exactly in p: atoms {(q_j, theta(q_j) - q_j^perp/2 eps)} with weights
// omega(q_j) h^2, renormalized to unit mass. stride subsamples the lattice.
inline std::vector<WeightedPhasePoint> gyro_symbol_atoms(const GyroSymbol& sym, int stride = 1,
                                                         double threshold = 1e-10) {
    if (stride < 1) throw std::invalid_argument("gyro_symbol_atoms: stride must be >= 1");
    const GridSpec& spec = sym.omega.spec();
    std::vector<WeightedPhasePoint> atoms;
    double mass = 0.0;
    for (int i = 0; i < spec.n; i += stride)
        for (int j = 0; j < spec.n; j += stride) {
            const double w = sym.omega.at(i, j);
            if (w <= threshold) continue;
            const Vec2 q = spec.center(i, j);
            const Vec2 p = sym.theta.at(i, j) - q.perp() / (2.0 * sym.eps);
            atoms.push_back({{q, p}, w});
            mass += w;
        }
    for (WeightedPhasePoint& a : atoms) a.w /= mass;
    return atoms;
}

// rho_{eps,hbar} = G_{hbar/2} * omega
inline ScalarGrid smoothed_density(const GyroSymbol& sym) {
    if (sym.hbar == 0.0) return sym.omega;
    return free_space_convolve(sym.omega, KernelChoice::gaussian, 0.5 * sym.hbar);
}

// Initial modulated-energy terms of the construction:
//   kinetic      = eps int omega |theta|^2 + hbar/4eps + eps hbar
//   confinement  = eps (1 + hbar) int |q|^2 omega
//   I = int ((N-1)/N V*rho - V*mu) rho,   J = int (V*mu)(mu - rho),
// with rho = G_{hbar/2} * omega and mu = omega + eps tr((grad u)^2).
struct Section5Report {
    double kinetic = 0.0;
    double kinetic_correction = 0.0; // hbar/4eps + eps hbar
    double confinement = 0.0;
    double term_i = 0.0;
    double term_j = 0.0;
    double eps = 0.0;
    double hbar = 0.0;
    double hbar_over_eps = 0.0;
    double n_particles = 0.0;
    bool out_of_regime = false;
};

inline Section5Report section5_initial_energy(const GyroSymbol& sym, double n_particles = 4096.0) {
    const GridSpec& spec = sym.omega.spec();
    if (std::abs(sym.omega.integral() - 1.0) > 1e-8)
        throw std::invalid_argument("section5_initial_energy: omega is not a unit-mass grid density");

    Section5Report rep;
    rep.eps = sym.eps;
    rep.hbar = sym.hbar;
    rep.hbar_over_eps = sym.hbar / sym.eps;
    rep.n_particles = n_particles;
    rep.out_of_regime = rep.hbar_over_eps >= 1.0;

    double drift_sq = 0.0, moment2 = 0.0;
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            drift_sq += sym.omega.at(i, j) * sym.theta.at(i, j).norm_sq();
            moment2 += sym.omega.at(i, j) * spec.center(i, j).norm_sq();
        }
    drift_sq *= spec.cell_area();
    moment2 *= spec.cell_area();

    rep.kinetic_correction = sym.hbar / (4.0 * sym.eps) + sym.eps * sym.hbar;
    rep.kinetic = sym.eps * drift_sq + rep.kinetic_correction;
    rep.confinement = sym.eps * (1.0 + sym.hbar) * moment2;

    const ScalarGrid rho = smoothed_density(sym);
    const EulerFields fields = fields_from_vorticity_grid(sym.omega, sym.eps);
    const ScalarGrid& mu = fields.mu;
    const ScalarGrid v_mu = free_space_convolve(mu, KernelChoice::coulomb);
    const ScalarGrid v_rho = free_space_convolve(rho, KernelChoice::coulomb);

    const double ratio = (n_particles - 1.0) / n_particles;
    double term_i = 0.0, term_j = 0.0;
    for (std::size_t k = 0; k < mu.data().size(); ++k) {
        term_i += (ratio * v_rho.data()[k] - v_mu.data()[k]) * rho.data()[k];
        term_j += v_mu.data()[k] * (mu.data()[k] - rho.data()[k]);
    }
    rep.term_i = term_i * spec.cell_area();
    rep.term_j = term_j * spec.cell_area();
    return rep;
}

} // namespace gyrolim
