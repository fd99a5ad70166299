#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gyrolim/convolve.hpp"
#include "gyrolim/euler.hpp"
#include "gyrolim/grid.hpp"
#include "gyrolim/kernels.hpp"
#include "gyrolim/nbody.hpp"

namespace gyrolim {

// Modulated-energy breakdown for empirical (deterministic-particle) data.
// e2 and f_n are computed by independent reductions and satisfy e2 = f_n / 2;
// e2_star is the starred interaction term with mu replaced by omega.
struct EnergyBreakdown {
    double e1 = 0.0;
    double e2 = 0.0;
    double total = 0.0;
    double e2_star = 0.0;
    double f_n = 0.0;
    std::optional<double> f_prime_n;
    double slack = 0.0;
    bool confinement_included = false;
};

namespace detail {

inline void require_inside(const std::vector<Vec2>& xs, const GridSpec& spec) {
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!spec.contains(xs[i]))
            throw std::out_of_range("particle " + std::to_string(i) + " at (" + std::to_string(xs[i].x) +
                                    ", " + std::to_string(xs[i].y) + ") is outside the field grid");
}

// sum over unordered pairs of V(x_i - x_j); throws on coincident particles
inline double pair_potential_sum(const std::vector<Vec2>& xs) {
    const std::size_t n = xs.size();
    std::vector<double> partial(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r2 = (xs[i] - xs[j]).norm_sq();
            if (r2 == 0.0)
                throw std::invalid_argument("coincident particles " + std::to_string(i) + " and " +
                                            std::to_string(j));
            s += -std::log(r2) / (2.0 * kTwoPi);
        }
        partial[i] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

} // namespace detail

// f_N(X_N, mu) = double integral of V(x - y) against (mu_X - mu)^2 off the
// diagonal, expanded into the empirical, cross, and continuum pieces
inline double f_n_functional(const std::vector<Vec2>& xs, const ScalarGrid& mu) {
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("f_n_functional: empty configuration");
    detail::require_inside(xs, mu.spec());

    const double emp = 2.0 * detail::pair_potential_sum(xs) / (static_cast<double>(n) * n);

    const ScalarGrid v_mu = free_space_convolve(mu, KernelChoice::coulomb);
    double cross = 0.0;
    for (const Vec2& x : xs) cross += v_mu.interpolate(x);
    cross *= 2.0 / n;

    double cont = 0.0;
    for (std::size_t k = 0; k < mu.data().size(); ++k) cont += v_mu.data()[k] * mu.data()[k];
    cont *= mu.spec().cell_area();

    return emp - cross + cont;
}

// exact lower bound of the interaction functional:
// f_N + (1 + ||mu||_inf)/N + log(N)/N >= 0
inline double lower_bound_slack(const std::vector<Vec2>& xs, const ScalarGrid& mu) {
    const double n = static_cast<double>(xs.size());
    return f_n_functional(xs, mu) + (1.0 + mu.max_abs()) / n + std::log(n) / n;
}

// f'_N(X_N, mu, u) = double integral of (u(x) - u(y)) . grad V(x - y) against
// (mu_X - mu)^2 off the diagonal; u lives on the mu grid
inline double f_prime_functional(const std::vector<Vec2>& xs, const ScalarGrid& mu, const VectorGrid& u) {
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("f_prime_functional: empty configuration");
    detail::require_inside(xs, mu.spec());
    const GridSpec& spec = mu.spec();

    std::vector<Vec2> u_at(n);
    for (std::size_t i = 0; i < n; ++i) u_at[i] = u.interpolate(xs[i]);

    // empirical-empirical term; the integrand is symmetric under swapping
    double emp = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 r = xs[i] - xs[j];
            if (r.norm_sq() == 0.0)
                throw std::invalid_argument("coincident particles " + std::to_string(i) + " and " +
                                            std::to_string(j));
            emp += 2.0 * (u_at[i] - u_at[j]).dot(coulomb_gradient(r));
        }
    emp /= static_cast<double>(n) * n;

    // grad V * mu and the scalar field sum_k (d_k V) * (u^k mu)
    const VectorGrid gv_mu = free_space_convolve_vector(mu, KernelChoice::coulomb_grad);
    ScalarGrid ux_mu(spec), uy_mu(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            ux_mu.at(i, j) = u.x.at(i, j) * mu.at(i, j);
            uy_mu.at(i, j) = u.y.at(i, j) * mu.at(i, j);
        }
    const VectorGrid gv_uxmu = free_space_convolve_vector(ux_mu, KernelChoice::coulomb_grad);
    const VectorGrid gv_uymu = free_space_convolve_vector(uy_mu, KernelChoice::coulomb_grad);
    ScalarGrid gv_umu(spec); // (grad V) * (u mu), contracted
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) gv_umu.at(i, j) = gv_uxmu.x.at(i, j) + gv_uymu.y.at(i, j);

    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        cross += u_at[i].dot(gv_mu.interpolate(xs[i])) - gv_umu.interpolate(xs[i]);
    cross *= 2.0 / n;

    double cont = 0.0;
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const Vec2 uij = u.at(i, j);
            cont += (uij.dot(gv_mu.at(i, j)) - gv_umu.at(i, j)) * mu.at(i, j);
        }
    cont *= spec.cell_area();

    return emp - cross + cont;
}

// Modulated energy of an ensemble against Euler fields:
//   E1 = eps/(2N) sum |xi_i - u(x_i)|^2  [+ eps/(2N) sum |x_i|^2 if confined]
//   E2 = 1/(2N^2) sum_{i != j} V(x_i - x_j) + 1/2 int (V*mu) mu
//        - 1/N sum (V*mu)(x_i),  with mu = omega + eps tr((grad u)^2).
// The starred variant replaces mu by omega in the interaction part.
inline EnergyBreakdown classical_modulated_energy(const ParticleEnsemble& ensemble, const EulerFields& fields,
                                                  bool include_confinement,
                                                  bool include_f_prime = false) {
    if (ensemble.eps != fields.eps)
        throw std::invalid_argument("classical_modulated_energy: ensemble and fields disagree on eps (" +
                                    std::to_string(ensemble.eps) + " vs " + std::to_string(fields.eps) + ")");
    const std::size_t n = ensemble.size();
    if (n == 0) throw std::invalid_argument("classical_modulated_energy: empty ensemble");
    detail::require_inside(ensemble.pos, fields.mu.spec());

    EnergyBreakdown out;
    out.confinement_included = include_confinement;

    double kin = 0.0;
    for (std::size_t i = 0; i < n; ++i) kin += (ensemble.vel[i] - fields.u.interpolate(ensemble.pos[i])).norm_sq();
    if (include_confinement)
        for (const Vec2& p : ensemble.pos) kin += p.norm_sq();
    out.e1 = ensemble.eps * kin / (2.0 * n);

    // interaction term, own reduction (cross-checked against f_n_functional)
    auto interaction = [&](const ScalarGrid& target) {
        const ScalarGrid v_t = free_space_convolve(target, KernelChoice::coulomb);
        double pair = detail::pair_potential_sum(ensemble.pos) / (static_cast<double>(n) * n);
        double quad = 0.0;
        for (std::size_t k = 0; k < target.data().size(); ++k) quad += v_t.data()[k] * target.data()[k];
        quad *= 0.5 * target.spec().cell_area();
        double at_particles = 0.0;
        for (const Vec2& x : ensemble.pos) at_particles += v_t.interpolate(x);
        at_particles /= n;
        return pair + quad - at_particles;
    };
    out.e2 = interaction(fields.mu);
    out.e2_star = interaction(fields.omega);
    out.total = out.e1 + out.e2;

    out.f_n = f_n_functional(ensemble.pos, fields.mu);
    out.slack = out.f_n + (1.0 + fields.mu.max_abs()) / n + std::log(static_cast<double>(n)) / n;
    if (include_f_prime) out.f_prime_n = f_prime_functional(ensemble.pos, fields.mu, fields.u);
    return out;
}

// Coercivity diagnostics: LHS = | int phi d(mu_X - mu) | together with the
// discrete norms entering the estimate's right-hand side.
struct CoercivityRow {
    std::string phi_id;
    double lhs = 0.0;
    double c01_norm = 0.0;    // max |phi| + max |grad phi| on the grid
    double h1_seminorm = 0.0; // grid L2 norm of grad phi
    double slack_term = 0.0;  // h1_seminorm * sqrt(max(slack, 0))
};

inline CoercivityRow coercivity_check(const std::function<double(Vec2)>& phi, const std::string& phi_id,
                                      const std::vector<Vec2>& xs, const ScalarGrid& mu) {
    const GridSpec& spec = mu.spec();
    ScalarGrid pg(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const double v = phi(spec.center(i, j));
            if (!std::isfinite(v))
                throw std::invalid_argument("coercivity_check: phi is non-finite on the grid");
            pg.at(i, j) = v;
        }

    double grid_part = 0.0;
    for (std::size_t k = 0; k < pg.data().size(); ++k) grid_part += pg.data()[k] * mu.data()[k];
    grid_part *= spec.cell_area();
    double emp = 0.0;
    for (const Vec2& x : xs) emp += phi(x);
    emp /= static_cast<double>(xs.size());

    const ScalarGrid px = d_dx(pg), py = d_dy(pg);
    double gmax = 0.0, gsq = 0.0;
    for (std::size_t k = 0; k < px.data().size(); ++k) {
        const double g2 = px.data()[k] * px.data()[k] + py.data()[k] * py.data()[k];
        gmax = std::max(gmax, std::sqrt(g2));
        gsq += g2;
    }

    CoercivityRow row;
    row.phi_id = phi_id;
    row.lhs = std::abs(grid_part - emp);
    row.c01_norm = pg.max_abs() + gmax;
    row.h1_seminorm = std::sqrt(gsq * spec.cell_area());
    row.slack_term = row.h1_seminorm * std::sqrt(std::max(0.0, lower_bound_slack(xs, mu)));
    return row;
}

// least-squares fit of LHS ~ c N^{-lambda/2} over an N sweep (input: N, LHS)
inline double fit_coercivity_exponent(const std::vector<std::pair<double, double>>& n_lhs) {
    if (n_lhs.size() < 2) throw std::invalid_argument("fit_coercivity_exponent: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, lhs] : n_lhs) {
        const double x = std::log(n), y = std::log(std::max(lhs, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = n_lhs.size();
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -2.0 * slope;
}

// Both sides of the first-marginal identity for a finitely supported
// symmetric rho_N given as a weighted mixture of configurations (atoms are
// treated as unordered, i.e. implicitly symmetrized).
inline std::pair<double, double> marginal_identity_check(const std::vector<std::vector<Vec2>>& configs,
                                                         const std::vector<double>& weights,
                                                         const ScalarGrid& mu,
                                                         const std::function<double(Vec2)>& phi) {
    if (configs.empty() || configs.size() != weights.size())
        throw std::invalid_argument("marginal_identity_check: configurations and weights must match");
    const std::size_t n = configs.front().size();
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("marginal_identity_check: negative mixture weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("marginal_identity_check: mixture weights sum to " + std::to_string(wsum));
    for (const auto& c : configs)
        if (c.size() != n)
            throw std::invalid_argument("marginal_identity_check: configurations of unequal size");

    double mu_phi = 0.0;
    const GridSpec& spec = mu.spec();
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) mu_phi += phi(spec.center(i, j)) * mu.at(i, j);
    mu_phi *= spec.cell_area();

    // LHS: int phi d(rho_{N:1} - mu), with rho_{N:1} = sum_k w_k (1/N) sum_i delta_{x_i^k}
    double lhs = -mu_phi;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        double s = 0.0;
        for (const Vec2& x : configs[k]) s += phi(x);
        lhs += weights[k] * s / static_cast<double>(n);
    }

    // RHS: (1/N) int [ int (sum_i delta_{x_i} - N mu) phi ] rho_N
    double rhs = 0.0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        double inner = -static_cast<double>(n) * mu_phi;
        for (const Vec2& x : configs[k]) inner += phi(x);
        rhs += weights[k] * inner;
    }
    rhs /= static_cast<double>(n);

    return {lhs, rhs};
}

// Commutator-inequality report: the left-hand side functional for a Lipschitz
// vector field psi and the structural right-hand side with the constant
// treated as a fit parameter (inner constant set to 1).
struct SerfatyReport {
    double lhs = 0.0;
    double f_n = 0.0;
    double bracket = 0.0;      // f_N + (1 + ||mu||_inf) N^{-1/3} + log(N)/N
    double n_half_term = 0.0;  // 2 ||psi||_{W^{1,inf}} (1 + ||mu||_inf) N^{-1/2}
    double grad_psi_inf = 0.0;
    double fitted_c = 0.0;     // |lhs| / (grad_psi_inf * max(bracket,0) + n_half_term)
};

inline SerfatyReport serfaty_rhs_report(const std::vector<Vec2>& xs, const ScalarGrid& mu,
                                        const VectorGrid& psi) {
    SerfatyReport rep;
    rep.lhs = std::abs(f_prime_functional(xs, mu, psi));
    rep.f_n = f_n_functional(xs, mu);

    const double n = static_cast<double>(xs.size());
    const double mu_inf = mu.max_abs();
    rep.bracket = rep.f_n + (1.0 + mu_inf) * std::pow(n, -1.0 / 3.0) + std::log(n) / n;

    const ScalarGrid pxx = d_dx(psi.x), pxy = d_dy(psi.x);
    const ScalarGrid pyx = d_dx(psi.y), pyy = d_dy(psi.y);
    double gmax = 0.0, pmax = 0.0;
    for (std::size_t k = 0; k < pxx.data().size(); ++k) {
        const double g2 = pxx.data()[k] * pxx.data()[k] + pxy.data()[k] * pxy.data()[k] +
                          pyx.data()[k] * pyx.data()[k] + pyy.data()[k] * pyy.data()[k];
        gmax = std::max(gmax, std::sqrt(g2));
        pmax = std::max(pmax, std::sqrt(psi.x.data()[k] * psi.x.data()[k] +
                                        psi.y.data()[k] * psi.y.data()[k]));
    }
    rep.grad_psi_inf = gmax;
    rep.n_half_term = 2.0 * (pmax + gmax) * (1.0 + mu_inf) / std::sqrt(n);
    const double denom = gmax * std::max(rep.bracket, 0.0) + rep.n_half_term;
    rep.fitted_c = denom > 0.0 ? rep.lhs / denom : 0.0;
    return rep;
}

} // namespace gyrolim
