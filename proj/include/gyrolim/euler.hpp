#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyrolim/convolve.hpp"
#include "gyrolim/grid.hpp"
#include "gyrolim/kernels.hpp"

namespace gyrolim {

// Lagrangian vortex-blob discretization of nonnegative unit-mass vorticity.
// Circulations are conserved exactly by transport; only positions move.
struct VortexBlobs {
    std::vector<Vec2> pos;
    std::vector<double> gamma; // gamma_i >= 0, sum = 1
    double delta = 0.0;        // core radius of the velocity mollifier

    std::size_t size() const { return pos.size(); }

    double total_circulation() const {
        double s = 0.0;
        for (double g : gamma) s += g;
        return s;
    }
};

struct EulerParams {
    double dt = 5e-3;
    double t_final = 1.0;
    GridSpec grid{2.0, 256};
    int blob_target = 4096;
};

// Grid fields derived from the vorticity. gradu_sq_trace is
// sum_ij d_i u^j d_j u^i = tr((grad u)^2), the source of the pressure
// equation -Lap P = tr((grad u)^2); mu = omega + eps * tr((grad u)^2).
struct EulerFields {
    ScalarGrid omega;
    ScalarGrid psi;      // stream function, psi = -(V * omega) so Lap psi = omega
    VectorGrid u;        // u = (grad psi)^perp
    ScalarGrid dux_dx, dux_dy, duy_dx, duy_dy;
    ScalarGrid gradu_sq_trace;
    ScalarGrid pressure; // P = V * tr((grad u)^2)
    ScalarGrid mu;       // effective density omega + eps * tr((grad u)^2)
    double eps = 0.0;
};

// Regular lattice over the support box of omega0, gamma_i = omega0(x_i) hb^2
// renormalized to unit total circulation, core delta = 2 hb. The requested
// count is a target; the realized count depends on the support shape.
inline VortexBlobs init_blobs_from_vorticity(const std::function<double(Vec2)>& omega0, int target_count,
                                             const GridSpec& probe) {
    if (target_count < 1) throw std::invalid_argument("init_blobs_from_vorticity: blob count must be >= 1");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    bool found = false;
    for (int i = 0; i < probe.n; ++i)
        for (int j = 0; j < probe.n; ++j) {
            const Vec2 c = probe.center(i, j);
            const double w = omega0(c);
            if (w < 0.0)
                throw std::invalid_argument("init_blobs_from_vorticity: omega0 is negative at (" +
                                            std::to_string(c.x) + ", " + std::to_string(c.y) + ")");
            if (w > 0.0) {
                found = true;
                xmin = std::min(xmin, c.x);
                xmax = std::max(xmax, c.x);
                ymin = std::min(ymin, c.y);
                ymax = std::max(ymax, c.y);
            }
        }
    if (!found) throw std::invalid_argument("init_blobs_from_vorticity: omega0 vanishes on the probe grid");

    const double h = probe.spacing();
    const double wx = std::max(xmax - xmin, h);
    const double wy = std::max(ymax - ymin, h);
    const double hb = std::sqrt(wx * wy / target_count);
    const int nx = std::max(1, static_cast<int>(std::lround(wx / hb)));
    const int ny = std::max(1, static_cast<int>(std::lround(wy / hb)));
    const double sx = wx / nx, sy = wy / ny;

    VortexBlobs blobs;
    blobs.delta = 2.0 * hb;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const Vec2 p{xmin + (i + 0.5) * sx, ymin + (j + 0.5) * sy};
            const double w = omega0(p);
            if (w > 0.0) {
                blobs.pos.push_back(p);
                blobs.gamma.push_back(w * sx * sy);
            }
        }
    if (blobs.pos.empty()) {
        // support thinner than the lattice; fall back to the strongest probe cell
        Vec2 best{0, 0};
        double wbest = -1.0;
        for (int i = 0; i < probe.n; ++i)
            for (int j = 0; j < probe.n; ++j) {
                const Vec2 c = probe.center(i, j);
                const double w = omega0(c);
                if (w > wbest) {
                    wbest = w;
                    best = c;
                }
            }
        blobs.pos.push_back(best);
        blobs.gamma.push_back(1.0);
        blobs.delta = 2.0 * h;
    }
    double mass = 0.0;
    for (double g : blobs.gamma) mass += g;
    for (double& g : blobs.gamma) g /= mass;
    return blobs;
}

// u(x) = sum_i gamma_i K(x - x_i) (1 - exp(-|x - x_i|^2 / delta^2)); the
// mollifier removes the singularity, giving 0 at coincident points
inline std::vector<Vec2> blob_velocity(const VortexBlobs& blobs, const std::vector<Vec2>& points) {
    if (!(blobs.delta > 0.0)) throw std::invalid_argument("blob_velocity: core radius must be positive");
    const double inv_d2 = 1.0 / (blobs.delta * blobs.delta);
    std::vector<Vec2> out(points.size());
    for (std::size_t t = 0; t < points.size(); ++t) {
        double ux = 0.0, uy = 0.0;
        const Vec2 p = points[t];
        for (std::size_t i = 0; i < blobs.size(); ++i) {
            const Vec2 r = p - blobs.pos[i];
            const double r2 = r.norm_sq();
            if (r2 == 0.0) continue;
            const double f = blobs.gamma[i] * (1.0 - std::exp(-r2 * inv_d2)) / (kTwoPi * r2);
            ux += -r.y * f;
            uy += r.x * f;
        }
        out[t] = {ux, uy};
    }
    return out;
}

// classical RK4 on the blob positions; circulations are untouched
inline void step_euler(VortexBlobs& blobs, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_euler: dt must be positive");
    const std::vector<Vec2> x0 = blobs.pos;
    const std::size_t m = blobs.size();

    const std::vector<Vec2> k1 = blob_velocity(blobs, x0);
    std::vector<Vec2> tmp(m);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x0[i] + 0.5 * dt * k1[i];
    blobs.pos = tmp;
    const std::vector<Vec2> k2 = blob_velocity(blobs, tmp);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x0[i] + 0.5 * dt * k2[i];
    blobs.pos = tmp;
    const std::vector<Vec2> k3 = blob_velocity(blobs, tmp);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x0[i] + dt * k3[i];
    blobs.pos = tmp;
    const std::vector<Vec2> k4 = blob_velocity(blobs, tmp);
    for (std::size_t i = 0; i < m; ++i)
        blobs.pos[i] = x0[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// blob vorticity deposited with the core mollifier G_{delta^2/2}
// (the density whose Biot-Savart velocity is the mollified kernel)
inline ScalarGrid deposit_vorticity(const VortexBlobs& blobs, const GridSpec& spec) {
    ScalarGrid out(spec);
    const double a = 0.5 * blobs.delta * blobs.delta;
    const double cut = 7.0 * std::sqrt(a);
    const double h = spec.spacing();
    const int reach = static_cast<int>(std::ceil(cut / h)) + 1;
    const double norm = 1.0 / (kTwoPi * a);
    for (std::size_t b = 0; b < blobs.size(); ++b) {
        const Vec2 p = blobs.pos[b];
        const int ic = static_cast<int>(std::floor((p.x + spec.half_width) / h - 0.5));
        const int jc = static_cast<int>(std::floor((p.y + spec.half_width) / h - 0.5));
        const int i0 = std::max(0, ic - reach), i1 = std::min(spec.n - 1, ic + reach);
        const int j0 = std::max(0, jc - reach), j1 = std::min(spec.n - 1, jc + reach);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) {
                const double r2 = (spec.center(i, j) - p).norm_sq();
                out.at(i, j) += blobs.gamma[b] * norm * std::exp(-r2 / (2.0 * a));
            }
    }
    return out;
}

inline EulerFields fields_from_vorticity_grid(const ScalarGrid& omega, double eps) {
    EulerFields f;
    f.eps = eps;
    f.omega = omega;
    const GridSpec& spec = omega.spec();

    const ScalarGrid v_conv = free_space_convolve(omega, KernelChoice::coulomb);
    f.psi = ScalarGrid(spec);
    for (std::size_t k = 0; k < f.psi.data().size(); ++k) f.psi.data()[k] = -v_conv.data()[k];

    const ScalarGrid psix = d_dx(f.psi);
    const ScalarGrid psiy = d_dy(f.psi);
    f.u = VectorGrid(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            f.u.x.at(i, j) = -psiy.at(i, j);
            f.u.y.at(i, j) = psix.at(i, j);
        }

    f.dux_dx = d_dx(f.u.x);
    f.dux_dy = d_dy(f.u.x);
    f.duy_dx = d_dx(f.u.y);
    f.duy_dy = d_dy(f.u.y);

    f.gradu_sq_trace = ScalarGrid(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const double a = f.dux_dx.at(i, j), d = f.duy_dy.at(i, j);
            const double b = f.dux_dy.at(i, j), c = f.duy_dx.at(i, j);
            f.gradu_sq_trace.at(i, j) = a * a + d * d + 2.0 * b * c;
        }

    f.pressure = free_space_convolve(f.gradu_sq_trace, KernelChoice::coulomb);

    f.mu = ScalarGrid(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) f.mu.at(i, j) = omega.at(i, j) + eps * f.gradu_sq_trace.at(i, j);
    return f;
}

inline EulerFields fields_from_blobs(const VortexBlobs& blobs, const GridSpec& spec, double eps) {
    for (std::size_t i = 0; i < blobs.size(); ++i)
        if (!spec.contains(blobs.pos[i]))
            throw std::runtime_error("fields_from_blobs: blob " + std::to_string(i) + " at (" +
                                     std::to_string(blobs.pos[i].x) + ", " + std::to_string(blobs.pos[i].y) +
                                     ") escaped the grid [-" + std::to_string(spec.half_width) + ", " +
                                     std::to_string(spec.half_width) + "]^2");
    return fields_from_vorticity_grid(deposit_vorticity(blobs, spec), eps);
}

struct GradUNorm {
    double p;
    double norm;
    double norm_over_p;
};

// grid L^p norms of |grad u| (Frobenius), reported together with norm/p
inline std::vector<GradUNorm> grad_u_norms(const EulerFields& f, const std::vector<double>& ps) {
    const GridSpec& spec = f.omega.spec();
    std::vector<GradUNorm> out;
    for (double p : ps) {
        if (p < 1.0) throw std::invalid_argument("grad_u_norms: p must be >= 1");
        double s = 0.0;
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) {
                const double a = f.dux_dx.at(i, j), b = f.dux_dy.at(i, j);
                const double c = f.duy_dx.at(i, j), d = f.duy_dy.at(i, j);
                const double fro = std::sqrt(a * a + b * b + c * c + d * d);
                s += std::pow(fro, p);
            }
        const double norm = std::pow(s * spec.cell_area(), 1.0 / p);
        out.push_back({p, norm, norm / p});
    }
    return out;
}

} // namespace gyrolim
