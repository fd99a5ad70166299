#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyrolim/kernels.hpp"
#include "gyrolim/parallel.hpp"
#include "gyrolim/rng.hpp"
#include "gyrolim/vec2.hpp"

namespace gyrolim {

// magnetic: xi' = -(1/eps)(xi^perp + F);  plain: xi' = -F
enum class ForceMode { magnetic, plain };
enum class Scheme { strang, rk4_reference };

struct ParticleEnsemble {
    std::vector<Vec2> pos;
    std::vector<Vec2> vel;
    double eps = 1.0;

    std::size_t size() const { return pos.size(); }
};

struct IntegratorConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    double min_separation = 1e-8;
    Scheme scheme = Scheme::strang;
    ForceMode mode = ForceMode::magnetic;
    int observer_stride = 100;
};

struct CollisionError : std::runtime_error {
    std::size_t i, j;
    double distance;
    CollisionError(std::size_t a, std::size_t b, double d)
        : std::runtime_error("collision: particles " + std::to_string(a) + " and " + std::to_string(b) +
                             " at distance " + std::to_string(d)),
          i(a), j(b), distance(d) {}
};

// F_i = (1/N) sum_{j != i} grad V(x_i - x_j); pairwise antisymmetric, so the
// forces sum to zero. Accumulation order over j is fixed, which keeps runs
// bit-identical when the outer loop is parallelized.
inline std::vector<Vec2> mean_field_force(const std::vector<Vec2>& pos, double min_separation,
                                          double* min_sep_out = nullptr) {
    const std::size_t n = pos.size();
    const double guard2 = min_separation * min_separation;
    std::vector<Vec2> f(n, Vec2{0.0, 0.0});
    std::vector<double> row_min(n, 1e300);
    std::vector<std::size_t> row_arg(n, 0);
    parallel_for(n, [&](std::size_t i) {
        double fx = 0.0, fy = 0.0;
        double mn = 1e300;
        std::size_t arg = 0;
        const Vec2 xi = pos[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = xi.x - pos[j].x;
            const double dy = xi.y - pos[j].y;
            const double r2 = dx * dx + dy * dy;
            if (r2 < mn) {
                mn = r2;
                arg = j;
            }
            // grad V(r) = -r / (2 pi |r|^2)
            const double s = 1.0 / (kTwoPi * r2);
            fx -= dx * s;
            fy -= dy * s;
        }
        f[i] = {fx / static_cast<double>(n), fy / static_cast<double>(n)};
        row_min[i] = mn;
        row_arg[i] = arg;
    });
    double min_r2 = 1e300;
    std::size_t ci = 0, cj = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (row_min[i] < min_r2) {
            min_r2 = row_min[i];
            ci = i;
            cj = row_arg[i];
        }
    if (n >= 2 && min_r2 < guard2) throw CollisionError(ci, cj, std::sqrt(min_r2));
    if (min_sep_out) *min_sep_out = n >= 2 ? std::sqrt(min_r2) : 1e300;
    return f;
}

// exact solution of xi' = -(1/eps)(xi^perp + F) with frozen F over time dt:
// xi(dt) = xi* + R_{-dt/eps}(xi - xi*) around the drift fixed point xi* = F^perp
inline Vec2 rotation_update(Vec2 xi, Vec2 force, double dt, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("rotation_update: eps must be positive");
    const Vec2 fixed = force.perp();
    const Vec2 w = xi - fixed;
    const double th = dt / eps;
    const double c = std::cos(th), s = std::sin(th);
    // R_{-th} w = (c w1 + s w2, -s w1 + c w2)
    return {fixed.x + c * w.x + s * w.y, fixed.y - s * w.x + c * w.y};
}

// Strang step: half drift, velocity update with the force frozen at the
// midpoint positions (exact rotation in the magnetic mode, exact kick in the
// plain mode), half drift. Handles the stiff 1/eps rotation without resolving
// the cyclotron period.
inline void step_strang(ParticleEnsemble& e, double dt, ForceMode mode, double min_separation = 1e-8,
                        double* min_sep_out = nullptr) {
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) e.pos[i] += 0.5 * dt * e.vel[i];
    const std::vector<Vec2> f = mean_field_force(e.pos, min_separation, min_sep_out);
    if (mode == ForceMode::magnetic) {
        for (std::size_t i = 0; i < n; ++i) e.vel[i] = rotation_update(e.vel[i], f[i], dt, e.eps);
    } else {
        for (std::size_t i = 0; i < n; ++i) e.vel[i] -= dt * f[i];
    }
    for (std::size_t i = 0; i < n; ++i) e.pos[i] += 0.5 * dt * e.vel[i];
}

// explicit RK4 on the full stiff system; reference scheme for convergence
// studies, requires dt well below eps
inline void step_rk4(ParticleEnsemble& e, double dt, ForceMode mode, double min_separation = 1e-8) {
    const std::size_t n = e.size();
    struct State {
        std::vector<Vec2> x, v;
    };
    auto deriv = [&](const State& s) {
        State d;
        d.x = s.v;
        const std::vector<Vec2> f = mean_field_force(s.x, min_separation);
        d.v.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (mode == ForceMode::magnetic)
                d.v[i] = (s.v[i].perp() + f[i]) * (-1.0 / e.eps);
            else
                d.v[i] = -f[i];
        }
        return d;
    };
    auto advance = [&](const State& s, const State& d, double a) {
        State out;
        out.x.resize(n);
        out.v.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] = s.x[i] + a * d.x[i];
            out.v[i] = s.v[i] + a * d.v[i];
        }
        return out;
    };
    const State s0{e.pos, e.vel};
    const State k1 = deriv(s0);
    const State k2 = deriv(advance(s0, k1, 0.5 * dt));
    const State k3 = deriv(advance(s0, k2, 0.5 * dt));
    const State k4 = deriv(advance(s0, k3, dt));
    for (std::size_t i = 0; i < n; ++i) {
        e.pos[i] += (dt / 6.0) * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
        e.vel[i] += (dt / 6.0) * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
    }
}

// Rescaled energy h = w/(2N) sum |xi|^2 + 1/(2N^2) sum_{i != j} V(x_i - x_j),
// an invariant of the exact flow (the magnetic force does no work). The
// kinetic weight w is eps for the magnetic system and 1 for the plain one,
// matching the time scalings of the two velocity equations.
inline double hamiltonian(const ParticleEnsemble& e, ForceMode mode, double min_separation = 0.0) {
    const std::size_t n = e.size();
    if (n == 0) return 0.0;
    const double w = mode == ForceMode::magnetic ? e.eps : 1.0;
    double kin = 0.0;
    for (const Vec2& v : e.vel) kin += v.norm_sq();
    kin *= w / (2.0 * n);
    double pot = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double r2 = (e.pos[i] - e.pos[j]).norm_sq();
            if (r2 <= min_separation * min_separation) throw CollisionError(i, j, std::sqrt(r2));
            if (r2 == 0.0) throw CollisionError(i, j, 0.0);
            pot += -std::log(r2) / (2.0 * kTwoPi);
        }
    pot /= 2.0 * static_cast<double>(n) * n;
    return kin + pot;
}

// Monokinetic sampling: positions i.i.d. from the density by rejection against
// its sup over the bounding box, velocities xi_i = u0(x_i). Deterministic for
// a fixed seed.
inline ParticleEnsemble sample_monokinetic(const std::function<double(Vec2)>& density, double box_half_width,
                                           const std::function<Vec2(Vec2)>& u0, std::size_t count,
                                           std::uint64_t seed, double eps) {
    if (count == 0) throw std::invalid_argument("sample_monokinetic: N must be >= 1");
    // probe the sup on a fine lattice; 5% headroom for inter-node maxima
    double sup = 0.0;
    const int probe_n = 1024;
    for (int i = 0; i < probe_n; ++i)
        for (int j = 0; j < probe_n; ++j) {
            const Vec2 p{-box_half_width + (i + 0.5) * 2.0 * box_half_width / probe_n,
                         -box_half_width + (j + 0.5) * 2.0 * box_half_width / probe_n};
            sup = std::max(sup, density(p));
        }
    if (!(sup > 0.0)) throw std::invalid_argument("sample_monokinetic: density vanishes on the box");
    sup *= 1.05;

    ParticleEnsemble e;
    e.eps = eps;
    e.pos.reserve(count);
    e.vel.reserve(count);
    Rng rng(seed);
    const std::uint64_t budget = 10000ull * count;
    std::uint64_t tries = 0;
    while (e.pos.size() < count) {
        if (++tries > budget)
            throw std::runtime_error("sample_monokinetic: rejection budget exhausted (" +
                                     std::to_string(budget) + " draws)");
        const Vec2 p{rng.uniform(-box_half_width, box_half_width),
                     rng.uniform(-box_half_width, box_half_width)};
        const double y = rng.uniform(0.0, sup);
        if (y < density(p)) e.pos.push_back(p);
    }
    for (const Vec2& p : e.pos) e.vel.push_back(u0(p));
    return e;
}

struct ObserverRow {
    double t;
    std::vector<double> values;
};

struct Observer {
    std::string name;
    std::function<std::vector<double>(double, const ParticleEnsemble&, double)> fn; // (t, state, min_sep)
};

struct SimulationResult {
    std::vector<ObserverRow> rows;
    bool collided = false;
    std::string error;
    double t_reached = 0.0;
};

// Fixed-stride observation loop; aborts cleanly on collision or non-finite
// state, keeping the rows collected so far.
inline SimulationResult run_simulation(ParticleEnsemble& e, const IntegratorConfig& cfg,
                                       const std::vector<Observer>& observers) {
    if (cfg.observer_stride <= 0) throw std::invalid_argument("run_simulation: observer stride must be >= 1");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("run_simulation: dt must be positive");
    SimulationResult res;
    const long steps = std::lround(cfg.t_final / cfg.dt);

    auto fire = [&](double t, double min_sep) {
        for (const Observer& ob : observers) {
            ObserverRow row{t, ob.fn(t, e, min_sep)};
            res.rows.push_back(std::move(row));
        }
    };

    double min_sep = 1e300;
    if (e.size() >= 2) {
        // initial separation scan
        for (std::size_t i = 0; i < e.size(); ++i)
            for (std::size_t j = i + 1; j < e.size(); ++j)
                min_sep = std::min(min_sep, (e.pos[i] - e.pos[j]).norm());
    }
    fire(0.0, min_sep);

    for (long s = 1; s <= steps; ++s) {
        try {
            if (cfg.scheme == Scheme::strang)
                step_strang(e, cfg.dt, cfg.mode, cfg.min_separation, &min_sep);
            else {
                step_rk4(e, cfg.dt, cfg.mode, cfg.min_separation);
                min_sep = 1e300;
                for (std::size_t i = 0; i < e.size(); ++i)
                    for (std::size_t j = i + 1; j < e.size(); ++j)
                        min_sep = std::min(min_sep, (e.pos[i] - e.pos[j]).norm());
            }
        } catch (const CollisionError& ce) {
            res.collided = true;
            res.error = ce.what();
            return res;
        }
        for (const Vec2& p : e.pos)
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                res.error = "non-finite particle state at t = " + std::to_string(s * cfg.dt);
                return res;
            }
        res.t_reached = s * cfg.dt;
        if (s % cfg.observer_stride == 0) fire(res.t_reached, min_sep);
    }
    return res;
}

} // namespace gyrolim
