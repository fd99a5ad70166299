#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gyrolim/config.hpp"
#include "gyrolim/csv.hpp"
#include "gyrolim/energy.hpp"
#include "gyrolim/euler.hpp"
#include "gyrolim/manifest.hpp"
#include "gyrolim/nbody.hpp"
#include "gyrolim/quantize.hpp"
#include "gyrolim/svg.hpp"

namespace gyrolim {

namespace fs = std::filesystem;

// built-in weak-convergence observables (Lipschitz, H^1-finite)
inline double weak_phi1(Vec2 x) { return std::exp(-x.norm_sq()); }
inline double weak_phi2(Vec2 x) { return x.x * std::exp(-x.norm_sq()); }

// built-in initial vorticity: smooth bump supported in the 1.1-disk
inline double sweep_vorticity(Vec2 x) { return smooth_cutoff(x.norm(), 0.7, 1.1); }

// built-in drift field for the quantize sweep
inline Vec2 quantize_theta(Vec2 q) { return 0.3 * q.perp() * std::exp(-0.5 * q.norm_sq()); }

// fixed sampling density for the coercivity experiment
inline double coercivity_density(Vec2 x) { return std::exp(-x.norm_sq() / 0.4) / (kTwoPi * 0.2); }

struct RunOutcome {
    bool ok = true;
    std::vector<std::string> failures;
    fs::path dir;
};

inline fs::path resolve_out_dir(const RunConfig& cfg) {
    if (const char* root = std::getenv("GYROLIM_OUT"); root && *root) return fs::path(root) / cfg.out;
    return fs::path(cfg.out);
}

// ---------------------------------------------------------------------------
// co-evolved nbody + euler cell

struct EnergyRow {
    double t, total, e1, e2, f_n, slack, h_eps, min_sep;
};

struct CellOutcome {
    std::vector<EnergyRow> rows;
    std::string status = "ok";
    double weak1 = std::numeric_limits<double>::quiet_NaN();
    double weak2 = std::numeric_limits<double>::quiet_NaN();
};

inline CellOutcome run_sweep_cell(const RunConfig& cfg, long n_particles, double eps, std::uint64_t seed) {
    const GridSpec grid(cfg.grid_half_width, cfg.grid_n);
    const ForceMode mode = cfg.magnetic ? ForceMode::magnetic : ForceMode::plain;
    CellOutcome out;

    // euler side
    VortexBlobs cur = init_blobs_from_vorticity(sweep_vorticity, cfg.blobs, grid);
    VortexBlobs prev = cur;
    double t_prev = 0.0, t_cur = 0.0;
    const EulerFields fields0 = fields_from_blobs(cur, grid, eps);

    // particle side
    auto u0 = [&fields0](Vec2 x) { return fields0.u.interpolate(x); };
    std::function<Vec2(Vec2)> vel_init;
    if (cfg.velocity_init == "rotating-frame")
        vel_init = [&u0, eps](Vec2 x) { return u0(x) - x.perp() / (2.0 * eps); };
    else
        vel_init = u0;
    ParticleEnsemble ensemble =
        sample_monokinetic(sweep_vorticity, grid.half_width, vel_init, static_cast<std::size_t>(n_particles),
                           seed, eps);

    auto advance_euler_to = [&](double t) {
        while (t_cur < t - 1e-12) {
            prev = cur;
            t_prev = t_cur;
            step_euler(cur, cfg.euler_dt);
            t_cur += cfg.euler_dt;
        }
    };
    auto blobs_at = [&](double t) {
        if (t >= t_cur || t_cur == t_prev) return cur;
        const double a = (t - t_prev) / (t_cur - t_prev);
        VortexBlobs b = cur;
        for (std::size_t i = 0; i < b.size(); ++i)
            b.pos[i] = prev.pos[i] + a * (cur.pos[i] - prev.pos[i]);
        return b;
    };

    double min_sep = 1e300;
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        for (std::size_t j = i + 1; j < ensemble.size(); ++j)
            min_sep = std::min(min_sep, (ensemble.pos[i] - ensemble.pos[j]).norm());

    // returns false when the energy evaluation itself fails (e.g. a particle
    // left the field grid); the cell aborts with partial rows retained
    auto observe = [&](double t, const EulerFields& fields) {
        try {
            const EnergyBreakdown br = classical_modulated_energy(ensemble, fields, cfg.confinement);
            const double h = hamiltonian(ensemble, mode);
            out.rows.push_back({t, br.total, br.e1, br.e2, br.f_n, br.slack, h, min_sep});
            return true;
        } catch (const std::exception& e) {
            out.status = std::string("energy: ") + e.what();
            return false;
        }
    };

    if (!observe(0.0, fields0)) return out;

    const long steps = std::lround(cfg.t_final / cfg.dt);
    EulerFields last_fields = fields0;
    for (long s = 1; s <= steps; ++s) {
        try {
            if (cfg.scheme == "rk4")
                step_rk4(ensemble, cfg.dt, mode, cfg.min_separation);
            else
                step_strang(ensemble, cfg.dt, mode, cfg.min_separation, &min_sep);
        } catch (const CollisionError& ce) {
            out.status = std::string("collision: ") + ce.what();
            return out;
        }
        for (const Vec2& p : ensemble.pos)
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                out.status = "nonfinite state";
                return out;
            }
        if (s % cfg.stride == 0 || s == steps) {
            const double t = s * cfg.dt;
            advance_euler_to(t);
            try {
                last_fields = fields_from_blobs(blobs_at(t), grid, eps);
            } catch (const std::exception& e) {
                out.status = std::string("euler: ") + e.what();
                return out;
            }
            if (!observe(t, last_fields)) return out;
            if (s == steps) break; // avoid double row when steps % stride == 0
        }
    }

    // weak-convergence observables against the transported vorticity
    const ScalarGrid& omega_t = last_fields.omega;
    auto weak_err = [&](double (*phi)(Vec2)) {
        double grid_part = 0.0;
        for (int i = 0; i < grid.n; ++i)
            for (int j = 0; j < grid.n; ++j) grid_part += phi(grid.center(i, j)) * omega_t.at(i, j);
        grid_part *= grid.cell_area();
        double emp = 0.0;
        for (const Vec2& x : ensemble.pos) emp += phi(x);
        emp /= static_cast<double>(ensemble.size());
        return std::abs(grid_part - emp);
    };
    out.weak1 = weak_err(weak_phi1);
    out.weak2 = weak_err(weak_phi2);
    return out;
}

inline void write_energy_csv(const fs::path& path, const std::vector<EnergyRow>& rows) {
    CsvWriter csv(path.string(), {"t", "E", "E1", "E2", "fN", "slack", "h_eps", "min_sep"});
    for (const EnergyRow& r : rows) csv.row({r.t, r.total, r.e1, r.e2, r.f_n, r.slack, r.h_eps, r.min_sep});
}

// ---------------------------------------------------------------------------
// plot emission (self-contained SVG next to each CSV)

inline void emit_plots(const fs::path& dir) {
    auto energy_plot = [](const fs::path& csv_path) {
        const CsvTable t = read_csv(csv_path.string());
        if (t.rows.empty()) throw std::runtime_error("empty csv: " + csv_path.string());
        const int ct = t.column("t");
        std::vector<SvgSeries> series;
        for (const char* name : {"E", "E1", "E2"}) {
            SvgSeries s;
            s.name = name;
            const int c = t.column(name);
            for (std::size_t r = 0; r < t.rows.size(); ++r) s.points.push_back({t.number(r, ct), t.number(r, c)});
            series.push_back(std::move(s));
        }
        write_line_chart((csv_path.parent_path() / "energy.svg").string(), "modulated energy vs time", "t",
                         "energy", series);
    };

    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "energy.csv") energy_plot(entry.path());
        else if (name == "sweep.csv") {
            const CsvTable t = read_csv(entry.path().string());
            if (t.rows.empty()) throw std::runtime_error("empty csv: " + entry.path().string());
            const int cn = t.column("N"), ce = t.column("eps"), cf = t.column("E_tfinal");
            SvgSeries vs_invn{"E(T)", {}}, vs_eps{"E(T)", {}};
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                vs_invn.points.push_back({1.0 / t.number(r, cn), t.number(r, cf)});
                vs_eps.points.push_back({t.number(r, ce), t.number(r, cf)});
            }
            write_line_chart((entry.path().parent_path() / "sweep_E_vs_invN.svg").string(),
                             "final modulated energy vs 1/N", "1/N", "E(T)", {vs_invn});
            write_line_chart((entry.path().parent_path() / "sweep_E_vs_eps.svg").string(),
                             "final modulated energy vs eps", "eps", "E(T)", {vs_eps});
        } else if (name == "quantize.csv") {
            const CsvTable t = read_csv(entry.path().string());
            if (t.rows.empty()) throw std::runtime_error("empty csv: " + entry.path().string());
            const int ce = t.column("eps");
            std::vector<SvgSeries> series;
            for (const char* col : {"kinetic", "confinement", "abs_I", "abs_J"}) {
                SvgSeries s;
                s.name = col;
                const int c = t.column(col);
                for (std::size_t r = 0; r < t.rows.size(); ++r)
                    s.points.push_back({t.number(r, ce), t.number(r, c)});
                series.push_back(std::move(s));
            }
            write_line_chart((entry.path().parent_path() / "quantize_terms.svg").string(),
                             "initial-energy terms vs eps", "eps", "term", series, /*log_y=*/true);
        } else if (name == "coercivity_medians.csv") {
            const CsvTable t = read_csv(entry.path().string());
            if (t.rows.empty()) throw std::runtime_error("empty csv: " + entry.path().string());
            const int cn = t.column("N");
            std::vector<SvgSeries> series;
            for (const char* col : {"median_phi1", "median_phi2"}) {
                SvgSeries s;
                s.name = col;
                const int c = t.column(col);
                for (std::size_t r = 0; r < t.rows.size(); ++r)
                    s.points.push_back({t.number(r, cn), t.number(r, c)});
                series.push_back(std::move(s));
            }
            write_line_chart((entry.path().parent_path() / "coercivity.svg").string(),
                             "weak-error medians vs N", "N", "median |LHS|", series, /*log_y=*/true);
        } else if (name == "euler.csv") {
            const CsvTable t = read_csv(entry.path().string());
            if (t.rows.empty()) throw std::runtime_error("empty csv: " + entry.path().string());
            const int ct = t.column("t"), cd = t.column("omega_l1_drift");
            SvgSeries s{"|omega(t)-omega(0)|_L1", {}};
            for (std::size_t r = 0; r < t.rows.size(); ++r)
                s.points.push_back({t.number(r, ct), t.number(r, cd)});
            write_line_chart((entry.path().parent_path() / "euler_drift.svg").string(),
                             "vorticity L1 drift vs time", "t", "L1 drift", {s});
        }
    }
}

// ---------------------------------------------------------------------------
// experiment drivers

inline RunOutcome run_nbody(const RunConfig& cfg, const fs::path& dir) {
    RunOutcome out;
    out.dir = dir;
    const CellOutcome cell = run_sweep_cell(cfg, cfg.n_particles, cfg.eps, cfg.seed);
    write_energy_csv(dir / "energy.csv", cell.rows);
    if (cell.status != "ok") out.failures.push_back("cell status: " + cell.status);

    // hard assertions: lower-bound slack and energy conservation bookkeeping
    for (const EnergyRow& r : cell.rows)
        if (r.slack < -1e-3) {
            out.failures.push_back("lower-bound slack violated at t = " + std::to_string(r.t));
            break;
        }
    out.ok = out.failures.empty();
    return out;
}

inline RunOutcome run_euler_kind(const RunConfig& cfg, const fs::path& dir) {
    RunOutcome out;
    out.dir = dir;
    const GridSpec grid(cfg.grid_half_width, cfg.grid_n);
    VortexBlobs blobs = init_blobs_from_vorticity(sweep_vorticity, cfg.blobs, grid);
    const ScalarGrid omega0 = deposit_vorticity(blobs, grid);

    CsvWriter csv((dir / "euler.csv").string(),
                  {"t", "total_circ", "omega_l1_drift", "gradu_p2", "gradu_p4", "gradu_p8", "gradu_p16"});
    const long steps = std::lround(cfg.t_final / cfg.euler_dt);
    const long stride = std::max(1l, steps / 20);
    auto emit = [&](double t) {
        const ScalarGrid w = deposit_vorticity(blobs, grid);
        double drift = 0.0;
        for (std::size_t k = 0; k < w.data().size(); ++k) drift += std::abs(w.data()[k] - omega0.data()[k]);
        drift *= grid.cell_area();
        const EulerFields f = fields_from_vorticity_grid(w, cfg.eps);
        const auto norms = grad_u_norms(f, {2.0, 4.0, 8.0, 16.0});
        csv.row({t, blobs.total_circulation(), drift, norms[0].norm, norms[1].norm, norms[2].norm,
                 norms[3].norm});
    };
    emit(0.0);
    for (long s = 1; s <= steps; ++s) {
        step_euler(blobs, cfg.euler_dt);
        if (s % stride == 0 || s == steps) emit(s * cfg.euler_dt);
    }
    out.ok = true;
    return out;
}

inline RunOutcome run_convergence_sweep(const RunConfig& cfg, const fs::path& dir) {
    RunOutcome out;
    out.dir = dir;
    const std::size_t cells = std::min(cfg.sweep_n.size(), cfg.sweep_eps.size());
    if (cells == 0) {
        out.failures.push_back("sweep lists are empty");
        out.ok = false;
        return out;
    }

    struct Cell {
        long n;
        double eps;
        CellOutcome res;
        fs::path subdir;
    };
    std::vector<Cell> work(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        work[k].n = cfg.sweep_n[k];
        work[k].eps = cfg.sweep_eps[k];
        std::ostringstream name;
        name << "cell_N" << work[k].n << "_eps" << work[k].eps;
        work[k].subdir = dir / name.str();
        fs::create_directories(work[k].subdir);
    }

    // one cell per worker; per-cell seed derived from the master seed
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells) return;
            try {
                work[k].res = run_sweep_cell(cfg, work[k].n, work[k].eps, Rng::derive(cfg.seed, k));
            } catch (const std::exception& e) {
                work[k].res.status = std::string("exception: ") + e.what();
            }
        }
    };
    const int pool_size = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cells)));
    if (pool_size <= 1) {
        worker();
    } else {
        const int saved = worker_count().load();
        set_worker_count(1); // cells own the parallelism budget
        std::vector<std::thread> pool;
        for (int t = 0; t < pool_size; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        set_worker_count(saved);
    }

    CsvWriter sweep((dir / "sweep.csv").string(),
                    {"N", "eps", "hbar", "E_t0", "E_tfinal", "slack_tfinal", "weak_err_phi1",
                     "weak_err_phi2", "status"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const Cell& c : work) {
        write_energy_csv(c.subdir / "energy.csv", c.res.rows);
        const bool empty = c.res.rows.empty();
        const double e_t0 = empty ? nan : c.res.rows.front().total;
        const double e_tf = empty ? nan : c.res.rows.back().total;
        const double slack_tf = empty ? nan : c.res.rows.back().slack;
        sweep.row_raw({CsvWriter::format(static_cast<double>(c.n)), CsvWriter::format(c.eps),
                       CsvWriter::format(cfg.hbar_for(c.eps)), CsvWriter::format(e_t0),
                       CsvWriter::format(e_tf), CsvWriter::format(slack_tf),
                       CsvWriter::format(c.res.weak1), CsvWriter::format(c.res.weak2), c.res.status});
        if (c.res.status != "ok")
            out.failures.push_back("cell N=" + std::to_string(c.n) + ": " + c.res.status);
        for (const EnergyRow& r : c.res.rows)
            if (r.slack < -1e-3) {
                out.failures.push_back("lower-bound slack violated in cell N=" + std::to_string(c.n));
                break;
            }
    }
    sweep.close();
    out.ok = out.failures.empty();
    return out;
}

inline RunOutcome run_quantize_check(const RunConfig& cfg, const fs::path& dir) {
    RunOutcome out;
    out.dir = dir;
    const double grid_l = std::max(3.0, cfg.grid_half_width);
    const GridSpec grid(grid_l, std::max(192, cfg.grid_n));

    std::function<double(Vec2)> density;
    if (cfg.s5_density == "chi-gauss")
        density = [](Vec2 x) { return smooth_cutoff(x.norm(), 1.0, 2.0) * gaussian_density(x, 0.5); };
    else
        density = [](Vec2 x) { return smooth_cutoff(x.norm(), 1.8, 2.4); };

    CsvWriter csv((dir / "quantize.csv").string(),
                  {"eps", "hbar", "kinetic", "confinement", "I", "J", "abs_I", "abs_J", "trace_id_relerr"});
    std::ofstream summary(dir / "summary.txt");
    summary << kVersion << " quantize-check (density = " << cfg.s5_density << ", M = " << cfg.trunc_m
            << ")\n\n";

    std::vector<Section5Report> reps;
    std::vector<bool> in_regime;
    for (double eps : cfg.qc_eps) {
        const double hbar = cfg.hbar_for(eps);
        const GyroSymbol sym = make_gyro_symbol_from(grid, eps, hbar, density, quantize_theta);
        const Section5Report rep = section5_initial_energy(sym, static_cast<double>(cfg.n_particles));
        reps.push_back(rep);
        in_regime.push_back(!rep.out_of_regime);

        // Kinetic trace identity at this (eps, hbar) on a capped-support
        // quadrature of nu (the momentum sheet scales like 1/eps, so the
        // basis resolves only atoms with |z|^2 / 2 hbar within budget).
        double trace_relerr = std::numeric_limits<double>::quiet_NaN();
        {
            const HermiteTruncation t(hbar, cfg.trunc_m);
            const double budget = 0.35 * cfg.trunc_m;
            std::vector<WeightedPhasePoint> atoms;
            double mass = 0.0;
            for (const WeightedPhasePoint& a : gyro_symbol_atoms(sym, std::max(1, grid.n / 64))) {
                const double alpha2 = (a.z.q.norm_sq() + a.z.p.norm_sq()) / (2.0 * hbar);
                if (alpha2 <= budget) {
                    atoms.push_back(a);
                    mass += a.w;
                }
            }
            if (!atoms.empty() && mass > 0.0) {
                for (WeightedPhasePoint& a : atoms) a.w /= mass;
                trace_relerr = kinetic_trace_identity(atoms, eps, t).rel_error;
                if (trace_relerr > 1e-3)
                    out.failures.push_back("kinetic trace identity exceeded tolerance at eps = " +
                                           CsvWriter::format(eps) + " (relerr " +
                                           CsvWriter::format(trace_relerr) + ")");
            } else {
                summary << "eps = " << eps << ": trace check skipped (no atoms within the truncation budget)\n";
            }
        }

        // quadratic-symbol identities at this hbar
        const QuadraticSymbolReport q = quadratic_symbol_identities(HermiteTruncation(hbar, std::min(cfg.trunc_m, 12)));
        if (q.err_q2 > 1e-8) out.failures.push_back("OP(|q|^2) identity exceeded 1e-8 at eps = " + CsvWriter::format(eps));
        if (q.err_p2 > 1e-8) out.failures.push_back("OP(|p|^2) identity exceeded 1e-8 at eps = " + CsvWriter::format(eps));
        if (q.err_one > 1e-3) out.failures.push_back("OP(1) identity exceeded 1e-3 at eps = " + CsvWriter::format(eps));

        csv.row({eps, hbar, rep.kinetic, rep.confinement, rep.term_i, rep.term_j, std::abs(rep.term_i),
                 std::abs(rep.term_j), trace_relerr});

        summary << "eps = " << eps << "  hbar = " << hbar << "  kinetic = " << rep.kinetic
                << "  confinement = " << rep.confinement << "  I = " << rep.term_i << "  J = " << rep.term_j
                << "  trace relerr = " << trace_relerr
                << (rep.out_of_regime ? "  [expected-regime-violation: hbar/eps >= 1, limit trend not expected]"
                                      : "")
                << "\n";
    }
    csv.close();

    // monotone decrease of the four terms across in-regime rows
    for (std::size_t k = 0; k + 1 < reps.size(); ++k) {
        if (!in_regime[k] || !in_regime[k + 1]) continue;
        const Section5Report& a = reps[k];
        const Section5Report& b = reps[k + 1];
        if (!(b.kinetic_correction < a.kinetic_correction))
            out.failures.push_back("kinetic correction not decreasing between rows " + std::to_string(k) +
                                   " and " + std::to_string(k + 1));
        if (!(b.confinement < a.confinement))
            out.failures.push_back("confinement not decreasing between rows " + std::to_string(k) + " and " +
                                   std::to_string(k + 1));
        if (!(std::abs(b.term_i) < std::abs(a.term_i)))
            out.failures.push_back("|I| not decreasing between rows " + std::to_string(k) + " and " +
                                   std::to_string(k + 1));
        if (!(std::abs(b.term_j) < std::abs(a.term_j)))
            out.failures.push_back("|J| not decreasing between rows " + std::to_string(k) + " and " +
                                   std::to_string(k + 1));
    }
    summary << "\n" << (out.failures.empty() ? "PASS" : "FAIL") << "\n";
    for (const std::string& f : out.failures) summary << "  " << f << "\n";
    out.ok = out.failures.empty();
    return out;
}

inline RunOutcome run_coercivity(const RunConfig& cfg, const fs::path& dir) {
    RunOutcome out;
    out.dir = dir;
    const GridSpec grid(cfg.grid_half_width, std::max(cfg.grid_n, 384));
    ScalarGrid mu = ScalarGrid::from_function(grid, coercivity_density);
    const double mass = mu.integral();
    for (double& v : mu.data()) v /= mass;

    CsvWriter csv((dir / "coercivity.csv").string(),
                  {"N", "seed", "phi", "lhs", "c01_norm", "h1_seminorm", "slack_term"});
    std::vector<std::vector<double>> med1, med2;
    std::vector<std::pair<double, double>> fit1;
    for (long n : cfg.coer_n) {
        std::vector<double> l1, l2;
        for (int s = 0; s < cfg.coer_seeds; ++s) {
            const std::uint64_t stream = Rng::derive(cfg.seed, static_cast<std::uint64_t>(n) * 100 + s);
            const ParticleEnsemble e = sample_monokinetic(
                coercivity_density, grid.half_width, [](Vec2) { return Vec2{0, 0}; },
                static_cast<std::size_t>(n), stream, cfg.eps);
            const CoercivityRow r1 = coercivity_check(weak_phi1, "phi1", e.pos, mu);
            const CoercivityRow r2 = coercivity_check(weak_phi2, "phi2", e.pos, mu);
            csv.row({static_cast<double>(n), static_cast<double>(s), 1.0, r1.lhs, r1.c01_norm,
                     r1.h1_seminorm, r1.slack_term});
            csv.row({static_cast<double>(n), static_cast<double>(s), 2.0, r2.lhs, r2.c01_norm,
                     r2.h1_seminorm, r2.slack_term});
            l1.push_back(r1.lhs);
            l2.push_back(r2.lhs);
        }
        std::sort(l1.begin(), l1.end());
        std::sort(l2.begin(), l2.end());
        auto median = [](const std::vector<double>& v) {
            return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        };
        med1.push_back({static_cast<double>(n), median(l1)});
        med2.push_back({static_cast<double>(n), median(l2)});
        fit1.push_back({static_cast<double>(n), median(l1)});
    }
    csv.close();

    CsvWriter med((dir / "coercivity_medians.csv").string(), {"N", "median_phi1", "median_phi2"});
    for (std::size_t k = 0; k < med1.size(); ++k) med.row({med1[k][0], med1[k][1], med2[k][1]});
    med.close();

    const double lambda_hat = fit_coercivity_exponent(fit1);
    std::ofstream summary(dir / "summary.txt");
    summary << kVersion << " coercivity sweep, fitted exponent lambda-hat = " << lambda_hat << "\n";
    for (std::size_t k = 0; k < med1.size(); ++k)
        summary << "N = " << med1[k][0] << "  median|LHS| phi1 = " << med1[k][1]
                << "  phi2 = " << med2[k][1] << "\n";

    for (std::size_t k = 0; k + 1 < med1.size(); ++k) {
        if (!(med1[k + 1][1] < med1[k][1]))
            out.failures.push_back("phi1 median not decreasing from N=" + std::to_string((long)med1[k][0]) +
                                   " to N=" + std::to_string((long)med1[k + 1][0]));
        if (!(med2[k + 1][1] < med2[k][1]))
            out.failures.push_back("phi2 median not decreasing from N=" + std::to_string((long)med2[k][0]) +
                                   " to N=" + std::to_string((long)med2[k + 1][0]));
    }
    out.ok = out.failures.empty();
    return out;
}

// parse + run + manifest + plots; the single entry point behind the CLI
inline RunOutcome dispatch(const RunConfig& cfg) {
    validate_config(cfg);
    const fs::path dir = resolve_out_dir(cfg);
    fs::create_directories(dir);

    RunManifest manifest;
    manifest.started = RunManifest::now_iso();
    manifest.config = {
        {"kind", cfg.kind},
        {"seed", std::to_string(cfg.seed)},
        {"grid_L", CsvWriter::format(cfg.grid_half_width)},
        {"grid_n", std::to_string(cfg.grid_n)},
        {"N", std::to_string(cfg.n_particles)},
        {"eps", CsvWriter::format(cfg.eps)},
        {"hbar_rule_k", CsvWriter::format(cfg.hbar_rule_k)},
        {"dt", CsvWriter::format(cfg.dt)},
        {"T", CsvWriter::format(cfg.t_final)},
        {"stride", std::to_string(cfg.stride)},
        {"magnetic", cfg.magnetic ? "true" : "false"},
        {"confinement", cfg.confinement ? "true" : "false"},
        {"scheme", cfg.scheme},
        {"velocity_init", cfg.velocity_init},
        {"s5_density", cfg.s5_density},
        {"jobs", std::to_string(cfg.jobs)},
    };

    set_worker_count(cfg.jobs);
    RunOutcome out;
    try {
        if (cfg.kind == "nbody") out = run_nbody(cfg, dir);
        else if (cfg.kind == "euler") out = run_euler_kind(cfg, dir);
        else if (cfg.kind == "sweep") out = run_convergence_sweep(cfg, dir);
        else if (cfg.kind == "quantize-check") out = run_quantize_check(cfg, dir);
        else out = run_coercivity(cfg, dir);
    } catch (const std::exception& e) {
        out.ok = false;
        out.failures.push_back(std::string("exception: ") + e.what());
        out.dir = dir;
    }

    try {
        emit_plots(dir);
    } catch (const std::exception& e) {
        out.ok = false;
        out.failures.push_back(std::string("plot emission: ") + e.what());
    }
    if (!out.failures.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const std::string& f : out.failures) j.push_back(f);
        std::ofstream fails(dir / "failures.json");
        fails << j.dump(2) << "\n";
    }
    manifest.status = out.ok ? "ok" : "failed";
    manifest.finalize(dir);
    return out;
}

} // namespace gyrolim
