// Acceptance suite: one pass/fail line per criterion, exit code 0 iff all
// criteria pass. Runs at the stated scales; the convergence sweep dominates
// the runtime (a few minutes single-threaded).

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "gyrolim/energy.hpp"
#include "gyrolim/euler.hpp"
#include "gyrolim/experiments.hpp"
#include "gyrolim/nbody.hpp"
#include "gyrolim/quantize.hpp"
#include "test_helpers.hpp"

using namespace gyrolim;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", num, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ---- criterion 1: exact lower bound --------------------------------------
void criterion_lower_bound() {
    const GridSpec spec(2.0, 128);
    Rng rng(20240601);
    bool pass = true;
    double worst = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        const ScalarGrid mu = testutil::random_smooth_density(spec, rng);
        const int n = 4 << (trial % 7); // 4 .. 256
        std::vector<Vec2> xs;
        for (int i = 0; i < n; ++i) xs.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
        const double slack = lower_bound_slack(xs, mu);
        const double tol = -1e-4 * (1.0 + mu.max_abs());
        worst = std::min(worst, slack);
        if (slack < tol) pass = false;
    }
    report(1, "lower-bound slack >= -1e-4 (1 + ||mu||_inf), 200 randomized configurations", pass,
           "worst slack " + fmt(worst));
}

// ---- criterion 2: kinetic trace identity ----------------------------------
void criterion_kinetic_trace() {
    const double eps = 0.5, hbar = 0.1;
    std::vector<WeightedPhasePoint> atoms;
    Rng rng(77);
    double wsum = 0.0;
    for (int k = 0; k < 12; ++k) {
        WeightedPhasePoint a;
        a.z.q = {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
        a.z.p = Vec2{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)} - a.z.q.perp() / (2.0 * eps);
        a.w = rng.uniform(0.2, 1.0);
        wsum += a.w;
        atoms.push_back(a);
    }
    for (auto& a : atoms) a.w /= wsum;

    double err16 = 0.0, err24 = 0.0, err32 = 0.0;
    for (int m : {16, 24, 32}) {
        const KineticTraceResult r = kinetic_trace_identity(atoms, eps, HermiteTruncation(hbar, m));
        (m == 16 ? err16 : m == 24 ? err24 : err32) = r.rel_error;
    }
    const bool pass = err24 < 1e-4 && err32 < err16;
    report(2, "kinetic trace identity, relative 1e-4 at M = 24, error decreasing from M = 16 to 32", pass,
           "relerr M=16/24/32: " + fmt(err16) + "/" + fmt(err24) + "/" + fmt(err32));
}

// ---- criterion 3: quadratic symbol identities ------------------------------
void criterion_quadratic_symbols() {
    const QuadraticSymbolReport rep = quadratic_symbol_identities(HermiteTruncation(0.1, 12));
    const bool pass = rep.err_q2 < 1e-8 && rep.err_p2 < 1e-8;
    report(3, "Toeplitz quadratic-symbol identities, interior block within 1e-8", pass,
           "err |q|^2: " + fmt(rep.err_q2) + ", err |p|^2: " + fmt(rep.err_p2) +
               ", err OP(1): " + fmt(rep.err_one));
}

// ---- criterion 4: section-5 limit trends -----------------------------------
void criterion_section5_trends() {
    const GridSpec spec(3.0, 256);
    auto flat_top = [](Vec2 x) { return smooth_cutoff(x.norm(), 1.8, 2.4); };
    std::vector<Section5Report> reps;
    bool correction_exact = true;
    for (double eps : {0.2, 0.1, 0.05}) {
        const GyroSymbol sym = make_gyro_symbol_from(spec, eps, eps * eps, flat_top, quantize_theta);
        reps.push_back(section5_initial_energy(sym));
        const double want = eps * eps / (4.0 * eps) + eps * eps * eps;
        if (std::abs(reps.back().kinetic_correction - want) > 1e-12) correction_exact = false;
    }
    bool monotone = true;
    for (std::size_t k = 0; k + 1 < reps.size(); ++k) {
        monotone = monotone && reps[k + 1].kinetic_correction < reps[k].kinetic_correction &&
                   reps[k + 1].confinement < reps[k].confinement &&
                   std::abs(reps[k + 1].term_i) < std::abs(reps[k].term_i) &&
                   std::abs(reps[k + 1].term_j) < std::abs(reps[k].term_j);
    }
    std::ostringstream detail;
    detail << "|I|: " << fmt(std::abs(reps[0].term_i)) << "/" << fmt(std::abs(reps[1].term_i)) << "/"
           << fmt(std::abs(reps[2].term_i)) << ", |J|: " << fmt(std::abs(reps[0].term_j)) << "/"
           << fmt(std::abs(reps[1].term_j)) << "/" << fmt(std::abs(reps[2].term_j));
    report(4, "section-5 terms decrease along hbar = eps^2; kinetic correction exact to 1e-12",
           monotone && correction_exact, detail.str());
}

// ---- criterion 5: classical energy conservation ----------------------------
void criterion_energy_conservation() {
    auto density = [](Vec2 p) { return p.norm_sq() < 1.0 ? 1.0 / kPi : 0.0; };
    auto u0 = [](Vec2 p) { return 0.3 * p.perp(); };
    ParticleEnsemble e = sample_monokinetic(density, 1.0, u0, 64, 42, 0.1);
    const double h0 = hamiltonian(e, ForceMode::magnetic);
    double drift = 0.0;
    for (int s = 0; s < 1000; ++s) {
        step_strang(e, 1e-3, ForceMode::magnetic);
        drift = std::max(drift, std::abs(hamiltonian(e, ForceMode::magnetic) - h0));
    }
    const double rel = drift / (std::abs(h0) + 1.0);
    report(5, "hamiltonian drift < 1e-6 relative at N = 64, eps = 0.1, T = 1, dt = 1e-3", rel < 1e-6,
           "relative drift " + fmt(rel));
}

// ---- criterion 6: convergence trend along the diagonal ---------------------
void criterion_convergence_trend() {
    RunConfig cfg;
    cfg.kind = "sweep";
    cfg.seed = 1;
    cfg.seed_set = true;
    cfg.t_final = 0.5;
    cfg.dt = 1e-3;
    cfg.stride = 100;
    cfg.grid_half_width = 2.0;
    cfg.grid_n = 512;
    cfg.blobs = 4096;
    cfg.euler_dt = 5e-3;

    const long ns[3] = {1024, 4096, 16384};
    const double epss[3] = {0.2, 0.1, 0.05};
    double e_final[3], e_max[3], weak1[3];
    bool all_ok = true;
    for (int k = 0; k < 3; ++k) {
        const CellOutcome cell = run_sweep_cell(cfg, ns[k], epss[k], Rng::derive(cfg.seed, k));
        all_ok = all_ok && cell.status == "ok" && !cell.rows.empty();
        e_final[k] = cell.rows.empty() ? 1e300 : cell.rows.back().total;
        e_max[k] = 0.0;
        for (const EnergyRow& r : cell.rows) e_max[k] = std::max(e_max[k], r.total);
        weak1[k] = cell.weak1;
    }
    const bool e_down = e_final[1] < e_final[0] && e_final[2] < e_final[1];
    const bool w_down = weak1[1] < weak1[0] && weak1[2] < weak1[1];
    std::ostringstream detail;
    detail << "E(T): " << fmt(e_final[0]) << "/" << fmt(e_final[1]) << "/" << fmt(e_final[2])
           << ", weak_err_phi1: " << fmt(weak1[0]) << "/" << fmt(weak1[1]) << "/" << fmt(weak1[2]);
    report(6, "modulated energy and weak error decrease along the (N, eps) diagonal",
           all_ok && e_down && w_down, detail.str());
    // Context: at a fixed comparison time the kinetic term carries the gyro
    // phase factor (1 - cos(T/eps)), which mixes phases across eps. The
    // per-cell envelope shows the limit scaling directly.
    std::printf("info  criterion 6 envelope max_t E per cell: %s/%s/%s (monotone: %s)\n",
                fmt(e_max[0]).c_str(), fmt(e_max[1]).c_str(), fmt(e_max[2]).c_str(),
                (e_max[1] < e_max[0] && e_max[2] < e_max[1]) ? "yes" : "no");
}

// ---- criterion 7: coercivity medians ----------------------------------------
void criterion_coercivity() {
    const GridSpec grid(2.0, 384);
    ScalarGrid mu = ScalarGrid::from_function(grid, coercivity_density);
    const double mass = mu.integral();
    for (double& v : mu.data()) v /= mass;

    double med1[3], med2[3];
    const long ns[3] = {64, 256, 1024};
    for (int k = 0; k < 3; ++k) {
        std::vector<double> l1, l2;
        for (int s = 0; s < 20; ++s) {
            const std::uint64_t stream = Rng::derive(7, static_cast<std::uint64_t>(ns[k]) * 100 + s);
            const ParticleEnsemble e = sample_monokinetic(
                coercivity_density, grid.half_width, [](Vec2) { return Vec2{0, 0}; },
                static_cast<std::size_t>(ns[k]), stream, 0.1);
            // the LHS of the coercivity estimate; norms are not needed here
            auto lhs = [&](double (*phi)(Vec2)) {
                double grid_part = 0.0;
                for (int i = 0; i < grid.n; ++i)
                    for (int j = 0; j < grid.n; ++j) grid_part += phi(grid.center(i, j)) * mu.at(i, j);
                grid_part *= grid.cell_area();
                double emp = 0.0;
                for (const Vec2& x : e.pos) emp += phi(x);
                return std::abs(grid_part - emp / static_cast<double>(e.size()));
            };
            l1.push_back(lhs(weak_phi1));
            l2.push_back(lhs(weak_phi2));
        }
        med1[k] = testutil::median(l1);
        med2[k] = testutil::median(l2);
    }
    const bool pass = med1[1] < med1[0] && med1[2] < med1[1] && med2[1] < med2[0] && med2[2] < med2[1];
    std::ostringstream detail;
    detail << "phi1 medians: " << fmt(med1[0]) << "/" << fmt(med1[1]) << "/" << fmt(med1[2])
           << ", phi2: " << fmt(med2[0]) << "/" << fmt(med2[1]) << "/" << fmt(med2[2]);
    report(7, "median coercivity LHS decreases across N = 64, 256, 1024 for both test functions", pass,
           detail.str());
}

// ---- criterion 8: algebraic oracles -----------------------------------------
void criterion_algebraic_oracles() {
    bool pass = true;
    std::ostringstream detail;

    // E2 = f_N / 2 via the two independent reductions
    {
        const GridSpec spec(2.0, 256);
        const ScalarGrid omega = [&] {
            ScalarGrid g = ScalarGrid::from_function(
                spec, [](Vec2 p) { return testutil::smooth_bump(p.norm(), 0.7, 1.1); });
            const double m = g.integral();
            for (double& v : g.data()) v /= m;
            return g;
        }();
        const EulerFields fields = fields_from_vorticity_grid(omega, 0.1);
        Rng rng(5150);
        ParticleEnsemble e;
        e.eps = 0.1;
        for (int i = 0; i < 48; ++i) {
            e.pos.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            e.vel.push_back(fields.u.interpolate(e.pos.back()));
        }
        const EnergyBreakdown br = classical_modulated_energy(e, fields, false);
        const double gap = std::abs(br.e2 - br.f_n / 2.0);
        pass = pass && gap < 1e-10;
        detail << "E2 vs fN/2 gap " << fmt(gap);
    }

    // marginal identity on an enumerable mixture
    {
        const GridSpec spec(2.0, 64);
        Rng rng(31);
        const ScalarGrid mu = testutil::random_smooth_density(spec, rng);
        const std::vector<std::vector<Vec2>> mix{{{0.1, 0.0}, {0.5, -0.2}, {-0.2, 0.6}},
                                                 {{-0.3, 0.4}, {0.0, 0.9}, {0.7, 0.1}}};
        auto [lhs, rhs] = marginal_identity_check(mix, {0.25, 0.75}, mu,
                                                  [](Vec2 p) { return std::cos(p.x) + 0.5 * p.y; });
        const double gap = std::abs(lhs - rhs);
        pass = pass && gap < 1e-12;
        detail << ", marginal identity gap " << fmt(gap);
    }

    // gradu contraction vs -2 det(grad u)
    {
        const GridSpec spec(2.0, 128);
        const double var = 0.2;
        const EulerFields f = fields_from_vorticity_grid(
            ScalarGrid::from_function(
                spec, [&](Vec2 p) { return std::exp(-p.norm_sq() / (2.0 * var)) / (kTwoPi * var); }),
            0.1);
        double worst = 0.0;
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) {
                const double det =
                    f.dux_dx.at(i, j) * f.duy_dy.at(i, j) - f.dux_dy.at(i, j) * f.duy_dx.at(i, j);
                worst = std::max(worst, std::abs(f.gradu_sq_trace.at(i, j) + 2.0 * det));
            }
        const double h = spec.spacing();
        pass = pass && worst <= 10.0 * h * h;
        detail << ", contraction residual " << fmt(worst);
    }

    // gaussian semigroup on the grid
    {
        const GridSpec spec(8.0, 512);
        const ScalarGrid gb =
            ScalarGrid::from_function(spec, [](Vec2 p) { return gaussian_density(p, 0.25); });
        const ScalarGrid conv = free_space_convolve(gb, KernelChoice::gaussian, 0.25);
        double err = 0.0;
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j)
                err = std::max(err, std::abs(conv.at(i, j) - gaussian_density(spec.center(i, j), 0.5)));
        pass = pass && err < 1e-6;
        detail << ", semigroup err " << fmt(err);
    }

    report(8, "algebraic oracles (E2 = fN/2, marginal identity, gradu contraction, gaussian semigroup)",
           pass, detail.str());
}

// ---- criterion 9: euler solver sanity ----------------------------------------
void criterion_euler_sanity() {
    bool pass = true;
    std::ostringstream detail;

    // radial steadiness at t = 1
    {
        const GridSpec spec(2.0, 256);
        auto w0 = [](Vec2 p) {
            const double r = p.norm();
            return std::exp(-r * r / 0.32) * testutil::smooth_bump(r, 1.0, 1.4);
        };
        VortexBlobs blobs = init_blobs_from_vorticity(w0, 1024, spec);
        const ScalarGrid before = deposit_vorticity(blobs, spec);
        for (int s = 0; s < 40; ++s) step_euler(blobs, 0.025);
        const ScalarGrid after = deposit_vorticity(blobs, spec);
        double l1 = 0.0;
        for (std::size_t k = 0; k < after.data().size(); ++k)
            l1 += std::abs(after.data()[k] - before.data()[k]);
        l1 *= spec.cell_area();
        pass = pass && l1 < 0.01;
        detail << "radial L1 drift " << fmt(l1);
    }

    // co-rotating pair period
    {
        const double d = 1.0;
        const double period = 4.0 * kPi * kPi * d * d;
        VortexBlobs pair;
        pair.pos = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
        pair.gamma = {0.5, 0.5};
        pair.delta = 1e-3;
        const std::vector<Vec2> start = pair.pos;
        for (int s = 0; s < 200; ++s) step_euler(pair, period / 200.0);
        double ret = 0.0;
        for (int i = 0; i < 2; ++i) ret = std::max(ret, (pair.pos[i] - start[i]).norm());
        pass = pass && ret < 1e-4 * d;
        detail << ", pair return error " << fmt(ret);
    }

    report(9, "euler sanity (radial steadiness 1% at t = 1; pair returns within 1e-4 d)", pass,
           detail.str());
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_lower_bound();
    criterion_kinetic_trace();
    criterion_quadratic_symbols();
    criterion_section5_trends();
    criterion_energy_conservation();
    criterion_coercivity();
    criterion_algebraic_oracles();
    criterion_euler_sanity();
    criterion_convergence_trend(); // the long one last
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d/9 criteria passed in %.1f s\n", 9 - g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
