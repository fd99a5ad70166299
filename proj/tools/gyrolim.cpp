// gyrolim — experiment driver for the magnetized mean-field laboratory.
//
//   gyrolim <kind> --config <path> [--out <dir>] [--seed <u64>] [--jobs <k>]
//
// kinds: euler | nbody | sweep | quantize-check | coercivity.
// The config file is flat `key = value` text; see --help for keys and
// defaults. GYROLIM_OUT, when set, becomes the root of the output directory.
// Exit code 0 iff all hard assertions passed; otherwise failures.json in the
// output directory lists what failed.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gyrolim/experiments.hpp"

namespace {

constexpr const char* kConfigHelp = R"(config keys (defaults in parentheses):
  kind            euler|nbody|sweep|quantize-check|coercivity (from subcommand)
  seed            RNG seed; mandatory for nbody, sweep, coercivity
  out             output directory (runs/out); GYROLIM_OUT prefixes it
  grid_L, grid_n  grid half-width (2.0) and cells per axis (256, even, >= 16)
  N               particle count for nbody (64)
  eps             magnetic parameter (0.1)
  hbar            explicit hbar; unset -> scaling rule
  hbar_rule_k     hbar = eps^k rule (2.0)
  dt, T           particle time step (1e-3) and final time (1.0)
  stride          observer stride in steps (100)
  magnetic        true|false (true); false integrates the plain system
  confinement     include the quadratic confinement in E1 (false)
  velocity_init   monokinetic | rotating-frame (monokinetic)
  min_sep         collision guard distance (1e-8)
  scheme          strang | rk4 (strang)
  sweep_N         comma list (1024,4096,16384), paired with sweep_eps
  sweep_eps       comma list (0.2,0.1,0.05)
  blobs           vortex blob target count (4096)
  euler_dt        blob integrator step (5e-3)
  trunc_M         Hermite truncation degree (16)
  qc_eps          quantize-check eps sweep (0.2,0.1,0.05)
  s5_density      flat-top | chi-gauss (flat-top)
  coer_N          coercivity N sweep (64,256,1024)
  coer_seeds      seeds per N (20)
  jobs            worker threads (1)
)";

int run_kind(const std::string& kind, const std::string& config_path, const std::string& out_override,
             long long seed_override, bool seed_given, int jobs_override) {
    try {
        gyrolim::RunConfig cfg = gyrolim::parse_config(config_path);
        if (cfg.kind.empty()) cfg.kind = kind;
        if (cfg.kind != kind) {
            std::cerr << "config kind '" << cfg.kind << "' conflicts with subcommand '" << kind << "'\n";
            return 2;
        }
        if (!out_override.empty()) cfg.out = out_override;
        if (seed_given) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
            cfg.seed_set = true;
        }
        if (jobs_override > 0) cfg.jobs = jobs_override;

        const gyrolim::RunOutcome out = gyrolim::dispatch(cfg);
        std::cout << "run directory: " << out.dir.string() << "\n";
        if (out.ok) {
            std::cout << "PASS\n";
            return 0;
        }
        std::cerr << "FAIL (" << out.failures.size() << " issue(s); see failures.json)\n";
        for (const std::string& f : out.failures) std::cerr << "  " << f << "\n";
        return 1;
    } catch (const gyrolim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gyrolim: desk-scale laboratory for the magnetized mean-field limit"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);

    std::string config_path, out_override;
    long long seed_override = 0;
    int jobs_override = 0;

    for (const std::string kind : {"euler", "nbody", "sweep", "quantize-check", "coercivity"}) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", config_path, "path to the key = value config file")->required();
        sub->add_option("--out", out_override, "override the output directory");
        CLI::Option* seed_opt = sub->add_option("--seed", seed_override, "override the RNG seed");
        sub->add_option("--jobs", jobs_override, "override the worker thread count");
        sub->callback([&, kind, seed_opt] {
            std::exit(run_kind(kind, config_path, out_override, seed_override, seed_opt->count() > 0,
                               jobs_override));
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
