#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrtebd/errors.hpp"
#include "qrtebd/run.hpp"

namespace {

using namespace qrtebd;

int g_exit_code = 0;

void setup_quench(CLI::App* cmd) {
  struct Args {
    std::string config_path, out, kind, scheme;
    std::size_t d = 0, size = 0, chi_max = 0, delta_abs = 0, ckpt = 0;
    double g = 0, dt = 0, t_max = 0, cutoff = 0, delta_rel = 0, target_eps = 0;
    int order = 0;
  };
  auto a = std::make_shared<Args>();

  auto* o_config =
      cmd->add_option("--config", a->config_path, "JSON config file");
  auto* o_d = cmd->add_option("--d", a->d, "local Hilbert space dimension");
  auto* o_g = cmd->add_option("--g", a->g, "transverse coupling after the quench");
  auto* o_kind = cmd->add_option("--kind", a->kind, "uniform | finite");
  auto* o_size = cmd->add_option("--size", a->size, "unit cell / chain length");
  auto* o_dt = cmd->add_option("--dt", a->dt, "Trotter time step");
  auto* o_tmax = cmd->add_option("--t-max", a->t_max, "evolve until this time");
  auto* o_order = cmd->add_option("--order", a->order, "Trotter order (1 or 2)");
  auto* o_scheme =
      cmd->add_option("--scheme", a->scheme, "svd | eig | qr | qr_cbe");
  auto* o_chi = cmd->add_option("--chi-max", a->chi_max, "bond dimension cap");
  auto* o_cut = cmd->add_option("--cutoff", a->cutoff, "Schmidt value cutoff");
  auto* o_teps =
      cmd->add_option("--target-eps", a->target_eps, "truncation error budget");
  auto* o_dabs = cmd->add_option("--delta-chi-abs", a->delta_abs,
                                 "absolute bond expansion increment");
  auto* o_drel = cmd->add_option("--delta-chi-rel", a->delta_rel,
                                 "relative bond expansion increment");
  auto* o_out = cmd->add_option("--out", a->out, "output directory");
  auto* o_ckpt = cmd->add_option("--checkpoint-every", a->ckpt,
                                 "checkpoint cadence in steps (0: final only)");

  cmd->callback([=]() {
    RunConfig cfg;
    if (o_config->count()) cfg = config_from_json_file(a->config_path);
    if (o_d->count()) cfg.d = a->d;
    if (o_g->count()) cfg.g = a->g;
    if (o_kind->count()) cfg.system_kind = a->kind;
    if (o_size->count()) cfg.system_size = a->size;
    if (o_dt->count()) cfg.dt = a->dt;
    if (o_tmax->count()) cfg.t_max = a->t_max;
    if (o_order->count()) cfg.trotter_order = a->order;
    if (o_scheme->count()) cfg.scheme = scheme_from_name(a->scheme);
    if (o_chi->count()) cfg.chi_max = a->chi_max;
    if (o_cut->count()) cfg.sv_cutoff = a->cutoff;
    if (o_teps->count()) cfg.target_eps = a->target_eps;
    if (o_dabs->count()) cfg.delta_chi_abs = a->delta_abs;
    if (o_drel->count()) cfg.delta_chi_rel = a->delta_rel;
    if (o_out->count()) cfg.out_path = a->out;
    if (o_ckpt->count()) cfg.checkpoint_every = a->ckpt;
    cfg.print_progress = true;

    const QuenchResult res = run_quench(cfg);
    if (!res.rows.empty()) {
      const TimeSeriesRow& last = res.rows.back();
      std::printf("done: %zu steps to t=%g, max_chi=%zu, wall=%.1fs\n",
                  res.rows.size(), last.t, last.max_chi, last.wall_seconds);
      if (!cfg.out_path.empty())
        std::printf(
            "wrote %s/{observables.csv,bonds.csv,config.json,state.mps}\n",
            cfg.out_path.c_str());
    }
  });
}

void setup_bench(CLI::App* cmd) {
  auto cfg = std::make_shared<BenchConfig>();
  auto scheme_names = std::make_shared<std::vector<std::string>>(
      std::vector<std::string>{"svd", "eig", "qr", "qr_cbe"});

  cmd->add_option("--d-list", cfg->d_list, "physical dimensions")
      ->delimiter(',');
  cmd->add_option("--chi-list", cfg->chi_list, "bond dimensions")
      ->delimiter(',');
  cmd->add_option("--schemes", *scheme_names, "truncation schemes")
      ->delimiter(',');
  cmd->add_option("--reps", cfg->repetitions, "timed repetitions per cell");
  cmd->add_option("--min-cell-seconds", cfg->min_cell_seconds,
                  "keep repeating small cells until this much time is measured");
  cmd->add_option("--g", cfg->g, "clock model coupling for the gate");
  cmd->add_option("--dt", cfg->dt, "time step for the gate");
  cmd->add_option("--max-bytes", cfg->max_bytes, "memory budget per cell");
  cmd->add_option("--jobs", cfg->jobs,
                  "parallel cells (timings stay serial inside)");
  cmd->add_option("--out", cfg->out_path, "bench.csv destination");

  cmd->callback([cfg, scheme_names]() {
    cfg->schemes.clear();
    for (const std::string& n : *scheme_names)
      cfg->schemes.push_back(scheme_from_name(n));
    const auto records = run_gate_bench(*cfg);
    std::printf("%-4s %-6s %-8s %-14s %-14s\n", "d", "chi", "scheme",
                "mean_seconds", "stddev");
    for (const BenchRecord& r : records)
      std::printf("%-4zu %-6zu %-8s %-14.6g %-14.3g\n", r.d, r.chi,
                  scheme_name(r.scheme).c_str(), r.mean_seconds,
                  r.stddev_seconds);
  });
}

void setup_verify(CLI::App* cmd) {
  auto fault = std::make_shared<bool>(false);
  auto json_path = std::make_shared<std::string>();
  cmd->add_flag("--fault-skip-renorm", *fault,
                "disable bond renormalization (the norm check must then fail)");
  cmd->add_option("--json", *json_path,
                  "write the machine-readable summary here");

  cmd->callback([fault, json_path]() {
    const VerifyReport report = run_verify(*fault);
    for (const VerifyCheck& c : report.checks)
      std::printf("%-26s %s  value=%.3e threshold=%.3e\n", c.name.c_str(),
                  c.pass ? "PASS" : "FAIL", c.value, c.threshold);
    const std::string summary = report.to_json();
    if (!json_path->empty()) {
      FILE* f = std::fopen(json_path->c_str(), "w");
      if (!f) throw InputError("cannot write summary: " + *json_path);
      std::fputs(summary.c_str(), f);
      std::fclose(f);
    } else {
      std::fputs(summary.c_str(), stdout);
    }
    g_exit_code = report.all_pass() ? 0 : 1;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TEBD for matrix-product states with QR-based truncation"};
  app.require_subcommand(1);

  setup_quench(app.add_subcommand("quench", "global quench of the clock model"));
  setup_bench(app.add_subcommand("bench-gate", "single-gate timing benchmark"));
  setup_verify(app.add_subcommand("verify", "run the invariant suite"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  } catch (const qrtebd::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const qrtebd::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const qrtebd::CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 3;
  } catch (const qrtebd::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 2;
  }
  return g_exit_code;
}
