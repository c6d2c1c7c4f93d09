#ifndef QRTEBD_RUN_HPP
#define QRTEBD_RUN_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "qrtebd/gates.hpp"
#include "qrtebd/tensor.hpp"

namespace qrtebd {

/// Full description of a quench run. The JSON form groups the fields as
/// model / system / evolution / truncation / output; parsing is strict and
/// rejects unknown keys.
struct RunConfig {
  // model
  std::size_t d = 5;
  double g = 2.0;
  // system
  std::string system_kind = "uniform";  // "uniform" | "finite"
  std::size_t system_size = 2;          // unit cell length or chain length
  // evolution
  double dt = 0.05;
  double t_max = 1.0;
  int trotter_order = 2;
  // truncation
  Scheme scheme = Scheme::qr_cbe;
  std::size_t chi_max = 256;
  double sv_cutoff = 1e-14;
  double target_eps = 0.0;
  std::size_t delta_chi_abs = 100;
  double delta_chi_rel = 0.1;
  // output
  std::string out_path;  // empty: keep results in memory only
  std::size_t checkpoint_every = 0;

  // not part of the JSON schema; threaded through by `verify --fault-skip-renorm`
  bool fault_skip_renormalize = false;
  // not part of the JSON schema; per-step stdout lines from the CLI
  bool print_progress = false;

  TruncationPolicy policy() const;
  void validate() const;
};

RunConfig config_from_json(const std::string& text);
RunConfig config_from_json_file(const std::string& path);
std::string config_to_json(const RunConfig& config);

/// Per-step record of the observable trajectory. Wall time stays out of the
/// CSV files so identical configs produce bitwise-identical bodies.
struct TimeSeriesRow {
  double t = 0.0;
  std::vector<cplx> z;           // per site
  std::vector<double> entropy;   // per reported bond
  std::vector<double> eps;       // per reported bond, max over the step's gates
  std::vector<std::size_t> chi;  // per reported bond
  std::vector<std::size_t> bond_ids;
  double max_eps = 0.0;
  std::size_t max_chi = 0;
  double wall_seconds = 0.0;  // cumulative
};

struct QuenchResult {
  std::vector<TimeSeriesRow> rows;
};

/// Evolve the g-quench from the Z=1 product state, writing observables.csv,
/// bonds.csv, config.json and checkpoints under out_path (when set).
QuenchResult run_quench(const RunConfig& config);

// --- single-gate timing benchmark ---

struct BenchConfig {
  std::vector<std::size_t> d_list = {5, 8, 11, 14, 17, 20};
  std::vector<std::size_t> chi_list = {64};
  std::vector<Scheme> schemes = {Scheme::svd, Scheme::eig, Scheme::qr,
                                 Scheme::qr_cbe};
  int repetitions = 10;  // after one discarded warm-up
  /// Small cells repeat beyond `repetitions` until this much measured time
  /// has accumulated, which keeps their means stable; the record reports
  /// the count actually used.
  double min_cell_seconds = 0.5;
  double g = 2.0;
  double dt = 0.05;
  std::size_t max_bytes = std::size_t(4) << 30;
  int jobs = 1;  // parallelism across grid cells only, never inside a timing
  std::string out_path;  // bench.csv destination; empty: in-memory only
};

struct BenchRecord {
  std::size_t d = 0;
  std::size_t chi = 0;
  Scheme scheme = Scheme::svd;
  int repetitions = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
};

std::vector<BenchRecord> run_gate_bench(const BenchConfig& config);

/// Ordinary least squares slope of log(time) vs log(d) for one scheme/chi.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- invariant verification ---

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
  std::string to_json() const;
};

/// Desk-scale invariant suite: isometry checks, ED-oracle comparisons for
/// d=2 and d=3 chains, Trotter-order convergence, cross-scheme agreement and
/// norm conservation. The fault flag disables bond renormalization so the
/// norm check must fail (negative test of the harness itself).
VerifyReport run_verify(bool fault_skip_renormalize = false);

/// Max over steps and sites of |<Z_n>_TEBD - <Z_n>_ED| for a finite-chain
/// quench from the Z=1 product state.
double finite_quench_max_z_error(std::size_t d, std::size_t n_sites, double g,
                                 double dt, double t_max, int order,
                                 Scheme scheme, std::size_t chi_max);

}  // namespace qrtebd

#endif
