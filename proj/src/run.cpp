#include "qrtebd/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "qrtebd/clock.hpp"
#include "qrtebd/errors.hpp"
#include "qrtebd/linalg.hpp"
#include "qrtebd/mps.hpp"

namespace qrtebd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<cplx> z1_local_vector(std::size_t d) {
  std::vector<cplx> v(d, cplx(0.0));
  v[0] = 1.0;
  return v;
}

std::vector<cplx> z1_product_statevector(std::size_t d, std::size_t n_sites) {
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n_sites; ++k) dim *= d;
  std::vector<cplx> psi(dim, cplx(0.0));
  psi[0] = 1.0;  // |0...0> is the Z=1 product state
  return psi;
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw InputError("config section '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw InputError("unknown config key: " + where + "." + it.key());
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

TruncationPolicy RunConfig::policy() const {
  TruncationPolicy p;
  p.chi_max = chi_max;
  p.sv_cutoff = sv_cutoff;
  p.target_eps = target_eps;
  p.delta_chi_abs = delta_chi_abs;
  p.delta_chi_rel = delta_chi_rel;
  p.skip_renormalize = fault_skip_renormalize;
  return p;
}

void RunConfig::validate() const {
  if (d < 2) throw InputError("model.d must be >= 2");
  if (system_kind != "uniform" && system_kind != "finite")
    throw InputError("system.kind must be 'uniform' or 'finite'");
  if (system_size < 2) throw InputError("system.size must be >= 2");
  if (system_kind == "uniform" && system_size % 2 != 0)
    throw InputError("uniform unit cell must have even length");
  if (!(dt > 0.0)) throw InputError("evolution.dt must be positive");
  if (t_max < dt) throw InputError("evolution.t_max must be >= dt");
  if (trotter_order != 1 && trotter_order != 2)
    throw InputError("evolution.trotter_order must be 1 or 2");
  if (chi_max < 1) throw InputError("truncation.chi_max must be >= 1");
  if (sv_cutoff < 0.0) throw InputError("truncation.sv_cutoff must be >= 0");
  if (delta_chi_rel < 0.0)
    throw InputError("truncation.delta_chi_rel must be >= 0");
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j, "<root>", {"model", "system", "evolution", "truncation", "output"});

  RunConfig c;
  if (j.contains("model")) {
    const json& m = j["model"];
    expect_keys(m, "model", {"d", "g"});
    read_field(m, "d", c.d);
    read_field(m, "g", c.g);
  }
  if (j.contains("system")) {
    const json& s = j["system"];
    expect_keys(s, "system", {"kind", "size"});
    read_field(s, "kind", c.system_kind);
    read_field(s, "size", c.system_size);
  }
  if (j.contains("evolution")) {
    const json& e = j["evolution"];
    expect_keys(e, "evolution", {"dt", "t_max", "trotter_order"});
    read_field(e, "dt", c.dt);
    read_field(e, "t_max", c.t_max);
    read_field(e, "trotter_order", c.trotter_order);
  }
  if (j.contains("truncation")) {
    const json& t = j["truncation"];
    expect_keys(t, "truncation",
                {"scheme", "chi_max", "sv_cutoff", "target_eps",
                 "delta_chi_abs", "delta_chi_rel"});
    std::string scheme = scheme_name(c.scheme);
    read_field(t, "scheme", scheme);
    c.scheme = scheme_from_name(scheme);
    read_field(t, "chi_max", c.chi_max);
    read_field(t, "sv_cutoff", c.sv_cutoff);
    read_field(t, "target_eps", c.target_eps);
    read_field(t, "delta_chi_abs", c.delta_chi_abs);
    read_field(t, "delta_chi_rel", c.delta_chi_rel);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    expect_keys(o, "output", {"path", "checkpoint_every"});
    read_field(o, "path", c.out_path);
    read_field(o, "checkpoint_every", c.checkpoint_every);
  }
  return c;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"d", c.d}, {"g", c.g}};
  j["system"] = {{"kind", c.system_kind}, {"size", c.system_size}};
  j["evolution"] = {
      {"dt", c.dt}, {"t_max", c.t_max}, {"trotter_order", c.trotter_order}};
  j["truncation"] = {{"scheme", scheme_name(c.scheme)},
                     {"chi_max", c.chi_max},
                     {"sv_cutoff", c.sv_cutoff},
                     {"target_eps", c.target_eps},
                     {"delta_chi_abs", c.delta_chi_abs},
                     {"delta_chi_rel", c.delta_chi_rel}};
  j["output"] = {{"path", c.out_path},
                 {"checkpoint_every", c.checkpoint_every}};
  return j.dump(2) + "\n";
}

namespace {

struct CsvFiles {
  std::ofstream observables;
  std::ofstream bonds;
  bool open = false;
};

CsvFiles open_csv_files(const std::string& out_path, const RunConfig& config) {
  CsvFiles files;
  if (out_path.empty()) return files;
  std::error_code ec;
  fs::create_directories(out_path, ec);
  if (ec) throw InputError("cannot create output directory: " + out_path);

  std::ofstream cfg(fs::path(out_path) / "config.json");
  if (!cfg) throw InputError("cannot write to output directory: " + out_path);
  cfg << config_to_json(config);

  files.observables.open(fs::path(out_path) / "observables.csv");
  files.bonds.open(fs::path(out_path) / "bonds.csv");
  if (!files.observables || !files.bonds)
    throw InputError("cannot write to output directory: " + out_path);
  files.observables << "t,site,z_re,z_im\n";
  files.bonds << "t,bond,entropy,eps_trunc,chi\n";
  files.open = true;
  return files;
}

void append_row_csv(CsvFiles& files, const TimeSeriesRow& row) {
  if (!files.open) return;
  for (std::size_t s = 0; s < row.z.size(); ++s)
    files.observables << fmt_double(row.t) << ',' << s << ','
                      << fmt_double(row.z[s].real()) << ','
                      << fmt_double(row.z[s].imag()) << '\n';
  for (std::size_t b = 0; b < row.bond_ids.size(); ++b)
    files.bonds << fmt_double(row.t) << ',' << row.bond_ids[b] << ','
                << fmt_double(row.entropy[b]) << ','
                << fmt_double(row.eps[b]) << ',' << row.chi[b] << '\n';
}

}  // namespace

QuenchResult run_quench(const RunConfig& config) {
  config.validate();
  const TruncationPolicy policy = config.policy();
  const ClockModel model{config.d, config.g};
  const ComplexTensor z_op = clock_operators(config.d).z;
  const bool uniform = config.system_kind == "uniform";
  const std::size_t size = config.system_size;

  CsvFiles files = open_csv_files(config.out_path, config);

  UniformMPS ustate;
  FiniteMPS fstate;
  std::vector<std::pair<BondParity, TwoSiteGate>> schedule;
  std::vector<FiniteLayer> layers;
  std::vector<std::size_t> bond_ids;

  if (uniform) {
    ustate = product_state_uniform(config.d, size, z1_local_vector(config.d));
    schedule = trotter_schedule(bond_hamiltonian(model, BondKind::bulk),
                                config.dt, config.trotter_order);
    for (std::size_t b = 0; b < size; ++b) bond_ids.push_back(b);
  } else {
    fstate = product_state_finite(config.d, size, z1_local_vector(config.d));
    layers = finite_trotter_layers(
        [&](std::size_t b) { return chain_bond_hamiltonian(model, b, size); },
        size, config.dt, config.trotter_order);
    for (std::size_t b = 1; b < size; ++b) bond_ids.push_back(b);
  }

  const auto n_steps =
      static_cast<std::size_t>(std::floor(config.t_max / config.dt + 1e-9));

  QuenchResult result;
  double wall = 0.0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t0 = now_seconds();
    std::vector<BondReport> reports;
    if (uniform) {
      UniformStepResult step = tebd_step(ustate, schedule, config.scheme, policy);
      ustate = std::move(step.state);
      reports = std::move(step.reports);
    } else {
      FiniteStepResult step = tebd_step(fstate, layers, config.scheme, policy);
      fstate = std::move(step.state);
      reports = std::move(step.reports);
    }
    wall += now_seconds() - t0;

    TimeSeriesRow row;
    row.t = static_cast<double>(k) * config.dt;
    row.wall_seconds = wall;
    row.bond_ids = bond_ids;
    const std::size_t n_sites = uniform ? size : size;
    for (std::size_t s = 0; s < n_sites; ++s)
      row.z.push_back(uniform ? expectation_local(ustate, z_op, s)
                              : expectation_local(fstate, z_op, s));
    for (std::size_t b : bond_ids) {
      const std::vector<double> sv = uniform ? schmidt_values(ustate, b)
                                             : schmidt_values(fstate, b);
      row.entropy.push_back(entropy_from_schmidt(sv));
      row.chi.push_back(sv.size());
      double bond_eps = 0.0;
      for (const BondReport& r : reports)
        if (r.bond == b) bond_eps = std::max(bond_eps, r.report.eps_trunc);
      row.eps.push_back(bond_eps);
    }
    for (const BondReport& r : reports)
      row.max_eps = std::max(row.max_eps, r.report.eps_trunc);
    for (std::size_t c : row.chi) row.max_chi = std::max(row.max_chi, c);

    append_row_csv(files, row);
    if (config.print_progress) {
      std::printf("t=%-8.4g max_chi=%-5zu max_eps=%-10.3e wall=%.1fs\n", row.t,
                  row.max_chi, row.max_eps, wall);
      std::fflush(stdout);
    }
    result.rows.push_back(std::move(row));

    if (files.open && config.checkpoint_every > 0 &&
        k % config.checkpoint_every == 0) {
      char name[40];
      std::snprintf(name, sizeof(name), "checkpoint_%06zu.mps", k);
      const std::string p = (fs::path(config.out_path) / name).string();
      if (uniform)
        save_mps(ustate, p);
      else
        save_mps(fstate, p);
    }
  }

  if (files.open) {
    const std::string p = (fs::path(config.out_path) / "state.mps").string();
    if (uniform)
      save_mps(ustate, p);
    else
      save_mps(fstate, p);
  }
  return result;
}

// --- single-gate benchmark ---

namespace {

ComplexTensor gaussian_matrix(std::mt19937_64& rng, std::size_t rows,
                              std::size_t cols) {
  std::normal_distribution<double> nd;
  ComplexTensor t({rows, cols});
  for (cplx& v : t.data()) {
    const double re = nd(rng);
    const double im = nd(rng);
    v = cplx(re, im);
  }
  return t;
}

// random right-isometric site tensor via LQ of a standard-normal matrix
ComplexTensor random_right_isometry(std::mt19937_64& rng, std::size_t d,
                                    std::size_t chi) {
  const ComplexTensor g = gaussian_matrix(rng, chi, d * chi);
  return lq_reduced(g).q.reshape({chi, d, chi}).transpose({1, 0, 2});
}

BenchRecord bench_cell(std::size_t d, std::size_t chi, Scheme scheme,
                       const BenchConfig& cfg) {
  const std::size_t theta_bytes = 16ull * d * chi * d * chi;
  if (theta_bytes > cfg.max_bytes / 6)
    throw CapacityError("benchmark cell exceeds the memory budget");

  std::seed_seq seq{0x51abu, static_cast<unsigned>(d),
                    static_cast<unsigned>(chi),
                    static_cast<unsigned>(scheme)};
  std::mt19937_64 rng(seq);

  const ComplexTensor b_m = random_right_isometry(rng, d, chi);
  const ComplexTensor b_n = random_right_isometry(rng, d, chi);

  ComplexTensor xi;
  if (scheme == Scheme::qr) {
    // the plain QR scheme works with a generic (non-diagonal) bond matrix
    xi = gaussian_matrix(rng, chi, chi);
    xi *= 1.0 / xi.norm();
  } else {
    // the spectral schemes keep the state canonical: diagonal Schmidt values
    std::vector<double> v(chi);
    double n2 = 0;
    for (std::size_t k = 0; k < chi; ++k) {
      v[k] = std::exp(-4.0 * static_cast<double>(k) / static_cast<double>(chi));
      n2 += v[k] * v[k];
    }
    xi = ComplexTensor({chi, chi});
    for (std::size_t k = 0; k < chi; ++k)
      xi.at({k, k}) = v[k] / std::sqrt(n2);
  }

  const TwoSiteGate gate =
      make_gate(bond_hamiltonian({d, cfg.g}, BondKind::bulk), cfg.dt);

  TruncationPolicy policy;
  policy.chi_max = chi;  // truncate back to the input bond dimension
  policy.sv_cutoff = 0.0;
  policy.compute_explicit_error = false;
  policy.delta_chi_abs = 0;
  policy.delta_chi_rel = scheme == Scheme::qr_cbe ? 0.1 : 0.0;

  apply_gate(scheme, xi, b_m, b_n, gate, policy);  // warm-up, discarded

  BenchRecord rec{d, chi, scheme, cfg.repetitions, 0.0, 0.0};
  std::vector<double> times;
  times.reserve(cfg.repetitions);
  double accumulated = 0.0;
  while (static_cast<int>(times.size()) < cfg.repetitions ||
         accumulated < cfg.min_cell_seconds) {
    const double t0 = now_seconds();
    const GateUpdate upd = apply_gate(scheme, xi, b_m, b_n, gate, policy);
    times.push_back(now_seconds() - t0);
    accumulated += times.back();
    if (upd.report.chi_after != chi)
      throw NumericError("benchmark update did not restore chi");
  }
  rec.repetitions = static_cast<int>(times.size());
  double mean = 0;
  for (double t : times) mean += t;
  mean /= times.size();
  double var = 0;
  for (double t : times) var += (t - mean) * (t - mean);
  var = times.size() > 1 ? var / (times.size() - 1) : 0.0;
  rec.mean_seconds = mean;
  rec.stddev_seconds = std::sqrt(var);
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_gate_bench(const BenchConfig& cfg) {
  if (cfg.repetitions < 3) throw InputError("bench repetitions must be >= 3");
  if (cfg.d_list.empty() || cfg.chi_list.empty() || cfg.schemes.empty())
    throw InputError("bench grid is empty");
  for (std::size_t d : cfg.d_list)
    if (d < 2) throw InputError("bench d must be >= 2");

  struct Cell {
    std::size_t d, chi;
    Scheme scheme;
  };
  std::vector<Cell> cells;
  for (Scheme s : cfg.schemes)
    for (std::size_t chi : cfg.chi_list)
      for (std::size_t d : cfg.d_list) cells.push_back({d, chi, s});

  std::vector<BenchRecord> records(cells.size());
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      records[i] = bench_cell(cells[i].d, cells[i].chi, cells[i].scheme, cfg);
  } else {
    // opt-in parallelism across cells; each timed region stays single-threaded
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cells.size(); i += jobs) {
          try {
            records[i] =
                bench_cell(cells[i].d, cells[i].chi, cells[i].scheme, cfg);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  if (!cfg.out_path.empty()) {
    fs::path p(cfg.out_path);
    if (p.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream os(p);
    if (!os) throw InputError("cannot write bench output: " + cfg.out_path);
    os << "d,chi,scheme,repetitions,mean_seconds,stddev_seconds\n";
    for (const BenchRecord& r : records)
      os << r.d << ',' << r.chi << ',' << scheme_name(r.scheme) << ','
         << r.repetitions << ',' << fmt_double(r.mean_seconds) << ','
         << fmt_double(r.stddev_seconds) << '\n';
  }
  return records;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InputError("slope fit needs at least two points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- verification suite ---

double finite_quench_max_z_error(std::size_t d, std::size_t n_sites, double g,
                                 double dt, double t_max, int order,
                                 Scheme scheme, std::size_t chi_max) {
  const ClockModel model{d, g};
  FiniteMPS mps = product_state_finite(d, n_sites, z1_local_vector(d));
  const auto layers = finite_trotter_layers(
      [&](std::size_t b) { return chain_bond_hamiltonian(model, b, n_sites); },
      n_sites, dt, order);
  const EdEvolver ed(d, n_sites, g);
  std::vector<cplx> psi = z1_product_statevector(d, n_sites);
  const ComplexTensor z_op = clock_operators(d).z;

  TruncationPolicy policy;
  policy.chi_max = chi_max;
  policy.sv_cutoff = 1e-14;

  const auto n_steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  double max_err = 0.0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    mps = tebd_step(mps, layers, scheme, policy).state;
    psi = ed.evolve(psi, dt);
    const EdObservables obs = ed_observables(psi, d, n_sites);
    for (std::size_t s = 0; s < n_sites; ++s) {
      const cplx z_mps = expectation_local(mps, z_op, s);
      max_err = std::max(max_err, std::abs(z_mps - obs.z_per_site[s]));
    }
  }
  return max_err;
}

bool VerifyReport::all_pass() const {
  for (const VerifyCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string VerifyReport::to_json() const {
  json j;
  j["checks"] = json::array();
  for (const VerifyCheck& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"threshold", c.threshold}});
  j["pass"] = all_pass();
  return j.dump(2) + "\n";
}

VerifyReport run_verify(bool fault_skip_renormalize) {
  VerifyReport report;
  auto add = [&report](const std::string& name, double value, double threshold) {
    report.checks.push_back({name, value <= threshold, value, threshold});
  };

  // 1. product state is exactly isometric
  {
    const UniformMPS mps = product_state_uniform(5, 2, z1_local_vector(5));
    add("product_state_isometry", check_isometric(mps, 1e-15).max_defect(),
        1e-15);
  }

  // 2./3. ED-oracle comparison on finite chains. The thresholds are the
  // oracle-measured Trotter error of the doubled-h.c. Hamiltonian at
  // dt=0.05 (3.7e-3 and 1.6e-3 respectively) with ~30% headroom; the
  // convergence-order check below pins the dt scaling.
  add("ed_match_d2_L8",
      finite_quench_max_z_error(2, 8, 2.0, 0.05, 1.0, 2, Scheme::svd, 256),
      5e-3);
  add("ed_match_d3_L4",
      finite_quench_max_z_error(3, 4, 2.0, 0.05, 0.5, 2, Scheme::qr_cbe, 81),
      5e-3);

  // 4. Trotter order: halving dt must shrink the error ~4x
  {
    const double e1 =
        finite_quench_max_z_error(2, 6, 2.0, 0.05, 0.5, 2, Scheme::svd, 64);
    const double e2 =
        finite_quench_max_z_error(2, 6, 2.0, 0.025, 0.5, 2, Scheme::svd, 64);
    const double ratio = e1 / std::max(e2, 1e-300);
    report.checks.push_back(
        {"trotter_order_ratio", ratio >= 3.0 && ratio <= 5.0, ratio, 5.0});
  }

  // 5./6. cross-scheme agreement and isometry maintenance, uniform d=3
  {
    RunConfig base;
    base.d = 3;
    base.g = 2.0;
    base.system_kind = "uniform";
    base.system_size = 2;
    base.dt = 0.05;
    base.t_max = 0.5;
    base.chi_max = 64;
    base.sv_cutoff = 1e-14;

    const ClockModel model{base.d, base.g};
    const auto schedule = trotter_schedule(
        bond_hamiltonian(model, BondKind::bulk), base.dt, base.trotter_order);
    const ComplexTensor z_op = clock_operators(base.d).z;
    const auto n_steps =
        static_cast<std::size_t>(std::floor(base.t_max / base.dt + 1e-9));

    const std::vector<Scheme> schemes = {Scheme::svd, Scheme::eig, Scheme::qr,
                                         Scheme::qr_cbe};
    std::vector<std::vector<double>> z_traces, s_traces;
    double max_defect = 0.0, max_defect_eig = 0.0;
    for (Scheme scheme : schemes) {
      UniformMPS state = product_state_uniform(base.d, 2, z1_local_vector(3));
      std::vector<double> zs, ss;
      for (std::size_t k = 0; k < n_steps; ++k) {
        state = tebd_step(state, schedule, scheme, base.policy()).state;
        for (std::size_t s = 0; s < 2; ++s) {
          zs.push_back(expectation_local(state, z_op, s).real());
          ss.push_back(entanglement_entropy(state, s));
        }
        double& slot = scheme == Scheme::eig ? max_defect_eig : max_defect;
        slot = std::max(slot, check_isometric(state, 1e-10).max_defect());
      }
      z_traces.push_back(std::move(zs));
      s_traces.push_back(std::move(ss));
    }
    double max_dev = 0.0;
    for (std::size_t a = 0; a + 1 < schemes.size(); ++a)
      for (std::size_t b = a + 1; b < schemes.size(); ++b)
        for (std::size_t i = 0; i < z_traces[a].size(); ++i) {
          max_dev = std::max(max_dev,
                             std::abs(z_traces[a][i] - z_traces[b][i]));
          max_dev = std::max(max_dev,
                             std::abs(s_traces[a][i] - s_traces[b][i]));
        }
    add("scheme_agreement", max_dev, 1e-8);
    // uniform-chain updates accumulate a Hastings-form isometry drift of
    // first order in the discarded sub-cutoff amplitudes; it stays bounded
    // but not at machine precision (see the strict finite-chain check below).
    // The EIG lane is noisier: Schmidt values under sqrt(machine eps) come
    // out of the Gram eigensolver as noise.
    add("uniform_isometry_drift", max_defect, 1e-3);
    add("uniform_isometry_drift_eig", max_defect_eig, 1e-1);
  }

  // strict isometry maintenance on a finite chain, where the orthogonality
  // center machinery keeps both isometry families exact
  {
    const std::size_t d = 2, n = 8;
    const ClockModel model{d, 2.0};
    const auto layers = finite_trotter_layers(
        [&](std::size_t b) { return chain_bond_hamiltonian(model, b, n); }, n,
        0.05, 2);
    FiniteMPS state = product_state_finite(d, n, z1_local_vector(d));
    TruncationPolicy pol;
    pol.chi_max = 256;
    pol.sv_cutoff = 1e-14;
    double max_defect = 0.0;
    for (std::size_t k = 0; k < 20; ++k) {
      const FiniteStepResult res =
          tebd_step(state, layers, Scheme::svd, pol,
                    [&](const FiniteMPS& s, const BondReport&) {
                      max_defect = std::max(
                          max_defect, check_isometric(s, 1e-10).max_defect());
                    });
      state = res.state;
    }
    add("finite_isometry_after_gates", max_defect, 1e-10);
  }

  // 7. norm conservation in a deliberately lossy run; the fault flag turns
  // off renormalization, which must make this check fail
  {
    RunConfig lossy;
    lossy.d = 3;
    lossy.g = 2.0;
    lossy.dt = 0.05;
    lossy.t_max = 1.0;
    lossy.scheme = Scheme::svd;
    lossy.chi_max = 8;
    lossy.fault_skip_renormalize = fault_skip_renormalize;

    const ClockModel model{lossy.d, lossy.g};
    const auto schedule = trotter_schedule(
        bond_hamiltonian(model, BondKind::bulk), lossy.dt, lossy.trotter_order);
    UniformMPS state = product_state_uniform(lossy.d, 2, z1_local_vector(3));
    const auto n_steps =
        static_cast<std::size_t>(std::floor(lossy.t_max / lossy.dt + 1e-9));
    double max_drift = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
      state = tebd_step(state, schedule, lossy.scheme, lossy.policy()).state;
      for (std::size_t b = 0; b < 2; ++b) {
        double sum2 = 0.0;
        for (double s : schmidt_values(state, b)) sum2 += s * s;
        max_drift = std::max(max_drift, std::abs(sum2 - 1.0));
      }
    }
    add("norm_conservation", max_drift, 1e-10);
  }

  return report;
}

}  // namespace qrtebd
