// cpr: compressive phase retrieval from the command line.
//
//   cpr recover       [--config F] [--set k=v]... [--out DIR] [--force] [--seed S]
//   cpr bench EXP     [--config F] [--set k=v]... [--out DIR] [--force] [--seed S] [--threads K]
//   cpr check-matrix  [--config F] [--set k=v]... [--out DIR] [--seed S] [--threads K]
//
// Exit status: 0 ok, 1 usage or configuration error, 2 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "CLI11.hpp"
#include "cpr/analysis.hpp"
#include "cpr/bench.hpp"
#include "cpr/config.hpp"
#include "cpr/ensembles.hpp"
#include "cpr/pipeline.hpp"
#include "cpr/rng.hpp"
#include "cpr/signals.hpp"

namespace fs = std::filesystem;
using namespace cpr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNonConvergence = 2;

// Raised for conditions that map to exit status 1 without being config errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string out = "cpr-out";
  bool force = false;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_threads) {
  app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--set", f.sets, "override a config key: dotted.key=value (repeatable)");
  f.out_opt = app->add_option("--out", f.out, "output directory")->capture_default_str();
  app->add_flag("--force", f.force, "overwrite existing outputs");
  f.seed_opt = app->add_option("--seed", f.seed, "seed (base_seed for bench)");
  if (with_threads) f.threads_opt = app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

Json resolve(const CommonFlags& f, const std::string& seed_key) {
  Json root = f.config.empty() ? Json::object() : load_json_file(f.config);
  if (!root.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& s : f.sets) apply_override(root, s);
  if (f.seed_opt != nullptr && f.seed_opt->count() > 0) root[seed_key] = f.seed;
  if (f.threads_opt != nullptr && f.threads_opt->count() > 0) root["threads"] = f.threads;
  return root;
}

void log_config(const std::string& command, const Json& resolved) {
  std::cerr << "cpr " << command << ": resolved config " << resolved.dump() << '\n';
}

void prepare_outputs(const fs::path& dir, const std::vector<fs::path>& files, bool force) {
  fs::create_directories(dir);
  for (const auto& f : files) {
    if (!fs::exists(f)) continue;
    if (!force) throw UsageError("refusing to overwrite " + f.string() + " (pass --force)");
    fs::remove(f);
  }
}

void write_json(const Json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_vector_csv(const CVector& v, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "index,re,im\n";
  char buf[96];
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", static_cast<long>(k), v[k].real(), v[k].imag());
    out << buf;
  }
}

Json stage_json(const StageSummary& s) {
  return Json{{"residual", s.residual}, {"iterations", s.iterations}, {"seconds", s.seconds}, {"converged", s.converged}};
}

Json result_json(const RecoveryResult& r) {
  Json j;
  if (r.error) {
    j["relative_l2"] = r.error->relative_l2 ? number_or_tag(*r.error->relative_l2) : Json(nullptr);
    j["relative_db"] = r.error->relative_db ? number_or_tag(*r.error->relative_db) : Json(nullptr);
    j["aligned_l2"] = r.error->aligned_l2;
    j["theta_star"] = r.error->theta_star;
  }
  j["success"] = r.success ? Json(*r.success) : Json(nullptr);
  j["eta_used"] = r.eta_used;
  j["eta_source"] = to_string(r.eta_source);
  j["debiased"] = r.debiased;
  j["stage1"] = stage_json(r.stage1);
  j["stage1"]["top_eigenvalue"] = r.stage1_top_eigenvalue;
  j["stage1"]["second_eigenvalue"] = r.stage1_second_eigenvalue;
  j["stage2"] = stage_json(r.stage2);
  j["total_seconds"] = r.total_seconds;
  j["converged"] = r.converged();
  return j;
}

int cmd_recover(const CommonFlags& f) {
  const RecoverConfig cfg = recover_config_from_json(resolve(f, "seed"));
  const Json echo = to_json(cfg);
  log_config("recover", echo);

  const fs::path dir = f.out;
  const bool synthetic = !cfg.ensemble;
  std::vector<fs::path> files{dir / "recover.json", dir / "x_hat.csv"};
  if (synthetic) {
    files.insert(files.end(), {dir / "ensemble.json", dir / "measurements.json", dir / "x_true.csv"});
  }
  prepare_outputs(dir, files, f.force);

  RecoveryResult res;
  if (synthetic) {
    ExperimentConfig sizing;
    sizing.m = cfg.m;
    sizing.m_tilde = cfg.m_tilde;
    sizing.m_coeff = cfg.m_coeff;
    sizing.m_tilde_factor = cfg.m_tilde_factor;
    const std::size_t n = *cfg.n;
    const std::size_t s = *cfg.s;
    if (s == 0 || s >= n) throw ConfigError("config: need 1 <= s < n");
    const std::size_t m = rule_m(sizing, n, s);
    const std::size_t m_tilde = rule_m_tilde(sizing, n, s, m);
    if (m >= n) throw ConfigError("config: need m < n (m=" + std::to_string(m) + ")");
    if (m_tilde < m) throw ConfigError("config: need m_tilde >= m");

    const EnsembleSpec spec{m_tilde, m, n, cfg.phase_kind, cfg.cs_kind, derive_seed({cfg.seed, 0})};
    const MeasurementEnsemble ensemble = MeasurementEnsemble::generate(spec);
    Rng signal_rng(derive_seed({cfg.seed, 1}));
    const SparseSignal x = gen_sparse_signal(n, s, signal_rng);
    Rng noise_rng(derive_seed({cfg.seed, 2}));
    const MagnitudeMeasurements meas = add_noise(forward(ensemble, x.values), cfg.snr_db, noise_rng);
    save_ensemble_spec(spec, dir / "ensemble.json");
    save_measurements(meas.b, dir / "measurements.json");
    write_vector_csv(x.values, dir / "x_true.csv");
    const GroundTruth truth{x.values};
    res = recover(ensemble, meas.b, cfg.solver, &truth);
  } else {
    const EnsembleSpec spec = load_ensemble_spec(*cfg.ensemble);
    const MeasurementEnsemble ensemble = MeasurementEnsemble::generate(spec);
    const RVector b = load_measurements(*cfg.measurements);
    if (static_cast<std::size_t>(b.size()) != ensemble.m_tilde()) {
      throw UsageError("dimension error: measurements have length " + std::to_string(b.size()) +
                       " but the ensemble has m_tilde = " + std::to_string(ensemble.m_tilde()));
    }
    res = recover(ensemble, b, cfg.solver);
  }

  write_json(Json{{"config", echo}, {"result", result_json(res)}}, dir / "recover.json");
  write_vector_csv(res.x_hat, dir / "x_hat.csv");

  std::cout << "stage1 " << res.stage1.iterations << " iters " << (res.stage1.converged ? "converged" : "NOT converged")
            << ", stage2 " << res.stage2.iterations << " iters "
            << (res.stage2.converged ? "converged" : "NOT converged");
  if (res.error && res.error->relative_l2) {
    std::cout << ", relative_l2 " << *res.error->relative_l2 << " (" << *res.error->relative_db << " dB)";
  }
  std::cout << "\nwrote " << (dir / "recover.json").string() << '\n';
  return res.converged() ? kExitOk : kExitNonConvergence;
}

std::string file_stem(Experiment e) {
  switch (e) {
    case Experiment::kNoise: return "noise";
    case Experiment::kMinMeasurements: return "min_measurements";
    case Experiment::kRuntime: return "runtime";
  }
  return "bench";
}

int cmd_bench(const CommonFlags& f, const std::string& name) {
  const Experiment e = parse_experiment(name);
  const ExperimentConfig cfg = experiment_config_from_json(resolve(f, "base_seed"), e);
  const Json echo = to_json(cfg, e);
  log_config("bench " + name, echo);

  const fs::path dir = f.out;
  const std::string stem = file_stem(e);
  const fs::path csv = dir / (stem + ".csv");
  const fs::path summary = dir / (stem + ".summary.json");
  const fs::path table = dir / (stem + ".table.csv");
  const fs::path checkpoint_path = dir / (stem + ".checkpoint");
  std::vector<fs::path> outputs{csv, summary};
  if (e != Experiment::kNoise) outputs.push_back(table);
  if (f.force) outputs.push_back(checkpoint_path);
  prepare_outputs(dir, outputs, f.force);

  // Thread count does not change results, so it is left out of the fingerprint.
  Json key = echo;
  key.erase("threads");
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(hash_tag(key.dump())));
  Checkpoint checkpoint(checkpoint_path, fp);
  if (checkpoint.size() > 0) std::cerr << "resuming from " << checkpoint.size() << " checkpointed trials\n";

  const ProgressFn progress = [&](std::size_t done, std::size_t total) {
    std::cerr << "\r[" << name << "] " << done << "/" << total << " trials" << std::flush;
  };

  Json sum;
  std::vector<TrialRecord> rows;
  if (e == Experiment::kNoise) {
    const NoiseSweep r = run_noise_sweep(cfg, &checkpoint, progress);
    rows = r.rows;
    sum = summary_json(cfg, r);
    std::cerr << '\n';
    for (const auto& ps : r.summary) {
      std::cout << "snr " << ps.point.snr_db << " dB: mean error " << ps.mean_relative_db << " dB, "
                << ps.successes << "/" << ps.trials << " below threshold\n";
    }
  } else if (e == Experiment::kMinMeasurements) {
    const MinMeasurements r = find_min_measurements(cfg, &checkpoint, progress);
    rows = r.rows;
    sum = summary_json(cfg, r);
    std::cerr << '\n';
    std::ofstream t(table);
    t << "s,m,m_tilde_min,success_rate,avg_seconds,found\n";
    for (const auto& row : r.table) {
      t << row.s << ',' << row.m << ',' << row.m_tilde_min << ',' << row.success_rate << ',' << row.avg_seconds << ','
        << (row.found ? 1 : 0) << '\n';
      std::cout << "s " << row.s << ": m_tilde_min " << row.m_tilde_min << (row.found ? "" : " (not found below cap)")
                << ", success rate " << row.success_rate << '\n';
    }
  } else {
    const RuntimeScaling r = run_runtime_scaling(cfg, &checkpoint, progress);
    rows = r.rows;
    sum = summary_json(cfg, r);
    std::cerr << '\n';
    std::ofstream t(table);
    t << "n,s,m,m_tilde,avg_total_seconds,avg_stage1_seconds,avg_stage2_seconds\n";
    for (const auto& row : r.table) {
      t << row.n << ',' << row.s << ',' << row.m << ',' << row.m_tilde << ',' << row.avg_total_seconds << ','
        << row.avg_stage1_seconds << ',' << row.avg_stage2_seconds << '\n';
      std::cout << "n " << row.n << ": stage1 " << row.avg_stage1_seconds << " s, stage2 " << row.avg_stage2_seconds
                << " s\n";
    }
    std::cout << "stage-1 spread across n: " << r.stage1_spread << "x\n";
  }
  sum["rows"] = rows.size();
  write_csv(rows, csv);
  write_json(sum, summary);
  std::cout << "wrote " << csv.string() << '\n';
  return kExitOk;
}

CMatrix random_unitary(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix g(n, n);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.complex_normal();
  }
  const Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

int cmd_check_matrix(const CommonFlags& f) {
  const CheckMatrixConfig cfg = check_matrix_config_from_json(resolve(f, "seed"));
  const Json echo = to_json(cfg);
  log_config("check-matrix", echo);

  CMatrix C;
  if (cfg.kind == "orthonormal") {
    if (cfg.m != cfg.n) throw ConfigError("config: kind 'orthonormal' needs m == n");
    C = random_unitary(cfg.n, cfg.seed);
  } else {
    Rng rng(cfg.seed);
    C = gen_cs_matrix(cfg.m, cfg.n, parse_cs_kind(cfg.kind), rng);
  }

  const RicReport ric = brute_force_ric(C, cfg.s, cfg.threads);
  const NspReport nsp = probe_nsp(C, cfg.s, cfg.rho, cfg.tau, cfg.probes, cfg.seed);

  // Both sides of the ||Cx|| sandwich on the first probes. The upper side is
  // evaluated as stated and only reported.
  const std::size_t bound_probes = std::min<std::size_t>(cfg.probes, 64);
  std::size_t lower_fail = 0, upper_fail = 0;
  double worst_upper_ratio = 0.0;
  for (std::size_t i = 0; i < bound_probes; ++i) {
    const CVector x = nsp_probe(C, cfg.s, cfg.seed, i);
    const CxBoundsReport b = check_cx_bounds(C, cfg.s, cfg.rho, cfg.tau, ric.delta, x);
    if (!b.lower_holds) ++lower_fail;
    if (!b.upper_holds) ++upper_fail;
    if (b.upper > 0.0) worst_upper_ratio = std::max(worst_upper_ratio, b.value / b.upper);
  }
  if (upper_fail > 0) {
    std::cerr << "note: the sqrt(1 - delta) upper bound on ||Cx|| failed on " << upper_fail << "/" << bound_probes
              << " probes\n";
  }

  Json report{{"config", echo},
              {"ric", {{"order", ric.order},
                       {"delta", ric.delta},
                       {"enumerated_supports", ric.enumerated_supports},
                       {"worst_support", ric.worst_support}}},
              {"nsp", {{"s", nsp.s},
                       {"rho", nsp.rho},
                       {"tau", nsp.tau},
                       {"probes", nsp.probes},
                       {"worst_violation", nsp.worst_violation},
                       {"worst_probe", nsp.worst_probe},
                       {"satisfied_on_probes", nsp.satisfied_on_probes}}},
              {"cx_bounds", {{"probes", bound_probes},
                             {"lower_failures", lower_fail},
                             {"upper_failures", upper_fail},
                             {"max_value_over_upper", worst_upper_ratio}}}};
  std::cout << report.dump(2) << '\n';
  if (f.out_opt->count() > 0) {
    prepare_outputs(f.out, {fs::path(f.out) / "check_matrix.json"}, f.force);
    write_json(report, fs::path(f.out) / "check_matrix.json");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive phase retrieval: PhaseLift on compressed measurements, then basis pursuit denoising"};
  app.require_subcommand(1);

  CommonFlags recover_flags, bench_flags, check_flags;
  CLI::App* recover_cmd = app.add_subcommand("recover", "recover one signal (synthetic trial or input files)");
  add_common(recover_cmd, recover_flags, false);

  std::string experiment;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run an experiment: noise, min-measurements, runtime");
  bench_cmd->add_option("experiment", experiment, "noise | min-measurements | runtime")
      ->required()
      ->check(CLI::IsMember({"noise", "min-measurements", "runtime"}));
  add_common(bench_cmd, bench_flags, true);

  CLI::App* check_cmd = app.add_subcommand("check-matrix", "RIC enumeration and null space probes on a small matrix");
  add_common(check_cmd, check_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*recover_cmd) return cmd_recover(recover_flags);
    if (*bench_cmd) return cmd_bench(bench_flags, experiment);
    return cmd_check_matrix(check_flags);
  } catch (const NumericalFailure& e) {
    std::cerr << "cpr: numerical failure: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const EnumerationTooLarge& e) {
    std::cerr << "cpr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cpr: " << e.what() << '\n';
    return kExitUsage;
  }
}
