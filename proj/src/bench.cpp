#include "cpr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cpr/rng.hpp"
#include "cpr/signals.hpp"

namespace cpr {
namespace {

constexpr std::string_view kCheckpointTag = "cpr-checkpoint/1";

// Round-trippable and locale-independent.
std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument("bad integer '" + s + "'");
  return v;
}

// ceil with a relative guard so exact products such as 8 * 17 stay put.
std::size_t ceil_rule(double v) {
  return static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-12)));
}

void validate_point(const ConfigPoint& p) {
  if (p.s == 0 || p.s >= p.n) {
    throw std::invalid_argument("config: need 1 <= s < n (n=" + std::to_string(p.n) + ", s=" + std::to_string(p.s) + ")");
  }
  if (p.m == 0 || p.m >= p.n) {
    throw std::invalid_argument("config: need 1 <= m < n (n=" + std::to_string(p.n) + ", m=" + std::to_string(p.m) + ")");
  }
  if (p.m_tilde < p.m) {
    throw std::invalid_argument("config: need m_tilde >= m (m=" + std::to_string(p.m) +
                                ", m_tilde=" + std::to_string(p.m_tilde) + ")");
  }
}

ConfigPoint make_point(const ExperimentConfig& cfg, std::size_t n, std::size_t s, double snr_db) {
  ConfigPoint p;
  p.n = n;
  p.s = s;
  p.snr_db = snr_db;
  if (s == 0 || s >= n) validate_point(p);
  p.m = rule_m(cfg, n, s);
  p.m_tilde = rule_m_tilde(cfg, n, s, p.m);
  validate_point(p);
  return p;
}

double mean_of(const std::vector<TrialRecord>& rows, std::size_t begin, std::size_t end,
               double TrialRecord::*field) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (std::isnan(rows[i].relative_l2)) continue;
    sum += rows[i].*field;
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kNoise: return "noise";
    case Experiment::kMinMeasurements: return "min-measurements";
    case Experiment::kRuntime: return "runtime";
  }
  return "?";
}

Experiment parse_experiment(std::string_view s) {
  if (s == "noise") return Experiment::kNoise;
  if (s == "min-measurements") return Experiment::kMinMeasurements;
  if (s == "runtime") return Experiment::kRuntime;
  throw std::invalid_argument("unknown experiment '" + std::string(s) + "' (noise, min-measurements, runtime)");
}

std::size_t rule_m(const ExperimentConfig& cfg, std::size_t n, std::size_t s) {
  if (cfg.m) return *cfg.m;
  const double v = cfg.m_coeff * static_cast<double>(s) * std::log(static_cast<double>(n) / static_cast<double>(s));
  return std::max<std::size_t>(1, ceil_rule(v));
}

std::size_t rule_m_tilde(const ExperimentConfig& cfg, std::size_t n, std::size_t s, std::size_t m) {
  if (cfg.m_tilde) return *cfg.m_tilde;
  if (cfg.m_tilde_coeff) {
    return ceil_rule(*cfg.m_tilde_coeff * static_cast<double>(s) *
                     std::log(static_cast<double>(n) / static_cast<double>(s)));
  }
  return ceil_rule(cfg.m_tilde_factor * static_cast<double>(m));
}

std::uint64_t ConfigPoint::key() const {
  return derive_seed({n, s, m, m_tilde, std::bit_cast<std::uint64_t>(snr_db)});
}

TrialSeeds trial_seeds(std::uint64_t base_seed, Experiment e, const ConfigPoint& p, std::size_t trial,
                       bool fixed_ensemble) {
  const std::uint64_t exp_id = hash_tag(to_string(e));
  const std::uint64_t ens_trial = fixed_ensemble ? std::numeric_limits<std::uint64_t>::max() : trial;
  TrialSeeds out;
  out.ensemble = derive_seed({base_seed, exp_id, p.key(), ens_trial, 0});
  out.signal = derive_seed({base_seed, exp_id, p.key(), trial, 1});
  out.noise = derive_seed({base_seed, exp_id, p.key(), trial, 2});
  return out;
}

std::string csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << to_string(r.experiment) << ',' << r.point.n << ',' << r.point.s << ',' << r.point.m << ','
     << r.point.m_tilde << ',' << fmt_double(r.point.snr_db) << ',' << r.trial << ',' << r.seeds.ensemble << ','
     << r.seeds.signal << ',' << r.seeds.noise << ',' << fmt_double(r.relative_l2) << ','
     << fmt_double(r.relative_db) << ',' << (r.success ? 1 : 0) << ',' << fmt_double(r.stage1_seconds) << ','
     << fmt_double(r.stage2_seconds) << ',' << r.stage1_iters << ',' << r.stage2_iters << ','
     << fmt_double(r.total_seconds);
  return os.str();
}

TrialRecord parse_csv_row(std::string_view line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  f.push_back(cur);
  if (f.size() != 18) throw std::invalid_argument("csv row has " + std::to_string(f.size()) + " fields, expected 18");
  TrialRecord r;
  r.experiment = parse_experiment(f[0]);
  r.point.n = parse_u64(f[1]);
  r.point.s = parse_u64(f[2]);
  r.point.m = parse_u64(f[3]);
  r.point.m_tilde = parse_u64(f[4]);
  r.point.snr_db = parse_double(f[5]);
  r.trial = parse_u64(f[6]);
  r.seeds.ensemble = parse_u64(f[7]);
  r.seeds.signal = parse_u64(f[8]);
  r.seeds.noise = parse_u64(f[9]);
  r.relative_l2 = parse_double(f[10]);
  r.relative_db = parse_double(f[11]);
  if (f[12] != "0" && f[12] != "1") throw std::invalid_argument("bad success flag '" + f[12] + "'");
  r.success = f[12] == "1";
  r.stage1_seconds = parse_double(f[13]);
  r.stage2_seconds = parse_double(f[14]);
  r.stage1_iters = static_cast<int>(parse_u64(f[15]));
  r.stage2_iters = static_cast<int>(parse_u64(f[16]));
  r.total_seconds = parse_double(f[17]);
  return r;
}

TrialRecord run_trial(const ExperimentConfig& cfg, Experiment e, const ConfigPoint& p, std::size_t trial) {
  TrialRecord r;
  r.experiment = e;
  r.point = p;
  r.trial = trial;
  r.seeds = trial_seeds(cfg.base_seed, e, p, trial, cfg.fixed_ensemble);
  try {
    const EnsembleSpec spec{p.m_tilde, p.m, p.n, cfg.phase_kind, cfg.cs_kind, r.seeds.ensemble};
    const MeasurementEnsemble ensemble = MeasurementEnsemble::generate(spec);
    Rng signal_rng(r.seeds.signal);
    const SparseSignal x = gen_sparse_signal(p.n, p.s, signal_rng);
    Rng noise_rng(r.seeds.noise);
    const MagnitudeMeasurements meas = add_noise(forward(ensemble, x.values), p.snr_db, noise_rng);

    RecoveryOptions opts = cfg.solver;
    opts.success_threshold = cfg.success_threshold;
    const GroundTruth truth{x.values};
    const RecoveryResult res = recover(ensemble, meas.b, opts, &truth);
    r.relative_l2 = res.error->relative_l2.value_or(std::numeric_limits<double>::quiet_NaN());
    r.relative_db = res.error->relative_db.value_or(std::numeric_limits<double>::quiet_NaN());
    r.success = res.success.value_or(false);
    r.stage1_iters = res.stage1.iterations;
    r.stage2_iters = res.stage2.iterations;
    r.converged = res.converged();
    if (cfg.record_timings) {
      r.stage1_seconds = res.stage1.seconds;
      r.stage2_seconds = res.stage2.seconds;
      r.total_seconds = res.total_seconds;
    }
  } catch (const std::exception& ex) {
    r.relative_l2 = std::numeric_limits<double>::quiet_NaN();
    r.relative_db = std::numeric_limits<double>::quiet_NaN();
    r.success = false;
    r.error = ex.what();
  }
  return r;
}

Checkpoint::Checkpoint(std::filesystem::path path, std::string fingerprint) : path_(std::move(path)) {
  const std::string header = std::string(kCheckpointTag) + " " + fingerprint;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    if (!std::getline(in, line) || line != header) {
      throw std::runtime_error("checkpoint " + path_.string() +
                               " belongs to a different configuration; remove it or rerun with --force");
    }
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        rows_.push_back(parse_csv_row(lines[i]));
      } catch (const std::exception&) {
        // A torn final line from an interrupted write is dropped.
        if (i + 1 != lines.size()) throw std::runtime_error("checkpoint " + path_.string() + " is corrupt");
      }
    }
    // Rewrite without the torn line so appends start on a fresh line.
    std::ofstream out(path_, std::ios::trunc);
    out << header << '\n';
    for (const auto& r : rows_) out << csv_row(r) << '\n';
  } else {
    std::ofstream out(path_);
    if (!out) throw std::runtime_error("cannot create checkpoint " + path_.string());
    out << header << '\n';
  }
}

bool Checkpoint::contains(const ConfigPoint& p, std::size_t trial) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const TrialRecord& r) { return r.point == p && r.trial == trial; });
}

const TrialRecord& Checkpoint::get(const ConfigPoint& p, std::size_t trial) const {
  for (const auto& r : rows_) {
    if (r.point == p && r.trial == trial) return r;
  }
  throw std::out_of_range("checkpoint has no such trial");
}

void Checkpoint::append(const TrialRecord& r) {
  std::ofstream out(path_, std::ios::app);
  out << csv_row(r) << '\n';
  out.flush();
  rows_.push_back(r);
}

std::vector<TrialRecord> run_points(const ExperimentConfig& cfg, Experiment e, const std::vector<ConfigPoint>& points,
                                    Checkpoint* checkpoint, const ProgressFn& progress) {
  if (cfg.trials == 0) throw std::invalid_argument("config: trials must be >= 1");
  for (const auto& p : points) validate_point(p);

  const std::size_t total = points.size() * cfg.trials;
  std::vector<TrialRecord> out(total);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& p = points[i / cfg.trials];
    const std::size_t t = i % cfg.trials;
    if (checkpoint != nullptr && checkpoint->contains(p, t)) {
      out[i] = checkpoint->get(p, t);
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex collector;
  std::size_t done = total - pending.size();
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const std::size_t i = pending[k];
      try {
        TrialRecord r = run_trial(cfg, e, points[i / cfg.trials], i % cfg.trials);
        std::lock_guard lock(collector);
        if (checkpoint != nullptr) checkpoint->append(r);
        out[i] = std::move(r);
        ++done;
        if (progress) progress(done, total);
      } catch (...) {
        std::lock_guard lock(collector);
        if (!failure) failure = std::current_exception();
        next.store(pending.size());
        return;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(pending.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<PointSummary> summarize(const std::vector<TrialRecord>& rows) {
  std::vector<PointSummary> out;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].point == rows[begin].point) ++end;
    PointSummary ps;
    ps.point = rows[begin].point;
    ps.trials = end - begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (rows[i].success) ++ps.successes;
      if (std::isnan(rows[i].relative_l2)) ++ps.failures;
    }
    ps.mean_relative_db = mean_of(rows, begin, end, &TrialRecord::relative_db);
    ps.mean_relative_l2 = mean_of(rows, begin, end, &TrialRecord::relative_l2);
    ps.mean_stage1_seconds = mean_of(rows, begin, end, &TrialRecord::stage1_seconds);
    ps.mean_stage2_seconds = mean_of(rows, begin, end, &TrialRecord::stage2_seconds);
    ps.mean_total_seconds = mean_of(rows, begin, end, &TrialRecord::total_seconds);
    out.push_back(ps);
    begin = end;
  }
  return out;
}

NoiseSweep run_noise_sweep(const ExperimentConfig& cfg, Checkpoint* checkpoint, const ProgressFn& progress) {
  if (cfg.snr_list.empty()) throw std::invalid_argument("config: snr_db list is empty");
  std::vector<ConfigPoint> points;
  for (double snr : cfg.snr_list) points.push_back(make_point(cfg, cfg.n, cfg.s, snr));
  NoiseSweep out;
  out.rows = run_points(cfg, Experiment::kNoise, points, checkpoint, progress);
  out.summary = summarize(out.rows);
  return out;
}

MinMeasurements find_min_measurements(const ExperimentConfig& cfg, Checkpoint* checkpoint,
                                      const ProgressFn& progress) {
  if (!(cfg.success_rate >= 0.0 && cfg.success_rate <= 1.0)) {
    throw std::invalid_argument("config: success_rate must lie in [0, 1]");
  }
  if (cfg.m_tilde_step == 0) throw std::invalid_argument("config: m_tilde_step must be >= 1");
  const std::vector<std::size_t> s_list = cfg.s_list.empty() ? std::vector<std::size_t>{cfg.s} : cfg.s_list;
  const auto needed = static_cast<std::size_t>(std::ceil(cfg.success_rate * static_cast<double>(cfg.trials) - 1e-9));

  MinMeasurements out;
  for (std::size_t s : s_list) {
    ConfigPoint p = make_point(cfg, cfg.n, s, kNoiseless);
    const std::size_t start = cfg.m_tilde_start.value_or(2 * p.m);
    const std::size_t cap = cfg.m_tilde_max.value_or(40 * p.m);
    if (start < p.m) throw std::invalid_argument("config: m_tilde_start must be >= m");
    MinMeasurementRow row;
    row.s = s;
    row.m = p.m;
    for (std::size_t mt = start; mt <= cap; mt += cfg.m_tilde_step) {
      p.m_tilde = mt;
      const auto rows = run_points(cfg, Experiment::kMinMeasurements, {p}, checkpoint, progress);
      const PointSummary ps = summarize(rows).front();
      out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      row.m_tilde_min = mt;
      row.success_rate = static_cast<double>(ps.successes) / static_cast<double>(ps.trials);
      row.avg_seconds = ps.mean_total_seconds;
      if (ps.successes >= needed) {
        row.found = true;
        break;
      }
    }
    out.table.push_back(row);
  }
  return out;
}

RuntimeScaling run_runtime_scaling(const ExperimentConfig& cfg, Checkpoint* checkpoint, const ProgressFn& progress) {
  const std::vector<std::size_t> n_list = cfg.n_list.empty() ? std::vector<std::size_t>{cfg.n} : cfg.n_list;
  std::vector<ConfigPoint> points;
  for (std::size_t n : n_list) points.push_back(make_point(cfg, n, cfg.s, kNoiseless));

  RuntimeScaling out;
  out.rows = run_points(cfg, Experiment::kRuntime, points, checkpoint, progress);
  const auto summary = summarize(out.rows);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  out.stage2_increasing = summary.size() > 1;
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& ps = summary[i];
    out.table.push_back({ps.point.n, ps.point.s, ps.point.m, ps.point.m_tilde, ps.mean_total_seconds,
                         ps.mean_stage1_seconds, ps.mean_stage2_seconds});
    lo = std::min(lo, ps.mean_stage1_seconds);
    hi = std::max(hi, ps.mean_stage1_seconds);
    if (i > 0 && !(ps.mean_stage2_seconds > summary[i - 1].mean_stage2_seconds)) out.stage2_increasing = false;
  }
  out.stage1_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();

  // Ordinary least squares of stage1_seconds on n.
  std::vector<std::pair<double, double>> xy;
  for (const auto& r : out.rows) {
    if (!std::isnan(r.relative_l2)) xy.emplace_back(static_cast<double>(r.point.n), r.stage1_seconds);
    if (r.total_seconds > cfg.budget_seconds) out.within_budget = false;
  }
  if (xy.size() > 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : xy) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : xy) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 0.0) {
      out.stage1_slope = sxy / sxx;
      double sse = 0.0;
      for (const auto& [x, y] : xy) {
        const double e = y - my - out.stage1_slope * (x - mx);
        sse += e * e;
      }
      out.stage1_slope_stderr = std::sqrt(sse / static_cast<double>(xy.size() - 2) / sxx);
    }
  }
  return out;
}

void write_csv(const std::vector<TrialRecord>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TrialRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument(path.string() + ": unexpected CSV header");
  }
  std::vector<TrialRecord> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  }
  return rows;
}

}  // namespace cpr
