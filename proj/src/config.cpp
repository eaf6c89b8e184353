#include "cpr/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <vector>

namespace cpr {
namespace {

// Reads typed keys from one JSON object and remembers which were consumed so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) throw ConfigError("config section '" + label() + "' must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_ != nullptr && j_->contains(key) && !(*j_)[key].is_null();
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void get(const std::string& key, double& out) {
    if (has(key)) out = as_double(key, (*j_)[key]);
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (has(key)) out = as_double(key, (*j_)[key]);
  }
  void get(const std::string& key, int& out) {
    if (has(key)) out = static_cast<int>(as_count(key, (*j_)[key]));
  }
  void get(const std::string& key, unsigned& out) {
    if (has(key)) out = static_cast<unsigned>(as_count(key, (*j_)[key]));
  }
  void get(const std::string& key, std::size_t& out) {
    if (has(key)) out = as_count(key, (*j_)[key]);
  }
  void get(const std::string& key, std::optional<std::size_t>& out) {
    if (has(key)) out = as_count(key, (*j_)[key]);
  }
  void get(const std::string& key, std::uint64_t& out, bool required) {
    if (has(key)) {
      const Json& v = (*j_)[key];
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("config key '" + where(key) + "': expected a nonnegative integer");
      }
      out = v.get<std::uint64_t>();
    } else if (required) {
      throw ConfigError("missing required key '" + where(key) + "'");
    }
  }
  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = (*j_)[key];
    if (!v.is_boolean()) throw ConfigError("config key '" + where(key) + "': expected true or false");
    out = v.get<bool>();
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = (*j_)[key];
    if (!v.is_string()) throw ConfigError("config key '" + where(key) + "': expected a string");
    out = v.get<std::string>();
  }
  void get(const std::string& key, std::optional<std::filesystem::path>& out) {
    std::string s;
    if (has(key)) {
      get(key, s);
      out = s;
    }
  }
  void get(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    const Json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError("config key '" + where(key) + "': expected an array");
    out.clear();
    for (const auto& e : v) out.push_back(as_count(key, e));
  }
  // Numbers, or "noiseless" / "inf" for no noise.
  double snr(const std::string& key, const Json& v) {
    if (v.is_string() && (v == "noiseless" || v == "inf")) return kNoiseless;
    return as_double(key, v);
  }
  void get_snr(const std::string& key, double& out) {
    if (has(key)) out = snr(key, (*j_)[key]);
  }
  void get_snr_list(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const Json& v = (*j_)[key];
    out.clear();
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(snr(key, e));
    } else {
      out.push_back(snr(key, v));
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    const Json* child = (j_ != nullptr && j_->contains(key) && !(*j_)[key].is_null()) ? &(*j_)[key] : nullptr;
    return Section(child, where(key));
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (const auto& item : j_->items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown config key '" + where(item.key()) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  double as_double(const std::string& key, const Json& v) const {
    if (!v.is_number()) throw ConfigError("config key '" + where(key) + "': expected a number");
    return v.get<double>();
  }
  std::size_t as_count(const std::string& key, const Json& v) const {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError("config key '" + where(key) + "': expected a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  const Json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
auto wrap_parse(const std::string& key, Fn fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void read_solver(Section& root, RecoveryOptions& o) {
  Section pl = root.sub("phaselift");
  pl.get("max_iters", o.phaselift.max_iters);
  pl.get("tol", o.phaselift.tol);
  pl.get("lambda", o.phaselift.lambda);
  pl.get("lambda_scale", o.phaselift.lambda_scale);
  pl.get("power_iters", o.phaselift.power_iters);
  pl.get("step_fraction", o.phaselift.step_fraction);
  pl.get("eta_floor", o.phaselift.eta_floor);
  pl.get("kappa", o.phaselift.kappa);
  pl.finish();

  Section bp = root.sub("bpdn");
  bp.get("tol", o.bpdn.tol);
  bp.get("max_iters", o.bpdn.max_iters);
  bp.get("rho", o.bpdn.rho);
  bp.get("scale_rho", o.bpdn.scale_rho);
  bp.get("adaptive", o.bpdn.adaptive);
  bp.get("rho_factor", o.bpdn.rho_factor);
  bp.get("balance_ratio", o.bpdn.balance_ratio);
  bp.get("relaxation", o.bpdn.relaxation);
  bp.get("adapt_every", o.bpdn.adapt_every);
  bp.get("adapt_until", o.bpdn.adapt_until);
  bp.get("polish", o.bpdn.polish);
  bp.get("certify_every", o.bpdn.certify_every);
  bp.finish();

  Section rc = root.sub("recovery");
  rc.get("eta", o.eta);
  rc.get("oracle_eta", o.oracle_eta);
  rc.get("debias", o.debias);
  rc.get("debias_threshold", o.debias_threshold);
  rc.finish();

  root.get("success_threshold", o.success_threshold);

  if (o.phaselift.max_iters < 1 || o.bpdn.max_iters < 1) throw ConfigError("config: max_iters must be >= 1");
  if (!(o.phaselift.tol > 0.0) || !(o.bpdn.tol > 0.0)) throw ConfigError("config: tol must be positive");
  if (o.eta && !(*o.eta >= 0.0)) throw ConfigError("config key 'recovery.eta': must be nonnegative");
  if (!(o.bpdn.rho > 0.0)) throw ConfigError("config key 'bpdn.rho': must be positive");
  if (!(o.bpdn.relaxation > 0.0 && o.bpdn.relaxation < 2.0)) {
    throw ConfigError("config key 'bpdn.relaxation': must lie in (0, 2)");
  }
  if (o.bpdn.adapt_every < 1) throw ConfigError("config key 'bpdn.adapt_every': must be >= 1");
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json snr_json(double v) { return std::isinf(v) && v > 0 ? Json("noiseless") : Json(v); }

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override key '" + path + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key '" + path + "' descends into a non-object");
      *node = Json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RecoveryOptions recovery_options_from_json(const Json& root) {
  Section sec(&root, "");
  RecoveryOptions o;
  read_solver(sec, o);
  sec.finish();
  return o;
}

Json to_json(const RecoveryOptions& o) {
  Json j;
  j["phaselift"] = {{"max_iters", o.phaselift.max_iters},
                    {"tol", o.phaselift.tol},
                    {"lambda", optional_json(o.phaselift.lambda)},
                    {"lambda_scale", o.phaselift.lambda_scale},
                    {"power_iters", o.phaselift.power_iters},
                    {"step_fraction", o.phaselift.step_fraction},
                    {"eta_floor", o.phaselift.eta_floor},
                    {"kappa", o.phaselift.kappa}};
  j["bpdn"] = {{"tol", o.bpdn.tol},
               {"max_iters", o.bpdn.max_iters},
               {"rho", o.bpdn.rho},
               {"scale_rho", o.bpdn.scale_rho},
               {"adaptive", o.bpdn.adaptive},
               {"rho_factor", o.bpdn.rho_factor},
               {"balance_ratio", o.bpdn.balance_ratio},
               {"relaxation", o.bpdn.relaxation},
               {"adapt_every", o.bpdn.adapt_every},
               {"adapt_until", o.bpdn.adapt_until},
               {"polish", o.bpdn.polish},
               {"certify_every", o.bpdn.certify_every}};
  j["recovery"] = {{"eta", optional_json(o.eta)},
                   {"oracle_eta", o.oracle_eta},
                   {"debias", o.debias},
                   {"debias_threshold", o.debias_threshold}};
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& root, Experiment e) {
  Section sec(&root, "");
  ExperimentConfig c;
  sec.get("n", c.n);
  sec.get("s", c.s);
  sec.get("n_list", c.n_list);
  sec.get("s_list", c.s_list);
  sec.get("m_coeff", c.m_coeff);
  sec.get("m", c.m);
  sec.get("m_tilde", c.m_tilde);
  sec.get("m_tilde_coeff", c.m_tilde_coeff);
  sec.get("m_tilde_factor", c.m_tilde_factor);
  sec.get("trials", c.trials);
  sec.get_snr_list("snr_db", c.snr_list);
  sec.get("base_seed", c.base_seed, /*required=*/true);
  std::string kind;
  sec.get("phase_kind", kind);
  if (!kind.empty()) c.phase_kind = wrap_parse("phase_kind", [&] { return parse_phase_kind(kind); });
  kind.clear();
  sec.get("cs_kind", kind);
  if (!kind.empty()) c.cs_kind = wrap_parse("cs_kind", [&] { return parse_cs_kind(kind); });
  sec.get("fixed_ensemble", c.fixed_ensemble);
  sec.get("success_rate", c.success_rate);
  sec.get("m_tilde_start", c.m_tilde_start);
  sec.get("m_tilde_step", c.m_tilde_step);
  sec.get("m_tilde_max", c.m_tilde_max);
  sec.get("budget_seconds", c.budget_seconds);
  sec.get("threads", c.threads);
  sec.get("record_timings", c.record_timings);
  read_solver(sec, c.solver);
  c.success_threshold = c.solver.success_threshold;
  sec.finish();

  if (c.m_tilde && c.m_tilde_coeff) throw ConfigError("config: set at most one of 'm_tilde' and 'm_tilde_coeff'");
  if (c.trials == 0) throw ConfigError("config key 'trials': must be >= 1");
  if (c.threads == 0) throw ConfigError("config key 'threads': must be >= 1");
  if (e != Experiment::kNoise) {
    for (double snr : c.snr_list) {
      if (!std::isinf(snr)) throw ConfigError("config key 'snr_db': " + std::string(to_string(e)) + " runs noiseless");
    }
    c.snr_list = {kNoiseless};
  }
  return c;
}

Json to_json(const ExperimentConfig& c, Experiment e) {
  Json j;
  j["experiment"] = to_string(e);
  j["n"] = c.n;
  j["s"] = c.s;
  j["n_list"] = c.n_list;
  j["s_list"] = c.s_list;
  j["m_coeff"] = c.m_coeff;
  j["m"] = optional_json(c.m);
  j["m_tilde"] = optional_json(c.m_tilde);
  j["m_tilde_coeff"] = optional_json(c.m_tilde_coeff);
  j["m_tilde_factor"] = c.m_tilde_factor;
  j["trials"] = c.trials;
  Json snr = Json::array();
  for (double v : c.snr_list) snr.push_back(snr_json(v));
  j["snr_db"] = snr;
  j["success_threshold"] = c.success_threshold;
  j["base_seed"] = c.base_seed;
  j["phase_kind"] = to_string(c.phase_kind);
  j["cs_kind"] = to_string(c.cs_kind);
  j["fixed_ensemble"] = c.fixed_ensemble;
  j["success_rate"] = c.success_rate;
  j["m_tilde_start"] = optional_json(c.m_tilde_start);
  j["m_tilde_step"] = c.m_tilde_step;
  j["m_tilde_max"] = optional_json(c.m_tilde_max);
  j["budget_seconds"] = c.budget_seconds;
  j["threads"] = c.threads;
  j["record_timings"] = c.record_timings;
  j.update(to_json(c.solver));
  return j;
}

RecoverConfig recover_config_from_json(const Json& root) {
  Section sec(&root, "");
  RecoverConfig c;
  sec.get("n", c.n);
  sec.get("s", c.s);
  sec.get("m", c.m);
  sec.get("m_tilde", c.m_tilde);
  sec.get("m_coeff", c.m_coeff);
  sec.get("m_tilde_factor", c.m_tilde_factor);
  sec.get_snr("snr_db", c.snr_db);
  sec.get("seed", c.seed, /*required=*/false);
  std::string kind;
  sec.get("phase_kind", kind);
  if (!kind.empty()) c.phase_kind = wrap_parse("phase_kind", [&] { return parse_phase_kind(kind); });
  kind.clear();
  sec.get("cs_kind", kind);
  if (!kind.empty()) c.cs_kind = wrap_parse("cs_kind", [&] { return parse_cs_kind(kind); });
  sec.get("ensemble", c.ensemble);
  sec.get("measurements", c.measurements);
  read_solver(sec, c.solver);
  sec.finish();

  if (c.ensemble || c.measurements) {
    if (!c.ensemble) throw ConfigError("missing required key 'ensemble'");
    if (!c.measurements) throw ConfigError("missing required key 'measurements'");
  } else {
    if (!c.n) throw ConfigError("missing required key 'n'");
    if (!c.s) throw ConfigError("missing required key 's'");
  }
  return c;
}

Json to_json(const RecoverConfig& c) {
  Json j;
  j["n"] = optional_json(c.n);
  j["s"] = optional_json(c.s);
  j["m"] = optional_json(c.m);
  j["m_tilde"] = optional_json(c.m_tilde);
  j["m_coeff"] = c.m_coeff;
  j["m_tilde_factor"] = c.m_tilde_factor;
  j["snr_db"] = snr_json(c.snr_db);
  j["seed"] = c.seed;
  j["phase_kind"] = to_string(c.phase_kind);
  j["cs_kind"] = to_string(c.cs_kind);
  j["ensemble"] = c.ensemble ? Json(c.ensemble->string()) : Json(nullptr);
  j["measurements"] = c.measurements ? Json(c.measurements->string()) : Json(nullptr);
  j["success_threshold"] = c.solver.success_threshold;
  j.update(to_json(c.solver));
  return j;
}

CheckMatrixConfig check_matrix_config_from_json(const Json& root) {
  Section sec(&root, "");
  CheckMatrixConfig c;
  sec.get("n", c.n);
  sec.get("m", c.m);
  sec.get("s", c.s);
  sec.get("kind", c.kind);
  sec.get("seed", c.seed, /*required=*/false);
  sec.get("rho", c.rho);
  sec.get("tau", c.tau);
  sec.get("probes", c.probes);
  sec.get("threads", c.threads);
  sec.finish();
  if (c.kind != "orthonormal") wrap_parse("kind", [&] { return parse_cs_kind(c.kind); });
  if (c.s == 0) throw ConfigError("config key 's': must be >= 1");
  if (c.threads == 0) throw ConfigError("config key 'threads': must be >= 1");
  return c;
}

Json to_json(const CheckMatrixConfig& c) {
  return Json{{"n", c.n},     {"m", c.m},     {"s", c.s},           {"kind", c.kind},       {"seed", c.seed},
              {"rho", c.rho}, {"tau", c.tau}, {"probes", c.probes}, {"threads", c.threads}};
}

Json number_or_tag(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json to_json(const PointSummary& ps) {
  return Json{{"n", ps.point.n},
              {"s", ps.point.s},
              {"m", ps.point.m},
              {"m_tilde", ps.point.m_tilde},
              {"snr_db", snr_json(ps.point.snr_db)},
              {"trials", ps.trials},
              {"successes", ps.successes},
              {"failures", ps.failures},
              {"mean_relative_db", number_or_tag(ps.mean_relative_db)},
              {"mean_relative_l2", number_or_tag(ps.mean_relative_l2)},
              {"mean_stage1_seconds", number_or_tag(ps.mean_stage1_seconds)},
              {"mean_stage2_seconds", number_or_tag(ps.mean_stage2_seconds)},
              {"mean_total_seconds", number_or_tag(ps.mean_total_seconds)}};
}

Json summary_json(const ExperimentConfig& cfg, const NoiseSweep& sweep) {
  Json j;
  j["config"] = to_json(cfg, Experiment::kNoise);
  Json points = Json::array();
  for (const auto& ps : sweep.summary) {
    Json p = to_json(ps);
    const double noise_db = -ps.point.snr_db;
    p["noise_level_db"] = number_or_tag(noise_db);
    p["gap_db"] = std::isinf(noise_db) ? Json(nullptr) : number_or_tag(ps.mean_relative_db - noise_db);
    points.push_back(p);
  }
  j["points"] = points;
  return j;
}

Json summary_json(const ExperimentConfig& cfg, const MinMeasurements& result) {
  Json j;
  j["config"] = to_json(cfg, Experiment::kMinMeasurements);
  Json table = Json::array();
  for (const auto& r : result.table) {
    table.push_back(Json{{"s", r.s},
                         {"m", r.m},
                         {"m_tilde_min", r.m_tilde_min},
                         {"success_rate", r.success_rate},
                         {"avg_seconds", number_or_tag(r.avg_seconds)},
                         {"found", r.found}});
  }
  j["table"] = table;
  j["points"] = Json::array();
  for (const auto& ps : summarize(result.rows)) j["points"].push_back(to_json(ps));
  return j;
}

Json summary_json(const ExperimentConfig& cfg, const RuntimeScaling& result) {
  Json j;
  j["config"] = to_json(cfg, Experiment::kRuntime);
  Json table = Json::array();
  for (const auto& r : result.table) {
    table.push_back(Json{{"n", r.n},
                         {"s", r.s},
                         {"m", r.m},
                         {"m_tilde", r.m_tilde},
                         {"avg_total_seconds", number_or_tag(r.avg_total_seconds)},
                         {"avg_stage1_seconds", number_or_tag(r.avg_stage1_seconds)},
                         {"avg_stage2_seconds", number_or_tag(r.avg_stage2_seconds)}});
  }
  j["table"] = table;
  j["stage1_slope_seconds_per_n"] = number_or_tag(result.stage1_slope);
  j["stage1_slope_stderr"] = number_or_tag(result.stage1_slope_stderr);
  j["stage1_spread"] = number_or_tag(result.stage1_spread);
  j["stage2_increasing"] = result.stage2_increasing;
  j["within_budget"] = result.within_budget;
  j["points"] = Json::array();
  for (const auto& ps : summarize(result.rows)) j["points"].push_back(to_json(ps));
  return j;
}

}  // namespace cpr
