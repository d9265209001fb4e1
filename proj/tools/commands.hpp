#pragma once

// Subcommand implementations for the jscc command-line tool. Kept separate from
// argument parsing so tests can drive them in-process.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "jscc/jscc.hpp"

namespace jscc::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitInternal = 3;

class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

struct ProfileOptions {
  std::string profile = "order2";  // order1 | order2 | table:PATH
  std::optional<double> alpha;
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::optional<std::size_t> alpha_points;

  bool sweep_requested() const { return alpha_min || alpha_max || alpha_points; }
};

struct GridOptions {
  double q_min = 1e-4;
  double q_max = 1e4;
  std::size_t q_points = 2000;

  QualityGrid grid() const {
    QualityGrid g{q_min, q_max, q_points, Spacing::Log};
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return g;
  }
};

struct CommandOutput {
  std::string body;
  json manifest;
  int exit_code = kExitOk;
};

inline json make_manifest(const std::string& subcommand, json parameters) {
  return {{"subcommand", subcommand}, {"version", kVersion}, {"parameters", std::move(parameters)}};
}

inline json to_json(const ProfileOptions& p) {
  json j = {{"profile", p.profile}};
  if (p.alpha) j["alpha"] = *p.alpha;
  if (p.alpha_min) j["alpha_min"] = *p.alpha_min;
  if (p.alpha_max) j["alpha_max"] = *p.alpha_max;
  if (p.alpha_points) j["alpha_points"] = *p.alpha_points;
  return j;
}

inline json to_json(const GridOptions& g) {
  return {{"q_min", g.q_min}, {"q_max", g.q_max}, {"q_points", g.q_points}};
}

inline void require_format(const std::string& format) {
  if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
}

/// Alpha values: the single --alpha, or a log-spaced sweep with defaults
/// 1e-2..1e4 over 50 points for any sweep flag left unset.
inline std::vector<double> resolve_alphas(const ProfileOptions& p, bool sweep_by_default) {
  if (p.alpha && p.sweep_requested()) throw UsageError("--alpha cannot be combined with sweep flags");
  if (p.alpha) {
    if (!(*p.alpha > 0.0) || !std::isfinite(*p.alpha)) throw UsageError("--alpha must be positive");
    return {*p.alpha};
  }
  if (!p.sweep_requested() && !sweep_by_default) {
    throw UsageError("rational profiles need --alpha or --alpha-min/--alpha-max/--alpha-points");
  }
  const double lo = p.alpha_min.value_or(1e-2);
  const double hi = p.alpha_max.value_or(1e4);
  const std::size_t n = p.alpha_points.value_or(50);
  if (!(lo > 0.0) || n < 1 || (n > 1 && !(lo < hi))) {
    throw UsageError("alpha sweep needs 0 < alpha-min < alpha-max and alpha-points >= 1");
  }
  return log_space(lo, hi, n);
}

inline Profile make_profile(const std::string& kind, double alpha) {
  if (kind == "order1") return Profile::rational_order1(alpha);
  if (kind == "order2") return Profile::rational_order2(alpha);
  throw UsageError("--profile must be order1, order2 or table:PATH");
}

inline bool is_table_profile(const std::string& kind) { return kind.rfind("table:", 0) == 0; }

inline Profile load_table_profile(const std::string& kind) {
  try {
    return load_profile_csv(kind.substr(6));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline std::string format_q_star(const QStar& q) {
  if (const auto* v = std::get_if<double>(&q)) return format_number(*v);
  return std::get<QLimit>(q) == QLimit::AtZero ? "0" : "inf";
}

inline json q_star_json(const QStar& q) {
  if (const auto* v = std::get_if<double>(&q)) return *v;
  return std::get<QLimit>(q) == QLimit::AtZero ? "AtZero" : "AtInfinity";
}

// ---------------------------------------------------------------------------

struct BoundsOptions {
  ProfileOptions profile;
  GridOptions grid;
  std::string format = "csv";
};

inline CommandOutput cmd_bounds(const BoundsOptions& opt) {
  require_format(opt.format);
  const auto grid = opt.grid.grid();

  struct Row {
    double alpha;
    LowerBoundResult result;
  };
  std::vector<Row> rows;
  if (is_table_profile(opt.profile.profile)) {
    rows.push_back({NAN, lower_bound_pmin(load_table_profile(opt.profile.profile), grid)});
  } else {
    make_profile(opt.profile.profile, 1.0);  // validates the kind before the sweep
    for (double a : resolve_alphas(opt.profile, false)) {
      rows.push_back({a, lower_bound_pmin(make_profile(opt.profile.profile, a), grid)});
    }
  }

  CommandOutput out;
  out.manifest = make_manifest("bounds", {{"profile", to_json(opt.profile)}, {"grid", to_json(opt.grid)},
                                          {"format", opt.format}});
  std::ostringstream os;
  if (opt.format == "csv") {
    os << "alpha,p_lower,q_star\n";
    for (const auto& r : rows) {
      os << format_number(r.alpha) << ',' << format_number(r.result.p_lower) << ','
         << format_q_star(r.result.q_star) << '\n';
    }
  } else {
    json j = {{"manifest", out.manifest}, {"rows", json::array()}};
    for (const auto& r : rows) {
      j["rows"].push_back({{"alpha", std::isnan(r.alpha) ? json(nullptr) : json(r.alpha)},
                           {"p_lower", r.result.p_lower},
                           {"q_star", q_star_json(r.result.q_star)},
                           {"attained", r.result.attained}});
    }
    os << j.dump(2) << '\n';
  }
  out.body = os.str();
  return out;
}

// ---------------------------------------------------------------------------

struct OptimizeOptions {
  ProfileOptions profile;
  std::string pa_rule = "closed";  // closed | exact
  std::string schema = "figure";   // figure | sweep
  std::size_t search_points = 60;
  std::size_t refinement_rounds = 3;
  std::string format = "csv";
};

inline CommandOutput cmd_optimize(const OptimizeOptions& opt) {
  require_format(opt.format);
  if (opt.profile.profile != "order2") throw UsageError("optimize supports --profile order2 only");
  if (opt.pa_rule != "closed" && opt.pa_rule != "exact") throw UsageError("--pa-rule must be closed or exact");
  if (opt.schema != "figure" && opt.schema != "sweep") throw UsageError("--schema must be figure or sweep");
  const PaRule rule = opt.pa_rule == "closed" ? PaRule::ClosedForm : PaRule::Exact;
  GridSpec spec;
  spec.points_per_axis = opt.search_points;
  spec.refinement_rounds = opt.refinement_rounds;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto alphas = resolve_alphas(opt.profile, true);
  const auto rows = sweep_bounds(alphas, rule, spec);

  CommandOutput out;
  out.manifest = make_manifest("optimize", {{"profile", to_json(opt.profile)},
                                            {"pa_rule", opt.pa_rule},
                                            {"schema", opt.schema},
                                            {"search_points", opt.search_points},
                                            {"refinement_rounds", opt.refinement_rounds},
                                            {"format", opt.format}});
  std::ostringstream os;
  if (opt.format == "json") {
    json j = {{"manifest", out.manifest}, {"rows", json::array()}};
    for (const auto& r : rows) {
      j["rows"].push_back({{"alpha", r.alpha},
                           {"p_lower", r.p_lower},
                           {"p_upper", r.p_upper},
                           {"p_lower_db", to_db(r.p_lower)},
                           {"p_upper_db", to_db(r.p_upper)},
                           {"gap_db", r.gap_db},
                           {"p_a", r.p_a},
                           {"p_1", r.p_1},
                           {"q_1", r.q_1}});
    }
    os << j.dump(2) << '\n';
  } else if (opt.schema == "sweep") {
    write_sweep_csv(os, rows);
  } else {
    os << "alpha,p_lower_db,p_upper_db,gap_db,p_a,p_1,q_1\n";
    for (const auto& r : rows) {
      os << format_number(r.alpha) << ',' << format_number(to_db(r.p_lower)) << ','
         << format_number(to_db(r.p_upper)) << ',' << format_number(r.gap_db) << ',' << format_number(r.p_a)
         << ',' << format_number(r.p_1) << ',' << format_number(r.q_1) << '\n';
    }
  }
  out.body = os.str();
  return out;
}

// ---------------------------------------------------------------------------

struct CurveOptions {
  ProfileOptions profile;
  GridOptions grid;
  double p_a = 0.0;
  std::optional<double> p_1;
  std::optional<double> q_1;
  std::vector<std::string> layers;  // "P:Q"
  std::string format = "csv";
};

inline LayeredParams parse_layers(double p_a, const std::vector<std::string>& specs) {
  LayeredParams lp;
  lp.p_a = p_a;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("--layers entries must be P:Q, got '" + s + "'");
    try {
      std::size_t used_p = 0, used_q = 0;
      const std::string ps = s.substr(0, colon), qs = s.substr(colon + 1);
      const double p = std::stod(ps, &used_p);
      const double q = std::stod(qs, &used_q);
      if (used_p != ps.size() || used_q != qs.size()) throw std::invalid_argument("trailing");
      lp.layer_powers.push_back(p);
      lp.thresholds.push_back(q);
    } catch (const std::logic_error&) {
      throw UsageError("--layers entries must be P:Q, got '" + s + "'");
    }
  }
  try {
    lp.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return lp;
}

inline CommandOutput cmd_curve(const CurveOptions& opt) {
  require_format(opt.format);
  const auto grid = opt.grid.grid();
  if (!opt.layers.empty() && (opt.p_1 || opt.q_1)) throw UsageError("--layers cannot be combined with --p1/--q1");

  const LayeredParams lp =
      opt.layers.empty() ? LayeredParams::from_hybrid({opt.p_a, opt.p_1.value_or(0.0), opt.q_1.value_or(1.0)})
                         : parse_layers(opt.p_a, opt.layers);
  try {
    lp.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Profile target = Profile::rational_order2(1.0);
  if (is_table_profile(opt.profile.profile)) {
    target = load_table_profile(opt.profile.profile);
  } else {
    if (!opt.profile.alpha) throw UsageError("curve needs --alpha for rational profiles");
    if (opt.profile.sweep_requested()) throw UsageError("curve takes a single --alpha");
    target = make_profile(opt.profile.profile, resolve_alphas(opt.profile, false).front());
  }

  const bool hybrid = opt.layers.empty();
  const HybridParams hp{lp.p_a, lp.layer_powers.front(), lp.thresholds.front()};
  const auto fidelity = [&](double q) { return hybrid ? hybrid_fidelity(hp, q) : multilayer_fidelity(lp, q); };

  CommandOutput out;
  json params = {{"profile", to_json(opt.profile)}, {"grid", to_json(opt.grid)}, {"p_a", lp.p_a},
                 {"format", opt.format}};
  if (hybrid) {
    params["p_1"] = hp.p_1;
    params["q_1"] = hp.q_1;
  } else {
    params["layers"] = opt.layers;
  }
  out.manifest = make_manifest("curve", params);

  std::ostringstream os;
  json rows = json::array();
  if (opt.format == "csv") os << "q,f_scheme,f_profile,margin\n";
  for (double q : compliance_points(grid, lp.thresholds)) {
    if (q < target.q_lo() || q > target.q_hi()) continue;
    const double f = fidelity(q);
    const double t = target(q);
    if (opt.format == "csv") {
      os << format_number(q) << ',' << format_number(f) << ',' << format_number(t) << ','
         << format_number(f - t) << '\n';
    } else {
      rows.push_back({{"q", q}, {"f_scheme", f}, {"f_profile", t}, {"margin", f - t}});
    }
  }
  if (opt.format == "json") os << json{{"manifest", out.manifest}, {"rows", rows}}.dump(2) << '\n';
  out.body = os.str();
  return out;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::size_t n = 100;
  double power = 1.0;
  double p_1 = 0.0;
  double noise = 1.0;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  std::string k_matrix;  // rows separated by ';', entries by ','
  bool check = false;
  std::string format = "json";
};

/// Parses "a,b;c,d" into a row-major matrix.
inline Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> vals;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw UsageError("--k-matrix: not a number: '" + cell + "'");
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty() || rows.front().empty()) throw UsageError("--k-matrix is empty");
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw UsageError("--k-matrix rows differ in length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return k;
}

inline CommandOutput cmd_simulate(const SimulateOptions& opt) {
  require_format(opt.format);
  if (opt.trials < 1) throw UsageError("--trials must be >= 1");

  SimResult result;
  double closed_form = 0.0;
  json params = {{"noise", opt.noise}, {"p_1", opt.p_1}, {"trials", opt.trials}, {"seed", opt.seed}};
  try {
    if (opt.k_matrix.empty()) {
      const SimConfig cfg{opt.n, opt.power, opt.p_1, opt.noise, opt.trials, opt.seed};
      cfg.validate();
      result = simulate_uncoded(cfg);
      closed_form = 1.0 - opt.power / (opt.power + opt.p_1 + opt.noise) / static_cast<double>(opt.n);
      params["mode"] = "uncoded";
      params["n"] = opt.n;
      params["power"] = opt.power;
    } else {
      const Eigen::MatrixXd k = parse_matrix(opt.k_matrix);
      const MatrixScheme ms{k, Eigen::MatrixXd::Identity(k.cols(), k.cols()), opt.p_1};
      ms.validate();
      result = simulate_matrix_analog(ms, opt.noise, opt.trials, opt.seed);
      closed_form = matrix_analog_distortion(ms, opt.noise);
      params["mode"] = "matrix";
      params["k_matrix"] = opt.k_matrix;
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  params["check"] = opt.check;
  params["format"] = opt.format;

  const bool agrees = std::fabs(result.mean_distortion - closed_form) <= 4.0 * result.std_error;
  CommandOutput out;
  out.manifest = make_manifest("simulate", params);
  out.manifest["seed"] = opt.seed;
  if (opt.check && !agrees) out.exit_code = kExitCheckFailed;

  std::ostringstream os;
  if (opt.format == "json") {
    json j = {{"mean", result.mean_distortion},
              {"std_error", result.std_error},
              {"trials", result.trials},
              {"seed", opt.seed},
              {"closed_form", closed_form},
              {"within_4_std_error", agrees},
              {"params", params},
              {"manifest", out.manifest}};
    os << j.dump(2) << '\n';
  } else {
    os << "mean,std_error,trials,seed,closed_form\n"
       << format_number(result.mean_distortion) << ',' << format_number(result.std_error) << ',' << result.trials
       << ',' << opt.seed << ',' << format_number(closed_form) << '\n';
  }
  out.body = os.str();
  return out;
}

}  // namespace jscc::cli
