#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoi/bounds.hpp"
#include "aoi/config.hpp"
#include "aoi/dp_oracle.hpp"
#include "aoi/policies.hpp"
#include "aoi/rng.hpp"
#include "aoi/sim_harness.hpp"

// Front-end plumbing shared by the aoi_sched tool and its tests: experiment
// files, figure presets and CSV emission.

namespace aoi::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kInfeasible = 3 };

inline constexpr const char* kSimulateHeader =
    "policy,M,T,K,runs,seed,ewsaoi_mean,ewsaoi_stderr,J_mean,lower_bound_ewsaoi,"
    "upper_bound_ewsaoi,rho";
inline constexpr const char* kBoundsHeader =
    "M,T,L_B,C_V,ub_greedy,rho_greedy,ub_randomized,rho_randomized,ub_maxweight,"
    "rho_maxweight,ub_whittle,rho_whittle";
inline constexpr const char* kDpHeader = "M,T,K,ewsaoi_optimal,state_count";

/// Nine significant digits, "%.9g"; non-finite values become an empty field.
inline std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment files
// ---------------------------------------------------------------------------

enum class PolicyName { Greedy, Randomized, MaxWeight, Whittle, Dp };

inline std::optional<PolicyName> parse_policy_name(const std::string& s) {
  static const std::map<std::string, PolicyName> names = {
      {"greedy", PolicyName::Greedy},       {"randomized", PolicyName::Randomized},
      {"maxweight", PolicyName::MaxWeight}, {"whittle", PolicyName::Whittle},
      {"dp", PolicyName::Dp}};
  auto it = names.find(s);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

inline const char* to_string(PolicyName p) {
  switch (p) {
    case PolicyName::Greedy: return "greedy";
    case PolicyName::Randomized: return "randomized";
    case PolicyName::MaxWeight: return "maxweight";
    case PolicyName::Whittle: return "whittle";
    case PolicyName::Dp: return "dp";
  }
  return "";
}

struct ExperimentFile {
  NetworkConfig config;
  std::size_t runs = 1;
  std::uint64_t master_seed = 0;
  std::vector<PolicyName> policies;
  std::optional<std::vector<double>> beta;
  std::string beta_rule = "sqrt_alpha_over_p";

  std::vector<double> resolved_beta() const {
    if (beta) return *beta;
    return beta_sqrt_alpha_over_p(config);
  }
};

namespace detail {

using nlohmann::json;

inline std::uint64_t get_count(const json& j, const std::string& key, bool allow_zero = false) {
  if (!j.is_number_integer()) throw config_error(key, "must be an integer");
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v == 0 && !allow_zero) throw config_error(key, "must be positive");
    return v;
  }
  const auto v = j.get<std::int64_t>();
  if (v < 0 || (v == 0 && !allow_zero)) throw config_error(key, "must be positive");
  return static_cast<std::uint64_t>(v);
}

inline double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw config_error(key, "must be a number");
  return j.get<double>();
}

inline PolicyName get_policy(const json& j) {
  if (!j.is_string()) throw config_error("policy", "must be a string");
  auto p = parse_policy_name(j.get<std::string>());
  if (!p)
    throw config_error("policy", "unknown policy '" + j.get<std::string>() +
                                     "' (greedy|randomized|maxweight|whittle|dp)");
  return *p;
}

}  // namespace detail

/// Parses and validates a JSON experiment document. Unknown keys are errors.
inline ExperimentFile parse_experiment(const nlohmann::json& doc) {
  using detail::json;
  if (!doc.is_object()) throw config_error("<root>", "expected a JSON object");
  static const std::set<std::string> allowed = {"T",    "K",         "runs",   "master_seed",
                                                "policy", "beta", "beta_rule", "clients"};
  for (const auto& [key, _] : doc.items())
    if (!allowed.count(key)) throw config_error(key, "unknown key");
  for (const char* required : {"T", "K", "clients"})
    if (!doc.contains(required)) throw config_error(required, "missing");

  ExperimentFile f;
  f.config.slots_per_frame = detail::get_count(doc["T"], "T");
  f.config.horizon = detail::get_count(doc["K"], "K");
  if (doc.contains("runs")) f.runs = detail::get_count(doc["runs"], "runs");
  if (doc.contains("master_seed"))
    f.master_seed = detail::get_count(doc["master_seed"], "master_seed", true);

  if (doc.contains("policy")) {
    const auto& p = doc["policy"];
    if (p.is_array()) {
      for (const auto& e : p) f.policies.push_back(detail::get_policy(e));
      if (f.policies.empty()) throw config_error("policy", "empty list");
    } else {
      f.policies.push_back(detail::get_policy(p));
    }
  } else {
    f.policies.push_back(PolicyName::Greedy);
  }

  const auto& clients = doc["clients"];
  if (!clients.is_array() || clients.empty())
    throw config_error("clients", "must be a non-empty list");
  static const std::set<std::string> client_keys = {"p", "alpha", "h1"};
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto& c = clients[i];
    const std::string where = "clients[" + std::to_string(i) + "]";
    if (!c.is_object()) throw config_error(where, "must be an object");
    for (const auto& [key, _] : c.items())
      if (!client_keys.count(key)) throw config_error(where + "." + key, "unknown key");
    if (!c.contains("p")) throw config_error(where + ".p", "missing");
    f.config.reliability.push_back(detail::get_real(c["p"], where + ".p"));
    f.config.weight.push_back(c.contains("alpha") ? detail::get_real(c["alpha"], where + ".alpha")
                                                  : 1.0);
    f.config.initial_aoi.push_back(c.contains("h1") ? detail::get_count(c["h1"], where + ".h1")
                                                    : 1);
  }
  f.config.validate();

  if (doc.contains("beta") && doc.contains("beta_rule"))
    throw config_error("beta", "give either beta or beta_rule, not both");
  if (doc.contains("beta")) {
    const auto& b = doc["beta"];
    if (!b.is_array()) throw config_error("beta", "must be a list");
    std::vector<double> beta;
    for (const auto& e : b) beta.push_back(detail::get_real(e, "beta"));
    f.beta = std::move(beta);
    validate_policy(Randomized{*f.beta}, f.config);
  }
  if (doc.contains("beta_rule")) {
    if (!doc["beta_rule"].is_string() || doc["beta_rule"].get<std::string>() != "sqrt_alpha_over_p")
      throw config_error("beta_rule", "only \"sqrt_alpha_over_p\" is supported");
  }
  return f;
}

inline ExperimentFile parse_experiment(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_experiment(doc);
}

inline PolicyKind make_policy(PolicyName name, const std::vector<double>& beta) {
  switch (name) {
    case PolicyName::Greedy: return Greedy{};
    case PolicyName::Randomized: return Randomized{beta};
    case PolicyName::MaxWeight: return MaxWeight{};
    case PolicyName::Whittle: return WhittleIndex{};
    case PolicyName::Dp: break;
  }
  throw std::logic_error("make_policy: dp is not a simulated policy");
}

// ---------------------------------------------------------------------------
// Row emission
// ---------------------------------------------------------------------------

struct CommandOutput {
  std::string csv;
  int exit_code = kOk;
  std::string diagnostics;  // for stderr
};

namespace detail {

inline std::string simulate_row(const char* policy, const NetworkConfig& c, std::size_t runs,
                                std::uint64_t seed, double ewsaoi, double ewsaoi_se, double j,
                                double lb_ewsaoi, double ub_ewsaoi, double rho) {
  std::ostringstream os;
  os << policy << ',' << c.num_clients() << ',' << c.slots_per_frame << ',' << c.horizon << ','
     << runs << ',' << seed << ',' << fmt(ewsaoi) << ',' << fmt(ewsaoi_se) << ',' << fmt(j) << ','
     << fmt(lb_ewsaoi) << ',' << fmt(ub_ewsaoi) << ',' << fmt(rho);
  return os.str();
}

}  // namespace detail

/// One grid point: every requested policy, simulated or solved, as CSV rows
/// without the header. Throws dp_infeasible for an oversized dp request.
inline std::vector<std::string> point_rows(const NetworkConfig& config,
                                           const std::vector<PolicyName>& policies,
                                           const std::vector<double>& beta, std::size_t runs,
                                           std::uint64_t seed, std::size_t threads) {
  std::vector<std::string> rows;
  const BoundsReport bounds = compute_bounds(config, beta);
  const double lb_e = ewsaoi_from_objective(bounds.lower_bound, config);
  for (auto name : policies) {
    if (name == PolicyName::Dp) {
      const auto sol = dp_optimal(config);
      const double j = sol.optimal_expected_J;
      rows.push_back(detail::simulate_row("dp", config, runs, seed, ewsaoi_from_objective(j, config),
                                          0.0, j, lb_e, NAN, NAN));
      continue;
    }
    const ExperimentSpec spec{config, make_policy(name, beta), runs, seed};
    const auto stats = monte_carlo(spec, threads);
    const double ub = policy_upper_bound(bounds, spec.policy);
    rows.push_back(detail::simulate_row(to_string(name), config, runs, seed, stats.mean_ewsaoi,
                                        stats.ewsaoi_std_error, stats.mean_J, lb_e,
                                        ewsaoi_from_objective(ub, config), ub / bounds.lower_bound));
  }
  return rows;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::size_t threads = 0;
};

inline CommandOutput cmd_simulate(ExperimentFile file, const Overrides& ov = {}) {
  if (ov.seed) file.master_seed = *ov.seed;
  if (ov.runs) {
    if (*ov.runs == 0) throw config_error("runs", "must be positive");
    file.runs = *ov.runs;
  }
  CommandOutput out;
  out.csv = std::string(kSimulateHeader) + "\n";
  try {
    for (const auto& row : point_rows(file.config, file.policies, file.resolved_beta(), file.runs,
                                      file.master_seed, ov.threads))
      out.csv += row + "\n";
  } catch (const dp_infeasible& e) {
    out.exit_code = kInfeasible;
    out.diagnostics = e.what();
  }
  return out;
}

inline CommandOutput cmd_bounds(const ExperimentFile& file, bool ewsaoi_scale = false) {
  const auto& c = file.config;
  const auto b = compute_bounds(c, file.resolved_beta());
  auto scale = [&](double j) { return ewsaoi_scale ? ewsaoi_from_objective(j, c) : j; };
  std::ostringstream os;
  os << kBoundsHeader << '\n'
     << c.num_clients() << ',' << c.slots_per_frame << ',' << fmt(scale(b.lower_bound)) << ','
     << fmt(b.cv) << ',' << fmt(scale(b.ub_greedy_asymptotic)) << ',' << fmt(b.rho_greedy) << ','
     << fmt(scale(b.ub_randomized)) << ',' << fmt(b.rho_randomized) << ','
     << fmt(scale(b.ub_maxweight)) << ',' << fmt(b.rho_maxweight) << ','
     << fmt(scale(b.ub_whittle)) << ',' << fmt(b.rho_whittle) << '\n';
  return {os.str(), kOk, {}};
}

/// DP rows for a list of configs; a refused point gets "infeasible" in place
/// of the value and the exit code is nonzero only if every point failed.
inline CommandOutput cmd_dp(const std::vector<NetworkConfig>& configs,
                            const DpOptions& options = {}) {
  CommandOutput out;
  out.csv = std::string(kDpHeader) + "\n";
  std::size_t failures = 0;
  for (const auto& c : configs) {
    std::ostringstream os;
    os << c.num_clients() << ',' << c.slots_per_frame << ',' << c.horizon << ',';
    try {
      const auto sol = dp_optimal(c, options);
      os << fmt(ewsaoi_from_objective(sol.optimal_expected_J, c)) << ',' << fmt(sol.state_count);
    } catch (const dp_infeasible& e) {
      ++failures;
      os << "infeasible," << fmt(e.state_count());
      out.diagnostics += std::string(e.what()) + "\n";
    }
    out.csv += os.str() + "\n";
  }
  if (!configs.empty() && failures == configs.size()) out.exit_code = kInfeasible;
  return out;
}

inline CommandOutput cmd_dp(const ExperimentFile& file, const DpOptions& options = {}) {
  return cmd_dp(std::vector<NetworkConfig>{file.config}, options);
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

enum class Scale { Full, Desk };

/// Campaign sizes. Desk scale cuts fig5/fig6 runs 1000 -> 200, fig7/fig8
/// horizons 50,000 -> 10,000 and fig8 setups 2,000 -> 200.
struct FigurePreset {
  std::string name;
  std::size_t runs_full, runs_desk;
  std::size_t horizon_full, horizon_desk;
  std::size_t setups_full, setups_desk;  // fig8 only
  bool with_dp;
};

inline const std::vector<FigurePreset>& figure_presets() {
  static const std::vector<FigurePreset> presets = {
      {"fig5", 1000, 200, 150, 150, 0, 0, true},
      {"fig6", 1000, 200, 200, 200, 0, 0, true},
      {"fig7", 10, 10, 50000, 10000, 0, 0, false},
      {"fig8", 10, 10, 50000, 10000, 2000, 200, false},
  };
  return presets;
}

inline const FigurePreset& find_preset(const std::string& name) {
  for (const auto& p : figure_presets())
    if (p.name == name) return p;
  throw config_error("figure", "unknown figure '" + name + "' (fig5|fig6|fig7|fig8)");
}

struct FigurePoint {
  double x = 0.0;  // swept parameter: p, T, M, or L_B for fig8
  NetworkConfig config;
};

/// Grid of network setups for a preset. fig8 draws p_i uniformly from (0,1)
/// using `master_seed` and orders setups by ascending lower bound.
inline std::vector<FigurePoint> figure_points(const FigurePreset& preset, Scale scale,
                                              std::uint64_t master_seed) {
  const bool full = scale == Scale::Full;
  const std::size_t K = full ? preset.horizon_full : preset.horizon_desk;
  std::vector<FigurePoint> pts;
  if (preset.name == "fig5") {
    for (int j = 1; j <= 14; ++j) {
      const double p = j / 15.0;
      pts.push_back({p, NetworkConfig::symmetric(2, 5, K, p)});
    }
  } else if (preset.name == "fig6") {
    for (std::size_t T = 1; T <= 10; ++T)
      pts.push_back({static_cast<double>(T), NetworkConfig::make(T, K, {2.0 / 3.0, 0.1}, {1, 1})});
  } else if (preset.name == "fig7") {
    for (std::size_t M = 5; M <= 50; M += 5) {
      std::vector<double> p(M);
      for (std::size_t i = 0; i < M; ++i) p[i] = static_cast<double>(i + 1) / static_cast<double>(M);
      pts.push_back({static_cast<double>(M),
                     NetworkConfig::make(2, K, std::move(p), std::vector<double>(M, 1.0))});
    }
  } else {
    const std::size_t setups = full ? preset.setups_full : preset.setups_desk;
    Rng rng(derive_seed(master_seed, 0xF18u, 0));
    for (std::size_t s = 0; s < setups; ++s) {
      std::vector<double> p(4);
      for (auto& x : p) {
        do x = rng.uniform();
        while (x == 0.0);
      }
      auto c = NetworkConfig::make(2, K, std::move(p), std::vector<double>(4, 1.0));
      pts.push_back({lower_bound(c), std::move(c)});
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const FigurePoint& a, const FigurePoint& b) { return a.x < b.x; });
  }
  return pts;
}

inline constexpr const char* kFigurePrefix = "figure,point,x,";

inline CommandOutput cmd_figure(const std::string& name, Scale scale, std::uint64_t master_seed,
                                std::size_t threads = 0) {
  const auto& preset = find_preset(name);
  const std::size_t runs = scale == Scale::Full ? preset.runs_full : preset.runs_desk;
  std::vector<PolicyName> policies = {PolicyName::Greedy, PolicyName::Randomized,
                                      PolicyName::MaxWeight, PolicyName::Whittle};
  if (preset.with_dp) policies.push_back(PolicyName::Dp);

  CommandOutput out;
  out.csv = std::string(kFigurePrefix) + kSimulateHeader + "\n";
  const auto pts = figure_points(preset, scale, master_seed);
  for (std::size_t idx = 0; idx < pts.size(); ++idx) {
    const auto& pt = pts[idx];
    const std::uint64_t seed = derive_seed(master_seed, 0x9017u, idx);
    const auto rows = point_rows(pt.config, policies, beta_sqrt_alpha_over_p(pt.config), runs, seed,
                                 threads);
    for (const auto& r : rows)
      out.csv += preset.name + "," + std::to_string(idx) + "," + fmt(pt.x) + "," + r + "\n";
  }
  return out;
}

}  // namespace aoi::cli
