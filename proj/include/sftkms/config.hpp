#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "sftkms/checks.hpp"

namespace sftkms {

using Json = nlohmann::json;

/// Parsed job description.  Word keys in value tables are the symbol strings
/// produced by word_to_string (digits, then lowercase letters).
struct JobConfig {
  JobConfig(Sft s, CylFn h) : system(std::move(s)), potential(std::move(h)) {}

  Sft system;
  CylFn potential;
  std::optional<double> beta;
  int depth_test = 4;
  int depth_ops = 5;
  double tol_alg = 1e-12;
  double tol_num = 1e-8;
  std::uint64_t seed = 1;
  int samples_algebra = 200;
  int samples_kms = 1000;
  int samples_ground = 100;
  std::vector<double> beta_grid;
  double z_max = 10.0;
};

JobConfig parse_config(const Json& j);
JobConfig load_config(const std::string& path);

/// Applies the config's tolerances to the global settings and builds the
/// verification context.
CheckContext make_check_context(const JobConfig& cfg);

Json sft_to_json(const Sft& s);
Sft sft_from_json(const Json& j);

/// {"constant": c} or {"depth": d, "values": {"word": v}}; a value is a real
/// number or an [re, im] pair.
Json cyl_fn_to_json(const CylFn& f);
CylFn cyl_fn_from_json(const Sft& s, const Json& j);

/// A solved (or externally stored) state, reloadable for evaluation.
struct StoredState {
  StoredState(Sft base_in, CylMeasure m) : base(std::move(base_in)), measure(std::move(m)) {}

  Sft base;
  std::optional<BlockRecode> recode;
  CylMeasure measure;  // on the recoded system when recode is set
  std::optional<double> beta;

  Complex eval(const CylFn& f) const;        // f on the base system
  Complex psi(const StarElem& x) const;      // phi o G
};

Json solution_to_json(const KmsSolution& sol);
StoredState state_from_json(const Json& j);
StoredState state_from_solution(const KmsSolution& sol);

/// {"terms": [{"a": <fn>, "n": 0, "m": 0, "b": <fn>}, ...]}
StarElem star_elem_from_json(const Sft& s, const Json& j);

Json check_results_to_json(const std::vector<CheckResult>& results);
Json pressure_to_json(const std::vector<PressureRow>& rows);
std::string pressure_to_csv(const std::vector<PressureRow>& rows);

}  // namespace sftkms
