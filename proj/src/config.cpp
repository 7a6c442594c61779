#include "sftkms/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sftkms {

namespace {

[[noreturn]] void config_fail(const std::string& message) { fail("ConfigError", message); }

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) config_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

Complex parse_value(const Json& v) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  config_fail("values must be numbers or [re, im] pairs");
}

Json value_to_json(Complex z) {
  if (z.imag() == 0.0) return Json(z.real());
  return Json::array({z.real(), z.imag()});
}

}  // namespace

Json sft_to_json(const Sft& s) {
  Json rows = Json::array();
  for (int i = 0; i < s.alphabet_size(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < s.alphabet_size(); ++j) row.push_back(s.transitions()(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"k", s.alphabet_size()}, {"transitions", std::move(rows)}};
}

Sft sft_from_json(const Json& j) {
  int k = require(j, "k").get<int>();
  const Json& rows = require(j, "transitions");
  if (!rows.is_array() || static_cast<int>(rows.size()) != k)
    config_fail("transitions must be a k x k array");
  IntMat trans(k, k);
  for (int i = 0; i < k; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != k)
      config_fail("transitions must be a k x k array");
    for (int c = 0; c < k; ++c) trans(i, c) = rows[i][c].get<int>();
  }
  try {
    return Sft::make(k, trans);
  } catch (const Error& e) {
    // validation failures of the system description are config errors
    config_fail(e.what());
  }
}

Json cyl_fn_to_json(const CylFn& f) {
  if (f.depth() == 0) return Json{{"constant", value_to_json(f.values()[0])}};
  Json values = Json::object();
  const WordIndex& words = f.sft().words(f.depth());
  for (int i = 0; i < words.count(); ++i)
    values[word_to_string(words.word(i))] = value_to_json(f.values()[i]);
  return Json{{"depth", f.depth()}, {"values", std::move(values)}};
}

CylFn cyl_fn_from_json(const Sft& s, const Json& j) {
  if (j.is_number()) return CylFn::constant(s, j.get<double>());
  if (j.contains("constant")) return CylFn::constant(s, parse_value(j.at("constant")));
  int depth = require(j, "depth").get<int>();
  if (depth < 0) config_fail("depth must be nonnegative");
  const Json& values = require(j, "values");
  const WordIndex& words = s.words(depth);
  Vec v = Vec::Zero(words.count());
  std::vector<bool> seen(words.count(), false);
  for (auto it = values.begin(); it != values.end(); ++it) {
    Word w = word_from_string(it.key(), s.alphabet_size());
    if (static_cast<int>(w.size()) != depth) config_fail("word '" + it.key() + "' has wrong length");
    int idx = words.find(w);
    if (idx < 0) config_fail("word '" + it.key() + "' is not admissible");
    v[idx] = parse_value(it.value());
    seen[idx] = true;
  }
  for (int i = 0; i < words.count(); ++i)
    if (!seen[i]) config_fail("missing value for word '" + word_to_string(words.word(i)) + "'");
  return CylFn::from_values(s, depth, std::move(v));
}

JobConfig parse_config(const Json& j) {
  Sft system = sft_from_json(require(j, "system"));
  CylFn potential = cyl_fn_from_json(system, require(j, "potential"));
  JobConfig cfg(std::move(system), std::move(potential));
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("depths")) {
    const Json& d = j.at("depths");
    if (d.contains("test")) cfg.depth_test = d.at("test").get<int>();
    if (d.contains("ops")) cfg.depth_ops = d.at("ops").get<int>();
  }
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    if (t.contains("alg")) cfg.tol_alg = t.at("alg").get<double>();
    if (t.contains("num")) cfg.tol_num = t.at("num").get<double>();
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("samples")) {
    const Json& s = j.at("samples");
    if (s.contains("algebra")) cfg.samples_algebra = s.at("algebra").get<int>();
    if (s.contains("kms_pairs")) cfg.samples_kms = s.at("kms_pairs").get<int>();
    if (s.contains("ground_pairs")) cfg.samples_ground = s.at("ground_pairs").get<int>();
  }
  if (j.contains("beta_grid")) cfg.beta_grid = j.at("beta_grid").get<std::vector<double>>();
  if (j.contains("z_max")) cfg.z_max = j.at("z_max").get<double>();
  if (cfg.depth_test < 1 || cfg.depth_ops < 2) config_fail("depths must be at least {test: 1, ops: 2}");
  return cfg;
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    config_fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

CheckContext make_check_context(const JobConfig& cfg) {
  settings().alg = cfg.tol_alg;
  settings().num = cfg.tol_num;
  CheckContext ctx{cfg.system, cfg.potential};
  ctx.depth_test = cfg.depth_test;
  ctx.depth_ops = cfg.depth_ops;
  ctx.samples = cfg.samples_algebra;
  ctx.kms_samples = cfg.samples_kms;
  ctx.ground_samples = cfg.samples_ground;
  ctx.z_max = cfg.z_max;
  ctx.seed = cfg.seed;
  ctx.beta = cfg.beta;
  return ctx;
}

Complex StoredState::eval(const CylFn& f) const {
  if (recode) return state_eval(measure, transport_fn(*recode, f));
  return state_eval(measure, f);
}

Complex StoredState::psi(const StarElem& x) const { return eval(star_expectation(x)); }

Json solution_to_json(const KmsSolution& sol) {
  Json out;
  out["system"] = sft_to_json(sol.base_sft);
  out["beta"] = sol.beta;
  out["rho_residual"] = sol.rho_residual;
  out["eigengap"] = sol.eigen_gap;
  if (sol.recode) out["recode_r"] = sol.recode->r;
  Json nu = Json::array();
  for (int i = 0; i < sol.measure.nu.size(); ++i) nu.push_back(sol.measure.nu[i]);
  Json kernel = Json::array();
  for (int i = 0; i < sol.measure.kernel.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < sol.measure.kernel.cols(); ++j) row.push_back(sol.measure.kernel(i, j));
    kernel.push_back(std::move(row));
  }
  out["measure"] = Json{{"nu", std::move(nu)}, {"kernel", std::move(kernel)}};
  // cylinder weights up to depth 3 for display
  Json weights = Json::object();
  const Sft& sys = sol.solve_sft();
  for (int d = 1; d <= 3; ++d) {
    const WordIndex& words = sys.words(d);
    for (int i = 0; i < words.count(); ++i)
      weights[word_to_string(words.word(i))] = cylinder_weight(sol.measure, words.word(i));
  }
  out["weights"] = std::move(weights);
  return out;
}

StoredState state_from_json(const Json& j) {
  Sft base = sft_from_json(require(j, "system"));
  std::optional<BlockRecode> recode;
  Sft sys = base;
  if (j.contains("recode_r") && !j.at("recode_r").is_null()) {
    recode = higher_block_recode(base, j.at("recode_r").get<int>());
    sys = recode->block;
  }
  const Json& m = require(j, "measure");
  const Json& nu_j = require(m, "nu");
  const Json& kernel_j = require(m, "kernel");
  const int k = sys.alphabet_size();
  if (static_cast<int>(nu_j.size()) != k || static_cast<int>(kernel_j.size()) != k)
    config_fail("measure shape does not match the system");
  RealVec nu(k);
  RealMat kernel(k, k);
  for (int i = 0; i < k; ++i) {
    nu[i] = nu_j[i].get<double>();
    for (int c = 0; c < k; ++c) kernel(i, c) = kernel_j[i][c].get<double>();
  }
  // lenient construction: consistency is a verification suite's concern
  StoredState st(std::move(base), CylMeasure{sys, std::move(nu), std::move(kernel)});
  st.recode = std::move(recode);
  if (j.contains("beta")) st.beta = j.at("beta").get<double>();
  return st;
}

StoredState state_from_solution(const KmsSolution& sol) {
  StoredState st(sol.base_sft, sol.measure);
  st.recode = sol.recode;
  st.beta = sol.beta;
  return st;
}

StarElem star_elem_from_json(const Sft& s, const Json& j) {
  const Json& terms = j.is_array() ? j : require(j, "terms");
  if (!terms.is_array()) config_fail("term list must be an array");
  StarElem out(s);
  for (const Json& t : terms) {
    CylFn a = cyl_fn_from_json(s, require(t, "a"));
    CylFn b = cyl_fn_from_json(s, require(t, "b"));
    int n = require(t, "n").get<int>();
    int m = require(t, "m").get<int>();
    if (n < 0 || m < 0) config_fail("exponents must be nonnegative");
    out = out + StarElem::term(a, n, m, b);
  }
  return out;
}

Json check_results_to_json(const std::vector<CheckResult>& results) {
  Json suites = Json::array();
  for (const CheckResult& r : results) {
    Json s{{"name", r.name}, {"status", r.status}, {"tolerance", r.tolerance}};
    if (std::isfinite(r.residual))
      s["residual"] = r.residual;
    else
      s["residual"] = "inf";
    if (!r.note.empty()) s["note"] = r.note;
    suites.push_back(std::move(s));
  }
  return Json{{"suites", std::move(suites)}, {"all_pass", all_passed(results)}};
}

Json pressure_to_json(const std::vector<PressureRow>& rows) {
  Json out = Json::array();
  for (const PressureRow& r : rows)
    out.push_back(Json{{"beta", r.beta}, {"rho", r.rho}, {"log_rho", r.log_rho}});
  return Json{{"rows", std::move(out)}};
}

std::string pressure_to_csv(const std::vector<PressureRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "beta,rho,log_rho\n";
  for (const PressureRow& r : rows) os << r.beta << "," << r.rho << "," << r.log_rho << "\n";
  return os.str();
}

}  // namespace sftkms
