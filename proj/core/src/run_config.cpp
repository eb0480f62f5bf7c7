#include "plasmode/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace plasmode {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config error: " + msg); }

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail("unknown key '" + it.key() + "' in " + where);
  }
}

const json& require_key(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing key '") + key + "' in " + where);
  return *it;
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) fail(what + " must be a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(what + " must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > 9007199254740992ULL)
    fail(what + " is implausibly large");
  return v.get<std::int64_t>();
}

std::uint64_t as_uint64(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(what + " must be a nonnegative integer");
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) fail(what + " must be a string");
  return v.get<std::string>();
}

double parse_double_strict(const std::string& s, const std::string& what) {
  double out = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end) fail(what + ": malformed number '" + s + "'");
  return out;
}

bool is_plain_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == '*' || c == '^' || c == '>' || c == '(' || c == ')' || c == ',' ||
        std::isspace(static_cast<unsigned char>(c)))
      return false;
  }
  return true;
}

// ---- model terms ----------------------------------------------------------

json model_to_json(const ModelSpec& m) {
  json j;
  j["intercept"] = m.intercept;
  j["link"] = m.link == Link::logit ? "logit" : "identity";
  json terms = json::array();
  for (const auto& t : m.terms) terms.push_back({{"term", t.term.label()}, {"coef", t.coef}});
  j["terms"] = std::move(terms);
  if (m.noise_sd) j["noise_sd"] = *m.noise_sd;
  return j;
}

ModelSpec model_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
  check_keys(j, {"intercept", "link", "terms", "noise_sd"}, where);
  ModelSpec m;
  m.intercept = as_double(require_key(j, "intercept", where), where + ".intercept");
  const std::string link = as_string(require_key(j, "link", where), where + ".link");
  if (link == "identity")
    m.link = Link::identity;
  else if (link == "logit")
    m.link = Link::logit;
  else
    fail(where + ".link must be 'identity' or 'logit'");
  const json& terms = require_key(j, "terms", where);
  if (!terms.is_array()) fail(where + ".terms must be an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const json& t = terms[i];
    const std::string twhere = where + ".terms[" + std::to_string(i) + "]";
    if (!t.is_object()) fail(twhere + " must be an object");
    check_keys(t, {"term", "coef"}, twhere);
    ModelTerm mt;
    mt.term = parse_term(as_string(require_key(t, "term", twhere), twhere + ".term"));
    mt.coef = as_double(require_key(t, "coef", twhere), twhere + ".coef");
    m.terms.push_back(std::move(mt));
  }
  if (auto it = j.find("noise_sd"); it != j.end()) {
    if (m.link == Link::logit) fail(where + ".noise_sd only applies to identity-link models");
    const double sd = as_double(*it, where + ".noise_sd");
    if (!(sd > 0.0)) fail(where + ".noise_sd must be > 0");
    m.noise_sd = sd;
  }
  return m;
}

// ---- covariate generators --------------------------------------------------

json generator_to_json(const CovariateGenerator& g) {
  json j;
  switch (g.kind) {
    case CovariateGenerator::Kind::normal:
      j = {{"kind", "normal"}, {"name", g.name}, {"mean", g.mean}, {"sd", g.sd}};
      break;
    case CovariateGenerator::Kind::bernoulli:
      j = {{"kind", "bernoulli"}, {"name", g.name}, {"p", g.p}};
      break;
    case CovariateGenerator::Kind::sum_with_noise:
      j = {{"kind", "sum_with_noise"},
           {"name", g.name},
           {"base", g.base},
           {"noise_sd", g.noise_sd}};
      break;
    case CovariateGenerator::Kind::threshold:
      j = {{"kind", "threshold"}, {"name", g.name}, {"base", g.base}, {"cut", g.cut}};
      break;
  }
  return j;
}

CovariateGenerator generator_from_json(const json& j, const std::string& where,
                                       const std::vector<std::string>& earlier) {
  if (!j.is_object()) fail(where + " must be an object");
  const std::string kind = as_string(require_key(j, "kind", where), where + ".kind");
  const std::string name = as_string(require_key(j, "name", where), where + ".name");
  if (!is_plain_name(name) || name == "a" || name == "y")
    fail(where + ".name '" + name + "' is not a usable covariate name");
  auto check_base = [&](const std::string& base) {
    if (std::find(earlier.begin(), earlier.end(), base) == earlier.end())
      fail(where + ".base '" + base + "' does not name an earlier covariate");
  };
  if (kind == "normal") {
    check_keys(j, {"kind", "name", "mean", "sd"}, where);
    const double mean = as_double(require_key(j, "mean", where), where + ".mean");
    const double sd = as_double(require_key(j, "sd", where), where + ".sd");
    if (!(sd > 0.0)) fail(where + ".sd must be > 0");
    return CovariateGenerator::normal(name, mean, sd);
  }
  if (kind == "bernoulli") {
    check_keys(j, {"kind", "name", "p"}, where);
    const double p = as_double(require_key(j, "p", where), where + ".p");
    if (!(p >= 0.0 && p <= 1.0)) fail(where + ".p must lie in [0,1]");
    return CovariateGenerator::bernoulli(name, p);
  }
  if (kind == "sum_with_noise") {
    check_keys(j, {"kind", "name", "base", "noise_sd"}, where);
    const std::string base = as_string(require_key(j, "base", where), where + ".base");
    check_base(base);
    const double nsd = as_double(require_key(j, "noise_sd", where), where + ".noise_sd");
    if (!(nsd >= 0.0)) fail(where + ".noise_sd must be >= 0");
    return CovariateGenerator::sum_with_noise(name, base, nsd);
  }
  if (kind == "threshold") {
    check_keys(j, {"kind", "name", "base", "cut"}, where);
    const std::string base = as_string(require_key(j, "base", where), where + ".base");
    check_base(base);
    return CovariateGenerator::threshold(name, base,
                                         as_double(require_key(j, "cut", where), where + ".cut"));
  }
  fail(where + ".kind '" + kind + "' is not a covariate kind");
}

// ---- scenarios --------------------------------------------------------------

void check_term_names(const ModelSpec& m, const std::vector<std::string>& names,
                      const std::string& where, bool allow_treatment) {
  auto known = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  for (const auto& t : m.terms) {
    if (t.term.is_treatment()) {
      if (!allow_treatment) fail(where + " must not contain the treatment term 'a'");
      continue;
    }
    if (!known(t.term.name))
      fail(where + " term '" + t.term.label() + "': unknown covariate '" + t.term.name + "'");
    if (t.term.kind == TermSpec::Kind::product && !known(t.term.name2))
      fail(where + " term '" + t.term.label() + "': unknown covariate '" + t.term.name2 + "'");
  }
}

json scenario_to_json(const ScenarioSpec& s, const std::string& csv_path) {
  json j;
  j["id"] = s.id;
  if (!csv_path.empty()) {
    j["covariates_csv"] = csv_path;
  } else {
    json cov = json::array();
    for (const auto& g : s.covariates) cov.push_back(generator_to_json(g));
    j["covariates"] = std::move(cov);
  }
  json ps;
  ps["randomized"] = s.ps.randomized;
  if (s.ps.randomized)
    ps["p"] = s.ps.p;
  else
    ps["model"] = model_to_json(s.ps.model);
  j["ps"] = std::move(ps);
  j["outcome"] = model_to_json(s.outcome);
  if (s.msm_design) {
    json msm = json::array();
    for (const auto& t : *s.msm_design) msm.push_back(t.label());
    j["msm_design"] = std::move(msm);
  }
  return j;
}

ScenarioSpec scenario_from_json(const json& j, const std::string& base_dir,
                                std::string* csv_path_out) {
  const std::string where = "scenario";
  if (!j.is_object()) fail(where + " must be a built-in id or an object");
  check_keys(j, {"id", "covariates", "covariates_csv", "ps", "outcome", "msm_design"}, where);
  ScenarioSpec spec;
  spec.id = j.contains("id") ? as_string(j["id"], where + ".id") : std::string("custom");

  const bool has_gen = j.contains("covariates");
  const bool has_csv = j.contains("covariates_csv");
  if (has_gen == has_csv)
    fail(where + " needs exactly one of 'covariates' and 'covariates_csv'");
  std::vector<std::string> names;
  if (has_gen) {
    const json& cov = j["covariates"];
    if (!cov.is_array() || cov.empty()) fail(where + ".covariates must be a nonempty array");
    for (std::size_t i = 0; i < cov.size(); ++i) {
      auto g = generator_from_json(cov[i], where + ".covariates[" + std::to_string(i) + "]",
                                   names);
      if (std::find(names.begin(), names.end(), g.name) != names.end())
        fail(where + ".covariates: duplicate name '" + g.name + "'");
      names.push_back(g.name);
      spec.covariates.push_back(std::move(g));
    }
  } else {
    const std::string rel = as_string(j["covariates_csv"], where + ".covariates_csv");
    const std::string path = (std::filesystem::path(base_dir) / rel).string();
    try {
      spec.covariate_source = load_covariates_csv_file(path);
    } catch (const std::exception& e) {
      fail(where + ".covariates_csv: " + e.what());
    }
    names = spec.covariate_source->names;
    if (csv_path_out) *csv_path_out = rel;
  }

  const json& ps = require_key(j, "ps", where);
  if (!ps.is_object()) fail(where + ".ps must be an object");
  const bool randomized =
      ps.contains("randomized") && [&] {
        const json& r = ps["randomized"];
        if (!r.is_boolean()) fail(where + ".ps.randomized must be a boolean");
        return r.get<bool>();
      }();
  if (randomized) {
    check_keys(ps, {"randomized", "p"}, where + ".ps");
    spec.ps.randomized = true;
    spec.ps.p = as_double(require_key(ps, "p", where + ".ps"), where + ".ps.p");
    if (!(spec.ps.p > 0.0 && spec.ps.p < 1.0)) fail(where + ".ps.p must lie in (0,1)");
  } else {
    check_keys(ps, {"randomized", "model"}, where + ".ps");
    spec.ps.randomized = false;
    spec.ps.model = model_from_json(require_key(ps, "model", where + ".ps"), where + ".ps.model");
    if (spec.ps.model.link != Link::logit) fail(where + ".ps.model.link must be 'logit'");
    check_term_names(spec.ps.model, names, where + ".ps.model", /*allow_treatment=*/false);
  }

  spec.outcome = model_from_json(require_key(j, "outcome", where), where + ".outcome");
  check_term_names(spec.outcome, names, where + ".outcome", /*allow_treatment=*/true);
  if (spec.outcome.link == Link::identity && !spec.outcome.noise_sd)
    fail(where + ".outcome: identity-link generative models need noise_sd");

  if (j.contains("msm_design")) {
    const json& msm = j["msm_design"];
    if (!msm.is_array() || msm.empty()) fail(where + ".msm_design must be a nonempty array");
    if (spec.outcome.link != Link::logit)
      fail(where + ".msm_design requires a binary (logit) outcome");
    std::vector<TermSpec> design;
    bool has_treatment = false;
    for (std::size_t i = 0; i < msm.size(); ++i) {
      TermSpec t = parse_term(
          as_string(msm[i], where + ".msm_design[" + std::to_string(i) + "]"));
      if (t.is_treatment()) has_treatment = true;
      design.push_back(std::move(t));
    }
    if (!has_treatment) fail(where + ".msm_design must contain the treatment term 'a'");
    ModelSpec probe;
    probe.link = Link::logit;
    for (const auto& t : design) probe.terms.push_back({t, 0.0});
    check_term_names(probe, names, where + ".msm_design", /*allow_treatment=*/true);
    spec.msm_design = std::move(design);
  }
  return spec;
}

const char* generation_source_name(GenerationModelSource s) {
  return s == GenerationModelSource::fitted_on_source ? "fitted_on_source" : "true_model";
}

GenerationModelSource generation_source_from(const std::string& s, const std::string& what) {
  if (s == "fitted_on_source") return GenerationModelSource::fitted_on_source;
  if (s == "true_model") return GenerationModelSource::true_model;
  fail(what + " must be 'fitted_on_source' or 'true_model'");
}

const std::vector<std::string>& valid_estimands() {
  static const std::vector<std::string> v = {"ate", "rr", "logcor", "ey1", "ey0"};
  return v;
}

}  // namespace

TermSpec parse_term(const std::string& text) {
  if (text.empty()) fail("empty model term");
  if (text == "a") return TermSpec::trt();
  if (text.rfind("I(", 0) == 0) {
    if (text.back() != ')') fail("malformed threshold term '" + text + "'");
    const std::string inner = text.substr(2, text.size() - 3);
    const auto gt = inner.find('>');
    if (gt == std::string::npos || gt == 0 || gt + 1 >= inner.size())
      fail("malformed threshold term '" + text + "'");
    const std::string name = inner.substr(0, gt);
    if (!is_plain_name(name)) fail("malformed threshold term '" + text + "'");
    return TermSpec::thresh(name, parse_double_strict(inner.substr(gt + 1),
                                                      "threshold term '" + text + "'"));
  }
  if (const auto star = text.find('*'); star != std::string::npos) {
    const std::string n1 = text.substr(0, star);
    const std::string n2 = text.substr(star + 1);
    if (!is_plain_name(n1) || !is_plain_name(n2)) fail("malformed product term '" + text + "'");
    return TermSpec::prod(n1, n2);
  }
  if (text.size() > 2 && text.compare(text.size() - 2, 2, "^2") == 0) {
    const std::string name = text.substr(0, text.size() - 2);
    if (!is_plain_name(name)) fail("malformed square term '" + text + "'");
    return TermSpec::sq(name);
  }
  if (!is_plain_name(text)) fail("malformed term '" + text + "'");
  return TermSpec::cov(text);
}

ScenarioSpec RunConfig::resolve_scenario() const {
  if (inline_scenario) return *inline_scenario;
  return builtin_scenario(scenario_id);
}

MonteCarloConfig RunConfig::to_monte_carlo(int workers) const {
  MonteCarloConfig mc;
  mc.scenario = resolve_scenario();
  mc.n = n;
  mc.replicates = replicates;
  mc.frameworks = frameworks;
  mc.estimators = estimators;
  mc.master_seed = master_seed;
  mc.workers = workers;
  mc.plasmode.ps_for_generation = generation.ps;
  mc.plasmode.outcome_for_generation = generation.outcome;
  mc.plasmode.replicate_size = generation.replicate_size;
  return mc;
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");
  check_keys(j,
             {"scenario", "n", "replicates", "frameworks", "estimators", "estimands",
              "master_seed", "n_sources", "output_dir", "generation"},
             "config");

  RunConfig cfg;
  const json& sc = require_key(j, "scenario", "config");
  if (sc.is_string()) {
    cfg.scenario_id = sc.get<std::string>();
    try {
      builtin_scenario(cfg.scenario_id);
    } catch (const std::exception&) {
      fail("scenario: unknown built-in id '" + cfg.scenario_id + "'");
    }
  } else {
    cfg.inline_scenario = scenario_from_json(sc, base_dir, &cfg.covariates_csv);
    cfg.scenario_id = cfg.inline_scenario->id;
  }

  if (j.contains("n")) {
    const auto n = as_int(j["n"], "n");
    if (n < 1) fail("n must be >= 1");
    cfg.n = static_cast<Eigen::Index>(n);
  }
  if (j.contains("replicates")) {
    const auto r = as_int(j["replicates"], "replicates");
    if (r < 1) fail("replicates must be >= 1");
    cfg.replicates = static_cast<int>(r);
  }
  if (j.contains("frameworks")) {
    const json& fw = j["frameworks"];
    if (!fw.is_array() || fw.empty()) fail("frameworks must be a nonempty array");
    cfg.frameworks.clear();
    for (const auto& f : fw) {
      const std::string name = as_string(f, "frameworks entry");
      const auto parsed = framework_from_name(name);
      if (!parsed) fail("frameworks: unknown framework '" + name + "'");
      if (std::find(cfg.frameworks.begin(), cfg.frameworks.end(), *parsed) !=
          cfg.frameworks.end())
        fail("frameworks: duplicate entry '" + name + "'");
      cfg.frameworks.push_back(*parsed);
    }
  }
  {
    const json& est = require_key(j, "estimators", "config");
    if (!est.is_array() || est.empty()) fail("estimators must be a nonempty array");
    for (const auto& e : est) {
      const std::string id = as_string(e, "estimators entry");
      if (!is_known_estimator(id)) fail("estimators: unknown estimator '" + id + "'");
      if (std::find(cfg.estimators.begin(), cfg.estimators.end(), id) != cfg.estimators.end())
        fail("estimators: duplicate entry '" + id + "'");
      cfg.estimators.push_back(id);
    }
  }
  if (j.contains("estimands")) {
    const json& est = j["estimands"];
    if (!est.is_array() || est.empty()) fail("estimands must be a nonempty array");
    cfg.estimands.clear();
    for (const auto& e : est) {
      const std::string id = as_string(e, "estimands entry");
      const auto& valid = valid_estimands();
      if (std::find(valid.begin(), valid.end(), id) == valid.end())
        fail("estimands: unknown estimand '" + id + "'");
      if (std::find(cfg.estimands.begin(), cfg.estimands.end(), id) != cfg.estimands.end())
        fail("estimands: duplicate entry '" + id + "'");
      cfg.estimands.push_back(id);
    }
  }
  if (j.contains("master_seed")) cfg.master_seed = as_uint64(j["master_seed"], "master_seed");
  if (j.contains("n_sources")) {
    const auto s = as_int(j["n_sources"], "n_sources");
    if (s < 1) fail("n_sources must be >= 1");
    cfg.n_sources = static_cast<int>(s);
  }
  if (j.contains("output_dir")) {
    cfg.output_dir = as_string(j["output_dir"], "output_dir");
    if (cfg.output_dir.empty()) fail("output_dir must be nonempty");
  }
  if (j.contains("generation")) {
    const json& g = j["generation"];
    if (!g.is_object()) fail("generation must be an object");
    check_keys(g, {"ps", "outcome", "replicate_size"}, "generation");
    if (g.contains("ps"))
      cfg.generation.ps =
          generation_source_from(as_string(g["ps"], "generation.ps"), "generation.ps");
    if (g.contains("outcome"))
      cfg.generation.outcome = generation_source_from(
          as_string(g["outcome"], "generation.outcome"), "generation.outcome");
    if (g.contains("replicate_size")) {
      const auto m = as_int(g["replicate_size"], "generation.replicate_size");
      if (m < 0) fail("generation.replicate_size must be >= 0");
      cfg.generation.replicate_size = static_cast<Eigen::Index>(m);
    }
  }

  // Cross-field validation against the resolved scenario.
  const ScenarioSpec spec = cfg.resolve_scenario();
  const bool binary = spec.outcome_kind() == OutcomeKind::binary;
  for (const auto& e : cfg.estimands) {
    if (e == "rr" && !binary)
      fail("estimands: 'rr' requires a binary-outcome scenario (got '" + spec.id + "')");
    if (e == "logcor") {
      if (!binary || !spec.msm_design)
        fail("estimands: 'logcor' requires a scenario with an msm_design");
      if (std::find(cfg.estimators.begin(), cfg.estimators.end(), "msm") ==
          cfg.estimators.end())
        fail("estimands: 'logcor' requires the 'msm' estimator");
    }
  }
  if (std::find(cfg.estimators.begin(), cfg.estimators.end(), "msm") != cfg.estimators.end() &&
      !spec.msm_design)
    fail("estimators: 'msm' requires a scenario with an msm_design");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_run_config(buf.str(), dir.empty() ? "." : dir);
}

std::string serialize_run_config(const RunConfig& cfg) {
  json j;
  if (cfg.inline_scenario)
    j["scenario"] = scenario_to_json(*cfg.inline_scenario, cfg.covariates_csv);
  else
    j["scenario"] = cfg.scenario_id;
  j["n"] = static_cast<std::int64_t>(cfg.n);
  j["replicates"] = cfg.replicates;
  json fw = json::array();
  for (const auto f : cfg.frameworks) fw.push_back(framework_name(f));
  j["frameworks"] = std::move(fw);
  j["estimators"] = cfg.estimators;
  j["estimands"] = cfg.estimands;
  j["master_seed"] = cfg.master_seed;
  j["n_sources"] = cfg.n_sources;
  j["output_dir"] = cfg.output_dir;
  j["generation"] = {{"ps", generation_source_name(cfg.generation.ps)},
                     {"outcome", generation_source_name(cfg.generation.outcome)},
                     {"replicate_size", static_cast<std::int64_t>(cfg.generation.replicate_size)}};
  return j.dump(2) + "\n";
}

const std::vector<std::string>& builtin_config_names() {
  static const std::vector<std::string> names = {
      "s1_n100",  "s1_n1000",  "s1_n10000",  "s1a_n1000", "s2_n1000",
      "s2a_n1000", "s3_n10000", "s4a_n10000", "s4b_n10000"};
  return names;
}

RunConfig builtin_run_config(const std::string& name) {
  struct Row {
    const char* name;
    const char* scenario;
    Eigen::Index n;
    int replicates;
  };
  // Desk-scale replicate counts: enough for the documented tolerance checks
  // without laptop-hostile runtimes.
  static const Row rows[] = {
      {"s1_n100", "s1", 100, 5000},     {"s1_n1000", "s1", 1000, 5000},
      {"s1_n10000", "s1", 10000, 2000}, {"s1a_n1000", "s1a", 1000, 5000},
      {"s2_n1000", "s2", 1000, 5000},   {"s2a_n1000", "s2a", 1000, 5000},
      {"s3_n10000", "s3", 10000, 2000}, {"s4a_n10000", "s4a", 10000, 1000},
      {"s4b_n10000", "s4b", 10000, 1000},
  };
  for (const Row& r : rows) {
    if (name != r.name) continue;
    RunConfig cfg;
    cfg.scenario_id = r.scenario;
    cfg.n = r.n;
    cfg.replicates = r.replicates;
    const std::string sid = r.scenario;
    if (sid == "s4a" || sid == "s4b") {
      cfg.estimators = {"msm"};
      cfg.estimands = {"logcor"};
    } else {
      cfg.estimators = {"unadj", "match", "iptw", "glm_cm", "glm_ps", "tmle"};
      cfg.estimands = builtin_scenario(sid).outcome_kind() == OutcomeKind::binary
                          ? std::vector<std::string>{"ate", "rr"}
                          : std::vector<std::string>{"ate"};
    }
    cfg.master_seed = 12345;
    cfg.output_dir = std::string("out/") + r.name;
    return cfg;
  }
  fail("unknown built-in config '" + name + "'");
}

}  // namespace plasmode
