#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "experiment_detail.hpp"
#include "replica_detail.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/replica.hpp"
#include "pepslab/stabilizer_peps.hpp"

namespace pepslab {

namespace detail {

namespace {

using T = ParamType;

ParamSpec req(std::string key, ParamType t) { return {std::move(key), t, true, Json()}; }
ParamSpec opt(std::string key, ParamType t, Json fallback = Json()) { return {std::move(key), t, false, std::move(fallback)}; }

std::vector<ParamSpec> fixed_point_params() {
  return {opt("fidelity_tol", T::Number, 1e-10), opt("spectrum_tol", T::Number, 1e-8), opt("max_iter", T::Int, 2000),
          opt("eig_tol", T::Number, 1e-10)};
}

std::vector<ParamSpec> replica_params() {
  return {req("n", T::Int),      req("m", T::Int),  req("Lx", T::Int),
          req("Ly", T::Int),     opt("periodic_x", T::Bool, false),
          opt("region", T::IntList)};
}

template <class... V>
std::vector<ParamSpec> join(std::vector<ParamSpec> a, V... rest) {
  (a.insert(a.end(), rest.begin(), rest.end()), ...);
  return a;
}

std::string type_name(ParamType t) {
  switch (t) {
    case T::Int: return "integer";
    case T::Number: return "number";
    case T::Bool: return "boolean";
    case T::String: return "string";
    case T::IntList: return "list of integers";
    case T::NumberList: return "list of numbers";
  }
  return "?";
}

bool scalar_ok(ParamType t, const Json& v) {
  switch (t) {
    case T::Int:
    case T::IntList: return v.is_number_integer();
    case T::Number:
    case T::NumberList: return v.is_number() && std::isfinite(v.get<double>());
    case T::Bool: return v.is_boolean();
    case T::String: return v.is_string();
  }
  return false;
}

bool type_ok(ParamType t, const Json& v) {
  if (t == T::IntList || t == T::NumberList) {
    if (!v.is_array()) return scalar_ok(t, v);
    if (v.empty()) return false;
    for (const auto& e : v)
      if (!scalar_ok(t, e)) return false;
    return true;
  }
  return scalar_ok(t, v);
}

}  // namespace

const std::vector<KindSpec>& kind_specs() {
  static const std::vector<KindSpec> specs = {
      {"ipeps-fixed-point", true,
       join(std::vector<ParamSpec>{req("D", T::Int), opt("d", T::Int, 2), req("chi", T::IntList), opt("chi_ref", T::Int)},
            fixed_point_params())},
      {"rho-convergence", true,
       join(std::vector<ParamSpec>{req("D", T::Int), opt("d", T::Int, 2), req("chi", T::IntList), opt("chi_ref", T::Int),
                                   opt("regions", T::IntList, Json::array({1, 2}))},
            fixed_point_params())},
      {"correlation-length", true,
       join(std::vector<ParamSpec>{req("D", T::IntList), opt("d", T::Int, 2), req("chi", T::IntList)},
            fixed_point_params())},
      {"barrier-stabilizer", true,
       {req("p", T::Int), req("k_D", T::Int), req("k_d", T::Int), req("Lx", T::Int), req("Ly", T::Int),
        opt("ensemble", T::String, "disordered"), opt("cut", T::Int), opt("max_resamples", T::Int, 1000)}},
      {"barrier-dense", true,
       {req("D", T::Int), req("d", T::Int), req("Lx", T::Int), req("Ly", T::Int), req("chi", T::Int),
        opt("ensemble", T::String, "disordered"), opt("cut", T::Int)}},
      {"statmech-exact", false,
       join(replica_params(), std::vector<ParamSpec>{req("D", T::NumberList), req("d", T::NumberList),
                                                     opt("method", T::String, "auto")})},
      {"wick-oracle", true,
       join(replica_params(), std::vector<ParamSpec>{req("D", T::Int), req("d", T::Int), req("samples", T::Int),
                                                     opt("compare_exact", T::Bool, false)})},
      {"overlap-eta", true,
       {req("D", T::Int), req("d", T::Int), req("Lx", T::Int), req("Ly", T::Int), req("chi", T::Int),
        req("eta", T::NumberList), opt("cut", T::Int), opt("include_norm", T::Bool, true)}},
  };
  return specs;
}

const KindSpec* find_kind(const std::string& name) {
  for (const auto& k : kind_specs())
    if (k.name == name) return &k;
  return nullptr;
}

Json resolve_parameters(const KindSpec& spec, const Json& given) {
  Json out = Json::object();
  for (const auto& p : spec.params) {
    Json v = given.contains(p.key) ? given.at(p.key) : p.fallback;
    if (v.is_null()) continue;
    if ((p.type == T::IntList || p.type == T::NumberList) && !v.is_array()) v = Json::array({v});
    out[p.key] = v;
  }
  return out;
}

namespace {

void check_positive(std::vector<std::string>& diag, const Json& p, const std::string& key) {
  if (!p.contains(key)) return;
  const Json& v = p.at(key);
  auto bad = [](const Json& e) { return e.get<double>() < 1.0; };
  bool fail = false;
  if (v.is_array())
    for (const auto& e : v) fail = fail || bad(e);
  else
    fail = bad(v);
  if (fail) diag.push_back("parameters." + key + ": must be at least 1");
}

void check_tolerances(std::vector<std::string>& diag, const Json& p) {
  for (const char* k : {"fidelity_tol", "spectrum_tol", "eig_tol"})
    if (p.contains(k) && !(p.at(k).get<double>() > 0.0)) diag.push_back(std::string("parameters.") + k + ": must be positive");
  check_positive(diag, p, "max_iter");
}

void check_cut(std::vector<std::string>& diag, const Json& p) {
  if (!p.contains("cut")) return;
  const auto cut = p.at("cut").get<long long>();
  const auto Lx = p.at("Lx").get<long long>();
  if (cut < 1 || cut >= Lx) diag.push_back("parameters.cut: must lie in 1.." + std::to_string(Lx - 1));
}

std::string count_string(double c) {
  std::ostringstream os;
  os.precision(6);
  os << c;
  return os.str();
}

ReplicaParams replica_from(const Json& p, double D, double d) {
  ReplicaParams r;
  r.n = p.at("n").get<int>();
  r.m = p.at("m").get<int>();
  r.D = D;
  r.d = d;
  r.Lx = p.at("Lx").get<std::size_t>();
  r.Ly = p.at("Ly").get<std::size_t>();
  r.periodic_x = p.at("periodic_x").get<bool>();
  if (p.contains("region"))
    r.region = p.at("region").get<std::vector<std::size_t>>();
  else
    for (std::size_t x = 0; x < std::max<std::size_t>(1, r.Lx / 2); ++x) r.region.push_back(x);
  return r;
}

void check_replica(std::vector<std::string>& diag, const ReplicaParams& r, const std::string& where) {
  try {
    r.validate();
  } catch (const Error& e) {
    diag.push_back(where + e.what());
  }
}

void semantic_checks(const std::string& kind, const Json& p, std::vector<std::string>& diag) {
  if (kind == "ipeps-fixed-point" || kind == "rho-convergence" || kind == "correlation-length") {
    for (const char* k : {"D", "d", "chi", "chi_ref"}) check_positive(diag, p, k);
    check_tolerances(diag, p);
    if (p.contains("regions"))
      for (const auto& r : p.at("regions"))
        if (r != 1 && r != 2) diag.push_back("parameters.regions: only regions of 1 and 2 sites are supported");
  } else if (kind == "barrier-stabilizer") {
    StabilizerPepsSpec s;
    s.p = p.at("p").get<int>();
    s.k_D = p.at("k_D").get<int>();
    s.k_d = p.at("k_d").get<int>();
    const auto Lx = p.at("Lx").get<long long>(), Ly = p.at("Ly").get<long long>();
    if (Lx < 1 || Ly < 1) {
      diag.push_back("parameters.Lx, parameters.Ly: lattice must be at least 1x1");
    } else {
      s.Lx = static_cast<std::size_t>(Lx);
      s.Ly = static_cast<std::size_t>(Ly);
      try {
        s.validate();
      } catch (const Error& e) {
        diag.push_back(std::string("parameters: ") + e.what());
      }
    }
    try {
      ensemble_from_string(p.at("ensemble").get<std::string>());
    } catch (const Error& e) {
      diag.push_back(std::string("parameters.ensemble: ") + e.what());
    }
    if (p.contains("cut") && (p.at("cut").get<long long>() < 0 || p.at("cut").get<long long>() > Lx))
      diag.push_back("parameters.cut: must lie in 0.." + std::to_string(Lx));
    if (p.at("max_resamples").get<long long>() < 0) diag.push_back("parameters.max_resamples: must be non-negative");
  } else if (kind == "barrier-dense" || kind == "overlap-eta") {
    for (const char* k : {"D", "d", "Lx", "Ly", "chi"}) check_positive(diag, p, k);
    if (diag.empty()) check_cut(diag, p);
    if (p.contains("ensemble")) {
      try {
        ensemble_from_string(p.at("ensemble").get<std::string>());
      } catch (const Error& e) {
        diag.push_back(std::string("parameters.ensemble: ") + e.what());
      }
    }
    if (p.contains("eta"))
      for (const auto& e : p.at("eta"))
        if (e.get<double>() < 0.0 || e.get<double>() > 1.0) diag.push_back("parameters.eta: values must lie in [0, 1]");
  } else if (kind == "statmech-exact" || kind == "wick-oracle") {
    for (const char* k : {"n", "m", "Lx", "Ly"}) check_positive(diag, p, k);
    if (p.contains("region"))
      for (const auto& r : p.at("region"))
        if (r.get<long long>() < 0) diag.push_back("parameters.region: columns must be non-negative");
    if (!diag.empty()) return;
  }
  if (kind == "statmech-exact") {
    const std::string method = p.at("method").get<std::string>();
    if (method != "auto" && method != "enumeration" && method != "characters")
      diag.push_back("parameters.method: expected auto, enumeration or characters");
    for (double D : p.at("D").get<std::vector<double>>())
      for (double d : p.at("d").get<std::vector<double>>()) {
        const std::string where = "parameters (D=" + count_string(D) + ", d=" + count_string(d) + "): ";
        const ReplicaParams r = replica_from(p, D, d);
        const std::size_t before = diag.size();
        check_replica(diag, r, where);
        if (diag.size() != before) continue;
        try {
          plan_exact(r);
          if (method == "enumeration" && configuration_count(r) > kEnumerationBudget)
            diag.push_back(where + "budget exceeded: " + count_string(configuration_count(r)) +
                           " configurations exceed the enumeration budget of " + count_string(kEnumerationBudget));
          if (method == "characters" && !character_cost(r))
            diag.push_back(where + "the character route does not fit (needs integer D <= 8, 2Q <= 10 and a bounded cost)");
        } catch (const BudgetExceededError& e) {
          diag.push_back(where + "budget exceeded: " + count_string(e.count) + " configurations ((2Q)!^sites with Q=" +
                         std::to_string(r.Q()) + ", sites=" + std::to_string(r.sites()) +
                         ") exceed the enumeration budget of " + count_string(kEnumerationBudget) +
                         " and the character route does not fit");
        }
      }
  } else if (kind == "wick-oracle") {
    const ReplicaParams r = replica_from(p, p.at("D").get<double>(), p.at("d").get<double>());
    const std::size_t before = diag.size();
    check_replica(diag, r, "parameters: ");
    if (p.at("samples").get<long long>() < 2) diag.push_back("parameters.samples: need at least 2 samples");
    if (diag.size() == before) {
      const double dim = wick_dense_dimension(r);
      if (dim > kWickDenseBudget)
        diag.push_back("parameters: dense dimension " + count_string(dim) + " exceeds the oracle budget of " +
                       count_string(kWickDenseBudget));
      if (p.at("compare_exact").get<bool>()) {
        try {
          plan_exact(r);
        } catch (const BudgetExceededError& e) {
          diag.push_back("parameters.compare_exact: budget exceeded: " + count_string(e.count) + " configurations");
        }
      }
    }
  }
}

}  // namespace

}  // namespace detail

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : detail::kind_specs()) n.push_back(k.name);
    return n;
  }();
  return names;
}

std::vector<std::string> validate(const Json& config) {
  std::vector<std::string> diag;
  if (!config.is_object()) return {"config: expected a JSON object"};

  static const std::set<std::string> top = {"schema_version", "kind", "parameters", "seeds", "output_dir"};
  for (const auto& [key, value] : config.items())
    if (!top.count(key)) diag.push_back(key + ": unknown key");

  if (config.contains("schema_version")) {
    const Json& v = config.at("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != kSchemaVersion)
      diag.push_back("schema_version: expected " + std::to_string(kSchemaVersion));
  }
  if (config.contains("output_dir") && !config.at("output_dir").is_string())
    diag.push_back("output_dir: expected string");

  const detail::KindSpec* spec = nullptr;
  if (!config.contains("kind")) {
    diag.push_back("kind: missing");
  } else if (!config.at("kind").is_string()) {
    diag.push_back("kind: expected string");
  } else if (!(spec = detail::find_kind(config.at("kind").get<std::string>()))) {
    std::string all;
    for (const auto& k : experiment_kinds()) all += (all.empty() ? "" : ", ") + k;
    diag.push_back("kind: unknown kind '" + config.at("kind").get<std::string>() + "' (expected one of " + all + ")");
  }

  if (config.contains("seeds")) {
    const Json& s = config.at("seeds");
    bool ok = s.is_array();
    if (ok)
      for (const auto& e : s) ok = ok && e.is_number_integer() && (e.is_number_unsigned() || e.get<std::int64_t>() >= 0);
    if (!ok) diag.push_back("seeds: expected a list of non-negative integers");
    else if (spec && spec->seeded && s.empty()) diag.push_back("seeds: empty");
  } else if (spec && spec->seeded) {
    diag.push_back("seeds: missing");
  }

  if (!spec) return diag;
  const Json given = config.contains("parameters") ? config.at("parameters") : Json::object();
  if (!given.is_object()) {
    diag.push_back("parameters: expected an object");
    return diag;
  }
  const std::size_t schema_start = diag.size();
  for (const auto& [key, value] : given.items()) {
    bool known = false;
    for (const auto& p : spec->params) known = known || p.key == key;
    if (!known) diag.push_back("parameters." + key + ": unknown parameter for kind " + spec->name);
  }
  for (const auto& p : spec->params) {
    if (!given.contains(p.key)) {
      if (p.required) diag.push_back("parameters." + p.key + ": missing (" + detail::type_name(p.type) + ")");
      continue;
    }
    if (!detail::type_ok(p.type, given.at(p.key)))
      diag.push_back("parameters." + p.key + ": expected " + detail::type_name(p.type));
  }
  if (diag.size() == schema_start) detail::semantic_checks(spec->name, detail::resolve_parameters(*spec, given), diag);
  return diag;
}

ExperimentConfig parse_config(const Json& config) {
  auto diag = validate(config);
  if (!diag.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& d : diag) msg += "\n  " + d;
    throw SchemaError(msg, std::move(diag));
  }
  ExperimentConfig c;
  c.kind = config.at("kind").get<std::string>();
  c.parameters = detail::resolve_parameters(*detail::find_kind(c.kind), config.value("parameters", Json::object()));
  if (config.contains("seeds")) c.seeds = config.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = config.contains("output_dir") ? config.at("output_dir").get<std::string>() : "runs/" + c.kind;
  return c;
}

Json read_config_file(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw Error("cannot open config " + file.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config " + file.string() + " is not valid JSON: " + e.what(), {std::string("config: ") + e.what()});
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) { return parse_config(read_config_file(file)); }

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = c.kind;
  j["parameters"] = c.parameters;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir.string();
  return j;
}

std::uint64_t seed_offset_from_env() {
  const char* v = std::getenv("PEPSLAB_SEED_OFFSET");
  if (!v || !*v) return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v, &end, 10);
  if (errno != 0 || *end != '\0' || v[0] == '-') throw DomainError("PEPSLAB_SEED_OFFSET must be a non-negative integer");
  return x;
}

}  // namespace pepslab
