#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "experiment_detail.hpp"
#include "pepslab/bmps.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/replica.hpp"
#include "pepslab/rng.hpp"
#include "pepslab/stabilizer_peps.hpp"

#ifndef PEPSLAB_VERSION
#define PEPSLAB_VERSION "unknown"
#endif

namespace pepslab {

bool RunArtifact::all_failed() const {
  if (status.empty()) return false;
  return std::none_of(status.begin(), status.end(), [](const SeedStatus& s) { return s.ok; });
}

namespace {

using detail::Cell;
using detail::Table;
using I = std::int64_t;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Work split into independent units, each filling its own copy of the tables.
struct Plan {
  std::vector<Table> tables;
  std::vector<SeedStatus> units;
  std::function<void(std::size_t, std::vector<Table>&)> work;
  // Derived tables (summaries) from the merged ones, appended after them.
  std::function<void(std::vector<Table>&)> finish;
};

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) f(i);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads <= 1 || n <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

FixedPointOptions fixed_point_options(const Json& p) {
  FixedPointOptions o;
  o.fidelity_tol = p.at("fidelity_tol").get<double>();
  o.spectrum_tol = p.at("spectrum_tol").get<double>();
  o.max_iter = p.at("max_iter").get<int>();
  o.engine.eig_tol = p.at("eig_tol").get<double>();
  return o;
}

// Continuation sweep in increasing chi; each run starts from the previous boundary.
std::map<std::size_t, FixedPointResult> chi_sweep(const DoubleTensor& dt, const std::vector<std::size_t>& chis,
                                                  FixedPointOptions o) {
  std::map<std::size_t, FixedPointResult> out;
  const BoundaryMps* prev = nullptr;
  for (std::size_t chi : chis) {
    o.initial = prev;
    prev = &out.emplace(chi, fixed_point(dt, chi, o)).first->second.bmps;
  }
  return out;
}

std::string lattice_label(const Json& p) {
  return std::to_string(p.at("Lx").get<I>()) + "x" + std::to_string(p.at("Ly").get<I>());
}

std::vector<SeedStatus> seed_units(const std::vector<std::uint64_t>& seeds) {
  std::vector<SeedStatus> u;
  for (auto s : seeds) u.push_back({"seed " + std::to_string(s), s, true, {}});
  return u;
}

// Mean and sample standard deviation of `value` over the rows sharing the key columns.
Table summarize(const Table& src, const std::vector<std::string>& keys, const std::string& value) {
  std::vector<std::string> header = keys;
  header.insert(header.end(), {"mean_" + value, "std_" + value, "seeds"});
  std::vector<std::size_t> kc;
  for (const auto& k : keys) kc.push_back(src.column(k));
  const std::size_t vc = src.column(value);
  std::map<std::vector<Cell>, std::vector<double>> groups;
  for (const auto& row : src.data()) {
    std::vector<Cell> key;
    for (auto c : kc) key.push_back(row[c]);
    groups[key].push_back(std::get<double>(row[vc]));
  }
  Table out("summary.csv", header);
  for (auto& [key, values] : groups) {
    const MeanStd ms = mean_std(values);
    auto row = key;
    row.insert(row.end(), {ms.mean, ms.sd, static_cast<I>(values.size())});
    out.add(std::move(row));
  }
  return out;
}

Plan plan_ipeps(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("spectrum.csv", {"seed", "D", "d", "chi", "i", "sigma"}),
                 Table("convergence.csv", {"seed", "D", "d", "chi", "bond", "iterations", "fidelity_change",
                                           "abs_fidelity_ref", "one_minus_fidelity_ref", "entropy"})};
  plan.units = seed_units(seeds);
  plan.work = [p, seeds](std::size_t u, std::vector<Table>& t) {
    const auto D = p.at("D").get<std::size_t>(), d = p.at("d").get<std::size_t>();
    const auto chis = sorted_unique(p.at("chi").get<std::vector<std::size_t>>());
    const std::size_t chi_ref = p.contains("chi_ref") ? p.at("chi_ref").get<std::size_t>() : chis.back();
    auto all = chis;
    all.push_back(chi_ref);
    const auto seed = seeds[u];
    const DoubleTensor dt = double_tensor(sample_clean(D, d, seed));
    const FixedPointOptions o = fixed_point_options(p);
    const auto res = chi_sweep(dt, sorted_unique(all), o);
    const BoundaryMps& ref = res.at(chi_ref).bmps;
    for (std::size_t chi : chis) {
      const FixedPointResult& r = res.at(chi);
      for (std::size_t i = 0; i < r.schmidt.size(); ++i)
        t[0].add({seed, static_cast<I>(D), static_cast<I>(d), static_cast<I>(chi), static_cast<I>(i + 1), r.schmidt[i]});
      const double f = std::abs(fidelity_per_site(r.bmps, ref, o.engine));
      t[1].add({seed, static_cast<I>(D), static_cast<I>(d), static_cast<I>(chi), static_cast<I>(r.bmps.chi()),
                static_cast<I>(r.iterations), r.fidelity_history.empty() ? kNaN : r.fidelity_history.back(), f, 1.0 - f,
                renyi_entropy(r.schmidt, 1.0)});
    }
  };
  return plan;
}

Plan plan_rho(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("rho.csv", {"seed", "D", "d", "chi", "region", "delta_rho", "sigma2_next", "ratio"})};
  plan.units = seed_units(seeds);
  plan.work = [p, seeds](std::size_t u, std::vector<Table>& t) {
    const auto D = p.at("D").get<std::size_t>(), d = p.at("d").get<std::size_t>();
    const auto chis = sorted_unique(p.at("chi").get<std::vector<std::size_t>>());
    const std::size_t chi_ref = p.contains("chi_ref") ? p.at("chi_ref").get<std::size_t>() : chis.back();
    auto all = chis;
    all.push_back(chi_ref);
    all = sorted_unique(all);
    const auto regions = sorted_unique(p.at("regions").get<std::vector<std::size_t>>());
    const auto seed = seeds[u];
    const DoubleTensor dt = double_tensor(sample_clean(D, d, seed));
    const FixedPointOptions o = fixed_point_options(p);
    const auto top = chi_sweep(dt, all, o);
    const auto bottom = chi_sweep(reflect_vertical(dt), all, o);
    const auto& ref_spec = top.at(chi_ref).schmidt;
    for (std::size_t region : regions) {
      const int reg = static_cast<int>(region);
      const MatrixXc ref = reduced_density_matrix(top.at(chi_ref), bottom.at(chi_ref), dt, reg, o.engine);
      for (std::size_t chi : chis) {
        const MatrixXc rho = reduced_density_matrix(top.at(chi), bottom.at(chi), dt, reg, o.engine);
        const double dr = delta_rho(rho, ref);
        const double s2 = chi < ref_spec.size() ? ref_spec[chi] * ref_spec[chi] : kNaN;
        t[0].add({seed, static_cast<I>(D), static_cast<I>(d), static_cast<I>(chi), static_cast<I>(region), dr, s2,
                  dr / s2});
      }
    }
  };
  return plan;
}

Plan plan_xi(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("xi.csv", {"seed", "D", "d", "chi", "bond", "iterations", "xi"})};
  plan.units = seed_units(seeds);
  plan.work = [p, seeds](std::size_t u, std::vector<Table>& t) {
    const auto d = p.at("d").get<std::size_t>();
    const auto chis = sorted_unique(p.at("chi").get<std::vector<std::size_t>>());
    const auto seed = seeds[u];
    const FixedPointOptions o = fixed_point_options(p);
    for (std::size_t D : p.at("D").get<std::vector<std::size_t>>()) {
      const DoubleTensor dt = double_tensor(sample_clean(D, d, seed));
      for (const auto& [chi, r] : chi_sweep(dt, chis, o)) {
        double xi;
        try {
          xi = correlation_length(r.bmps, o.engine);
        } catch (const DegenerateError&) {
          xi = std::numeric_limits<double>::infinity();
        }
        t[0].add({seed, static_cast<I>(D), static_cast<I>(d), static_cast<I>(chi), static_cast<I>(r.bmps.chi()),
                  static_cast<I>(r.iterations), xi});
      }
    }
  };
  return plan;
}

Plan plan_barrier_stabilizer(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("profile.csv", {"p", "k_D", "k_d", "Lx", "Ly", "ensemble", "seed", "y", "S_logp", "resamples"})};
  plan.units = seed_units(seeds);
  StabilizerPepsSpec spec;
  spec.p = p.at("p").get<int>();
  spec.k_D = p.at("k_D").get<int>();
  spec.k_d = p.at("k_d").get<int>();
  spec.Lx = p.at("Lx").get<std::size_t>();
  spec.Ly = p.at("Ly").get<std::size_t>();
  spec.ensemble = ensemble_from_string(p.at("ensemble").get<std::string>());
  std::optional<std::size_t> cut;
  if (p.contains("cut")) cut = p.at("cut").get<std::size_t>();
  const int max_resamples = p.at("max_resamples").get<int>();
  plan.work = [spec, cut, max_resamples, seeds](std::size_t u, std::vector<Table>& t) {
    StabilizerPepsSpec s = spec;
    s.seed = seeds[u];
    const SampledProfile prof = sample_layer_profile(s, cut, max_resamples);
    for (std::size_t y = 0; y < prof.S.size(); ++y)
      t[0].add({static_cast<I>(s.p), static_cast<I>(s.k_D), static_cast<I>(s.k_d), static_cast<I>(s.Lx),
                static_cast<I>(s.Ly), to_string(s.ensemble), s.seed, static_cast<I>(y + 1), prof.S[y],
                static_cast<I>(prof.resamples)});
  };
  plan.finish = [](std::vector<Table>& t) { t.push_back(summarize(t[0], {"y"}, "S_logp")); };
  return plan;
}

PepsLattice dense_lattice(const Json& p, std::uint64_t seed) {
  const auto D = p.at("D").get<std::size_t>(), d = p.at("d").get<std::size_t>();
  const auto Lx = p.at("Lx").get<std::size_t>(), Ly = p.at("Ly").get<std::size_t>();
  const std::string ens = p.value("ensemble", std::string("disordered"));
  if (ensemble_from_string(ens) == Ensemble::Clean) return uniform_lattice(Lx, Ly, sample_clean(D, d, seed));
  return sample_disordered(Lx, Ly, D, d, seed);
}

FiniteOptions finite_options(const Json& p) {
  FiniteOptions o;
  o.chi = p.at("chi").get<std::size_t>();
  if (p.contains("cut")) o.cut = p.at("cut").get<std::size_t>();
  return o;
}

Plan plan_barrier_dense(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("profile.csv", {"D", "d", "Lx", "Ly", "chi", "ensemble", "seed", "y", "S"})};
  plan.units = seed_units(seeds);
  plan.work = [p, seeds](std::size_t u, std::vector<Table>& t) {
    const auto seed = seeds[u];
    const PepsLattice lat = dense_lattice(p, seed);
    const auto prof = finite_entropy_profile(FiniteNetwork{&lat, nullptr}, finite_options(p));
    for (std::size_t y = 0; y < prof.size(); ++y)
      t[0].add({p.at("D").get<I>(), p.at("d").get<I>(), p.at("Lx").get<I>(), p.at("Ly").get<I>(), p.at("chi").get<I>(),
                p.at("ensemble").get<std::string>(), seed, static_cast<I>(y + 1), prof[y]});
  };
  plan.finish = [](std::vector<Table>& t) { t.push_back(summarize(t[0], {"y"}, "S")); };
  return plan;
}

// <Psi|Psi'> with Psi' = perturb(Psi, eta): the perturbed lattice is the ket.
Plan plan_overlap(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("profile.csv", {"D", "d", "Lx", "Ly", "chi", "network", "eta", "seed", "y", "S"})};
  plan.units = seed_units(seeds);
  plan.work = [p, seeds](std::size_t u, std::vector<Table>& t) {
    const auto seed = seeds[u];
    const PepsLattice lat = dense_lattice(p, seed);
    const FiniteOptions o = finite_options(p);
    auto emit = [&](const std::string& network, double eta, const std::vector<double>& prof) {
      for (std::size_t y = 0; y < prof.size(); ++y)
        t[0].add({p.at("D").get<I>(), p.at("d").get<I>(), p.at("Lx").get<I>(), p.at("Ly").get<I>(),
                  p.at("chi").get<I>(), network, eta, seed, static_cast<I>(y + 1), prof[y]});
    };
    if (p.at("include_norm").get<bool>()) emit("norm", 0.0, finite_entropy_profile(FiniteNetwork{&lat, nullptr}, o));
    for (double eta : p.at("eta").get<std::vector<double>>()) {
      const PepsLattice pert = perturb(lat, eta, derive_seed(seed, 1));
      emit("overlap", eta, finite_entropy_profile(FiniteNetwork{&pert, &lat}, o));
    }
  };
  plan.finish = [](std::vector<Table>& t) { t.push_back(summarize(t[0], {"network", "eta", "y"}, "S")); };
  return plan;
}

ReplicaParams replica_params(const Json& p, double D, double d) {
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
  std::sort(r.region.begin(), r.region.end());
  return r;
}

std::string region_label(const ReplicaParams& r) {
  std::string s;
  for (auto x : r.region) s += (s.empty() ? "" : ";") + std::to_string(x);
  return s;
}

std::string number_label(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Plan plan_statmech(const Json& p) {
  Plan plan;
  plan.tables = {Table("exact.csv", {"n", "m", "D", "d", "lattice", "periodic_x", "region", "method", "configurations",
                                     "logZ_A", "logZ_0", "entropy"})};
  std::vector<std::pair<double, double>> points;
  for (double D : p.at("D").get<std::vector<double>>())
    for (double d : p.at("d").get<std::vector<double>>()) {
      points.emplace_back(D, d);
      plan.units.push_back({"D=" + number_label(D) + " d=" + number_label(d), 0, true, {}});
    }
  std::optional<ExactMethod> method;
  const std::string m = p.at("method").get<std::string>();
  if (m == "enumeration") method = ExactMethod::Enumeration;
  if (m == "characters") method = ExactMethod::Characters;
  plan.work = [p, points, method](std::size_t u, std::vector<Table>& t) {
    const ReplicaParams r = replica_params(p, points[u].first, points[u].second);
    const PartitionResult a = exact_partition(r, Variant::A, method);
    const PartitionResult z = exact_partition(r, Variant::Zero, method);
    const double entropy = r.n >= 2 ? -(a.logZ - z.logZ) / (r.m * (r.n - 1)) : kNaN;
    t[0].add({static_cast<I>(r.n), static_cast<I>(r.m), r.D, r.d, lattice_label(p), std::string(r.periodic_x ? "true" : "false"),
              region_label(r), std::string(a.method == ExactMethod::Enumeration ? "enumeration" : "characters"),
              a.configurations, a.logZ, z.logZ, entropy});
  };
  return plan;
}

Plan plan_wick(const Json& p, const std::vector<std::uint64_t>& seeds) {
  Plan plan;
  plan.tables = {Table("oracle.csv", {"n", "m", "D", "d", "lattice", "region", "seed", "variant", "estimate", "stderr",
                                      "samples", "exact"})};
  plan.units = seed_units(seeds);
  const ReplicaParams r = replica_params(p, p.at("D").get<double>(), p.at("d").get<double>());
  double exact_A = kNaN, exact_0 = kNaN;
  if (p.at("compare_exact").get<bool>()) {
    exact_A = exact_partition(r, Variant::A).logZ;
    exact_0 = exact_partition(r, Variant::Zero).logZ;
  }
  const auto samples = p.at("samples").get<std::size_t>();
  const std::string lattice = lattice_label(p);
  plan.work = [r, seeds, samples, lattice, exact_A, exact_0](std::size_t u, std::vector<Table>& t) {
    const auto seed = seeds[u];
    const WickEstimate e = wick_oracle_mc(r, samples, seed, 1);
    auto row = [&](const std::string& variant, double est, double se, double exact) {
      t[0].add({static_cast<I>(r.n), static_cast<I>(r.m), r.D, r.d, lattice, region_label(r), seed, variant, est, se,
                static_cast<I>(e.samples), exact});
    };
    row("A", e.mean_A, e.se_A, std::exp(exact_A));
    row("0", e.mean_0, e.se_0, std::exp(exact_0));
    row("log_ratio", e.log_ratio, e.log_ratio_se, exact_A - exact_0);
  };
  return plan;
}

Plan make_plan(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const Json& p = c.parameters;
  if (c.kind == "ipeps-fixed-point") return plan_ipeps(p, seeds);
  if (c.kind == "rho-convergence") return plan_rho(p, seeds);
  if (c.kind == "correlation-length") return plan_xi(p, seeds);
  if (c.kind == "barrier-stabilizer") return plan_barrier_stabilizer(p, seeds);
  if (c.kind == "barrier-dense") return plan_barrier_dense(p, seeds);
  if (c.kind == "overlap-eta") return plan_overlap(p, seeds);
  if (c.kind == "statmech-exact") return plan_statmech(p);
  if (c.kind == "wick-oracle") return plan_wick(p, seeds);
  throw SchemaError("unknown kind " + c.kind, {"kind: unknown kind '" + c.kind + "'"});
}

}  // namespace

RunArtifact run(const ExperimentConfig& config, const RunOptions& opt) {
  // Re-check the config: it may have been built by hand rather than parsed.
  const Json echo = to_json(config);
  if (auto diag = validate(echo); !diag.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& d : diag) msg += "\n  " + d;
    throw SchemaError(msg, std::move(diag));
  }
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::uint64_t> seeds;
  for (auto s : config.seeds) seeds.push_back(s + opt.seed_offset);

  RunArtifact art;
  art.dir = opt.output_dir.empty() ? config.output_dir : opt.output_dir;
  std::filesystem::create_directories(art.dir);

  Plan plan = make_plan(config, seeds);
  std::vector<std::vector<Table>> parts(plan.units.size(), plan.tables);
  parallel_for(plan.units.size(), opt.jobs, [&](std::size_t u) {
    try {
      plan.work(u, parts[u]);
    } catch (const std::exception& e) {
      // rows of a failed unit are dropped so partial sweeps never mix in
      parts[u] = plan.tables;
      plan.units[u].ok = false;
      plan.units[u].message = e.what();
    }
  });

  std::vector<Table> tables = plan.tables;
  for (const auto& part : parts)
    for (std::size_t i = 0; i < tables.size(); ++i) tables[i].append(part[i]);
  if (plan.finish) plan.finish(tables);

  for (const auto& t : tables) {
    detail::write_atomic(art.dir / t.file(), t.render());
    art.tables.push_back({t.file(), t.header(), t.rows()});
  }
  art.plotscript = "plot.gp";
  detail::write_atomic(art.dir / art.plotscript, detail::plot_script(config.kind, tables));
  art.status = plan.units;

  Json m;
  m["schema_version"] = kSchemaVersion;
  m["code_version"] = std::string("pepslab ") + PEPSLAB_VERSION;
  m["config"] = echo;
  m["seed_offset"] = opt.seed_offset;
  m["effective_seeds"] = seeds;
  m["jobs"] = opt.jobs;
  Json units = Json::array();
  std::size_t failed = 0;
  for (const auto& s : art.status) {
    Json j;
    j["unit"] = s.unit;
    if (config.kind != "statmech-exact") j["seed"] = s.seed;
    j["status"] = s.ok ? "ok" : "failed";
    if (!s.ok) j["message"] = s.message;
    failed += !s.ok;
    units.push_back(j);
  }
  m["units"] = units;
  m["failed_units"] = failed;
  Json tj = Json::array();
  for (const auto& t : art.tables) tj.push_back({{"file", t.file}, {"header", t.header}, {"rows", t.rows}});
  m["tables"] = tj;
  m["plotscript"] = art.plotscript;
  m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  art.manifest = m;
  detail::write_atomic(art.dir / "manifest.json", m.dump(2) + "\n");
  return art;
}

}  // namespace pepslab
