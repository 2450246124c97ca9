#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pepslab/errors.hpp"
#include "replica_detail.hpp"

namespace pepslab {

std::string to_string(Variant v) { return v == Variant::A ? "A" : "0"; }

double ReplicaParams::J() const { return std::log(D); }
double ReplicaParams::h() const { return std::log(d); }

void ReplicaParams::validate() const {
  if (n < 1 || m < 1) throw DomainError("replica counts n and m must be positive");
  if (!(D >= 1.0) || !(d >= 1.0)) throw DomainError("D and d must be at least 1");
  if (Lx < 1 || Ly < 1) throw DimensionError("lattice must be at least 1x1");
  std::vector<std::size_t> r = region;
  std::sort(r.begin(), r.end());
  if (std::adjacent_find(r.begin(), r.end()) != r.end()) throw DimensionError("region lists a column twice");
  if (!r.empty() && r.back() >= Lx) throw DimensionError("region column outside the top row");
}

std::vector<std::pair<std::size_t, std::size_t>> replica_bonds(const ReplicaParams& p) {
  std::vector<std::pair<std::size_t, std::size_t>> b;
  for (std::size_t y = 0; y < p.Ly; ++y)
    for (std::size_t x = 0; x < p.Lx; ++x) {
      const std::size_t r = y * p.Lx + x;
      if (x + 1 < p.Lx) b.emplace_back(r, r + 1);
      else if (p.periodic_x) b.emplace_back(r, y * p.Lx);
      if (y + 1 < p.Ly) b.emplace_back(r, r + p.Lx);
    }
  return b;
}

namespace detail {

std::vector<Permutation> all_permutations(std::size_t size) {
  std::vector<Permutation> out;
  Permutation g = Permutation::identity(size);
  do out.push_back(g);
  while (std::next_permutation(g.images.begin(), g.images.end()));
  return out;
}

const Permutation* site_boundary(const ReplicaParams& p, const BoundaryPerms& b, Variant v, std::size_t site) {
  if (site >= p.Lx) return nullptr;
  if (v == Variant::A && std::find(p.region.begin(), p.region.end(), site) != p.region.end()) return &b.gA;
  return &b.g0;
}

std::vector<double> site_log_field(const ReplicaParams& p, const BoundaryPerms& b, Variant v, std::size_t site,
                                   const std::vector<Permutation>& group) {
  const Permutation* bd = site_boundary(p, b, v, site);
  std::vector<double> w(group.size());
  for (std::size_t g = 0; g < group.size(); ++g) {
    w[g] = p.h() * group[g].cycles();
    if (bd) w[g] += p.J() * cycle_count(*bd, group[g]);
  }
  return w;
}

}  // namespace detail

double energy(const Configuration& config, const ReplicaParams& p, Variant v) {
  p.validate();
  if (config.size() != p.sites()) throw DimensionError("energy: configuration does not cover the lattice");
  const auto size = static_cast<std::size_t>(2 * p.Q());
  for (const auto& g : config) {
    if (g.size() != size) throw DimensionError("energy: permutation size differs from 2Q");
    g.validate();
  }
  const BoundaryPerms b = boundary_perms(p.n, p.m);
  double H = 0.0;
  for (auto [a, c] : replica_bonds(p)) H -= p.J() * cycle_count(config[a], config[c]);
  for (std::size_t r = 0; r < p.sites(); ++r) {
    H -= p.h() * cycle_count(b.e, config[r]);
    if (const Permutation* bd = detail::site_boundary(p, b, v, r)) H -= p.J() * cycle_count(*bd, config[r]);
  }
  return H;
}

double configuration_count(const ReplicaParams& p) {
  return std::pow(factorial(2 * p.Q()), static_cast<double>(p.sites()));
}

ExactMethod plan_exact(const ReplicaParams& p) {
  p.validate();
  const double count = configuration_count(p);
  if (count <= kEnumerationBudget) return ExactMethod::Enumeration;
  if (detail::character_cost(p)) return ExactMethod::Characters;
  std::ostringstream os;
  os << "exact_partition: " << count << " configurations exceed the enumeration budget of " << kEnumerationBudget;
  throw BudgetExceededError(os.str(), count);
}

namespace {

PartitionResult enumerate(const ReplicaParams& p, Variant v) {
  const auto size = static_cast<std::size_t>(2 * p.Q());
  const auto group = detail::all_permutations(size);
  const std::size_t G = group.size();
  const BoundaryPerms b = boundary_perms(p.n, p.m);
  const std::size_t N = p.sites();

  std::vector<std::vector<double>> field(N);
  for (std::size_t r = 0; r < N; ++r) field[r] = detail::site_log_field(p, b, v, r, group);

  std::vector<std::pair<std::size_t, std::size_t>> bonds;
  double constant = 0.0;
  for (auto bd : replica_bonds(p)) {
    if (bd.first == bd.second) constant -= p.J() * static_cast<double>(size);
    else bonds.push_back(bd);
  }
  // table of J C(g_i, g_j) when it fits
  std::vector<double> table;
  if (!bonds.empty()) {
    table.resize(G * G);
    for (std::size_t i = 0; i < G; ++i)
      for (std::size_t j = 0; j < G; ++j) table[i * G + j] = p.J() * cycle_count(group[i], group[j]);
  }

  std::vector<std::size_t> idx(N, 0);
  auto config_energy = [&]() {
    double H = constant;
    for (auto [a, c] : bonds) H -= table[idx[a] * G + idx[c]];
    for (std::size_t r = 0; r < N; ++r) H -= field[r][idx[r]];
    return H;
  };
  auto advance = [&]() {
    for (std::size_t r = N; r-- > 0;) {
      if (++idx[r] < G) return true;
      idx[r] = 0;
    }
    return false;
  };

  double Emin = std::numeric_limits<double>::infinity();
  do Emin = std::min(Emin, config_energy());
  while (advance());

  PartitionResult out;
  out.method = ExactMethod::Enumeration;
  out.configurations = configuration_count(p);
  out.min_energy = Emin;
  const double tol = 1e-9 * std::max(1.0, std::abs(Emin));
  long double sum = 0.0L;
  std::fill(idx.begin(), idx.end(), 0);
  do {
    const double dE = config_energy() - Emin;
    sum += std::exp(static_cast<long double>(-dE));
    if (dE <= tol && out.ground_states.size() < 64) {
      Configuration c;
      for (std::size_t r = 0; r < N; ++r) c.push_back(group[idx[r]]);
      out.ground_states.push_back(std::move(c));
    }
  } while (advance());
  out.logZ = -Emin + static_cast<double>(std::log(sum));
  return out;
}

}  // namespace

PartitionResult exact_partition(const ReplicaParams& p, Variant v, std::optional<ExactMethod> forced) {
  ExactMethod method = plan_exact(p);
  if (forced && *forced != method) {
    const bool fits = *forced == ExactMethod::Enumeration ? configuration_count(p) <= kEnumerationBudget
                                                          : detail::character_cost(p).has_value();
    if (!fits) throw BudgetExceededError("exact_partition: the requested method does not fit", configuration_count(p));
    method = *forced;
  }
  if (method == ExactMethod::Enumeration) return enumerate(p, v);
  PartitionResult out;
  out.method = ExactMethod::Characters;
  out.configurations = configuration_count(p);
  out.logZ = detail::character_log_partition(p, v);
  return out;
}

double replica_entropy_exact(const ReplicaParams& p) {
  if (p.n < 2) throw DomainError("replica_entropy_exact: n must be at least 2");
  const double zA = exact_partition(p, Variant::A).logZ;
  const double z0 = exact_partition(p, Variant::Zero).logZ;
  return -(zA - z0) / (static_cast<double>(p.m) * (p.n - 1));
}

Prediction predictions(double D, double d, const std::vector<double>& y_values, int n, int m) {
  if (!(D >= 1.0) || !(d >= 1.0)) throw DomainError("predictions: D and d must be at least 1");
  if (n < 1 || m < 1) throw DomainError("predictions: n and m must be positive");
  Prediction pr;
  const double lD = std::log(D), ld = std::log(d);
  pr.y = y_values;
  if (d == 1.0) {
    pr.ell_star_finite = false;
    pr.ell_star = std::numeric_limits<double>::infinity();
    pr.S_max = std::numeric_limits<double>::infinity();
  } else {
    pr.ell_star = lD / ld;
    pr.S_max = 2.0 * lD * lD / ld;
  }
  for (double y : y_values) pr.S_of_y.push_back(std::min(2.0 * y * lD, pr.S_max));
  pr.area_coeff = 1.0 / (D * D * d * d);
  pr.xi_typ = 1.0 / std::log(d * std::pow(D, 4));
  return pr;
}

}  // namespace pepslab
