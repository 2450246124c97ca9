#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pepslab {

// Permutation of the 2Q replica slots. Slot 2(k-1) holds replica k and slot
// 2(k-1)+1 its bar partner, so the ordering is {1, 1bar, 2, 2bar, ...}.
struct Permutation {
  std::vector<int> images;  // 0-based

  static Permutation identity(std::size_t size);
  // Disjoint cycles over 0-based slots; unlisted slots are fixed.
  static Permutation from_cycles(std::size_t size, const std::vector<std::vector<int>>& cycles);

  std::size_t size() const { return images.size(); }
  int operator()(int x) const { return images[static_cast<std::size_t>(x)]; }
  Permutation inverse() const;
  // Number of cycles, fixed points included.
  int cycles() const;
  // Cycle notation with replica labels, e.g. "(1 2')(3)".
  std::string str() const;
  void validate() const;
};

// (g * h)(x) = g(h(x)).
Permutation operator*(const Permutation& g, const Permutation& h);
bool operator==(const Permutation& a, const Permutation& b);

// 0-based slot of replica k (1-based), plain or barred.
int replica_slot(int k, bool bar);

// Cycles of g^{-1} h. Throws DimensionError on a size mismatch.
int cycle_count(const Permutation& g, const Permutation& h);

struct BoundaryPerms {
  Permutation e, g0, gA;
};
// g0 = (1 1')(2 2')...(Q Q'); gA = ((1 2')(2 3')...(n 1'))^{x m}.
BoundaryPerms boundary_perms(int n, int m);

// Lexicographic rank of a permutation and its inverse map.
std::uint64_t permutation_rank(const Permutation& g);
Permutation permutation_unrank(std::size_t size, std::uint64_t rank);
double factorial(int k);

enum class Variant { A, Zero };
std::string to_string(Variant v);

// Spins live on an Lx x Ly lattice, site r = y * Lx + x. Row y = 0 carries the
// boundary field; `region` lists the top-row columns in A.
struct ReplicaParams {
  int n = 2;
  int m = 1;
  double D = 2.0;
  double d = 2.0;
  std::size_t Lx = 1, Ly = 1;
  bool periodic_x = false;
  std::vector<std::size_t> region;

  int Q() const { return n * m; }
  double J() const;
  double h() const;
  std::size_t sites() const { return Lx * Ly; }
  // Throws DomainError / DimensionError.
  void validate() const;
};

// Nearest-neighbour bonds (a, b); a == b for the self bond of a periodic
// single column.
std::vector<std::pair<std::size_t, std::size_t>> replica_bonds(const ReplicaParams& p);

using Configuration = std::vector<Permutation>;

double energy(const Configuration& config, const ReplicaParams& p, Variant v);

inline constexpr double kEnumerationBudget = 1e8;
// Floating-point operations allowed for the character-expansion route.
inline constexpr double kCharacterBudget = 1.5e12;

// (2Q)!^{Lx Ly}.
double configuration_count(const ReplicaParams& p);

enum class ExactMethod { Enumeration, Characters };

// Picks the route exact_partition would take; throws BudgetExceededError
// naming the configuration count when neither fits.
ExactMethod plan_exact(const ReplicaParams& p);

struct PartitionResult {
  double logZ = 0.0;
  ExactMethod method = ExactMethod::Enumeration;
  double configurations = 0.0;
  // Only filled by enumeration.
  std::optional<double> min_energy;
  std::vector<Configuration> ground_states;
};

// `method` forces a route; forcing one that does not fit throws BudgetExceededError.
PartitionResult exact_partition(const ReplicaParams& p, Variant v, std::optional<ExactMethod> method = std::nullopt);

// (F_A - F_0) / (m (n - 1)) at the given integer m.
double replica_entropy_exact(const ReplicaParams& p);

struct Prediction {
  double ell_star = 0.0;
  bool ell_star_finite = true;
  std::vector<double> y;
  std::vector<double> S_of_y;
  double S_max = 0.0;
  double area_coeff = 0.0;
  double xi_typ = 0.0;
};

// n and m are accepted for symmetry with the other entry points; the large-D
// forms do not depend on them.
Prediction predictions(double D, double d, const std::vector<double>& y_values, int n, int m);

// Irreducible representations of S_N used by the character route.
namespace schur_weyl {

using Partition = std::vector<int>;

std::vector<Partition> partitions(int N);
std::size_t irrep_dimension(const Partition& lambda);
// Dimension of the GL(D) irrep labelled by lambda, prod (D + c) / hook.
double schur_dimension(const Partition& lambda, double D);
// Young's orthogonal form of g.
Eigen::MatrixXd orthogonal_form(const Partition& lambda, const Permutation& g);

}  // namespace schur_weyl

struct WickEstimate {
  double mean_A = 0.0, se_A = 0.0;
  double mean_0 = 0.0, se_0 = 0.0;
  // log(Z_A / Z_0) from the same samples, with its jackknife error.
  double log_ratio = 0.0, log_ratio_se = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kWickDenseBudget = 65536.0;

// Dense dimension the oracle needs: max(d^N D^Lx, D^(2 Lx)).
double wick_dense_dimension(const ReplicaParams& p);

// Samples Gaussian tensors, contracts the network densely and averages
// (tr rho_A^n)^m and (tr rho^n)^m. Sample i uses stream derive_seed(seed, i),
// so the result does not depend on `jobs`.
WickEstimate wick_oracle_mc(const ReplicaParams& p, std::size_t samples, std::uint64_t seed, int jobs = 1);

// Delete-one jackknife.
struct JackknifeResult {
  double estimate = 0.0;
  double se = 0.0;
};
JackknifeResult jackknife_mean(const std::vector<double>& x);
// log(mean x / mean y) with its delete-one jackknife error.
JackknifeResult jackknife_ratio_log(const std::vector<double>& x, const std::vector<double>& y);

struct MeanStd {
  double mean = 0.0;
  double sd = 0.0;
};
MeanStd mean_std(const std::vector<double>& x);

}  // namespace pepslab
