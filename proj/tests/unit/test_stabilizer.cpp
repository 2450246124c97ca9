#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"
#include "pepslab/stabilizer.hpp"
#include "pepslab/stabilizer_peps.hpp"
#include "stabilizer_oracle.hpp"

using namespace pepslab;

namespace {

StabilizerTableau bell_pair(int p) {
  const QuditPauli xx = QuditPauli::x_on(p, 2, 0) * QuditPauli::x_on(p, 2, 1);
  const QuditPauli zz = QuditPauli::z_on(p, 2, 0) * QuditPauli::z_on(p, 2, 1, -1);
  return StabilizerTableau::from_generators(p, 2, {xx, zz});
}

// Dense vector up to global phase, as a map key.
std::string state_key(const VectorXc& v) {
  Complex ref = 0.0;
  for (const auto& c : v)
    if (std::abs(c) > 1e-6) {
      ref = std::abs(c) / c;
      break;
    }
  std::ostringstream os;
  for (const auto& c : v) {
    const Complex w = c * ref;
    os << std::lround(w.real() * 1e5) << ',' << std::lround(w.imag() * 1e5) << ';';
  }
  return os.str();
}

void check_uniform(const std::map<std::string, int>& counts, std::size_t expected_states, int samples) {
  CHECK(counts.size() == expected_states);
  const double pr = 1.0 / static_cast<double>(expected_states);
  const double mean = samples * pr, se = std::sqrt(samples * pr * (1.0 - pr));
  for (const auto& [k, c] : counts) CHECK(std::abs(c - mean) < 5.0 * se);
}

// Per-cut entropy of vec(rho) for the ket rows [0, rows), physical legs traced.
// Returns -1 if the contraction vanishes.
double dense_layer_entropy(const StabilizerPepsSpec& spec, std::size_t rows, std::size_t cut) {
  const std::size_t Lx = spec.Lx;
  const std::size_t d = oracle::ipow(static_cast<std::size_t>(spec.p), static_cast<std::size_t>(spec.k_d));
  const std::size_t D = oracle::ipow(static_cast<std::size_t>(spec.p), static_cast<std::size_t>(spec.k_D));
  const std::size_t nq = static_cast<std::size_t>(spec.k_d + 4 * spec.k_D);
  auto h = [&](std::size_t x, std::size_t y) { return static_cast<int>(y * Lx + x); };
  auto v = [&](std::size_t x, std::size_t y) { return static_cast<int>(100000 + y * Lx + x); };
  std::vector<LabeledTensor> net;
  std::vector<int> open;
  for (std::size_t y = 0; y < rows; ++y)
    for (std::size_t x = 0; x < Lx; ++x) {
      const VectorXc psi = oracle::state(stabilizer_site(spec, x, y));
      DenseTensor t = oracle::as_tensor(psi, spec.p, nq).reshaped({d, D, D, D, D});
      std::vector<int> labels = {static_cast<int>(200000 + y * Lx + x), h((x + Lx - 1) % Lx, y),
                                 y > 0 ? v(x, y - 1) : -1, h(x, y), v(x, y)};
      if (y == 0) {
        t = t.slice(2, 0);
        labels.erase(labels.begin() + 2);
      }
      net.push_back({t, labels});
      open.push_back(static_cast<int>(200000 + y * Lx + x));
    }
  for (std::size_t x = 0; x < Lx; ++x) open.push_back(v(x, rows - 1));
  const DenseTensor phi = contract_network(net, open);
  const std::size_t P = oracle::ipow(d, Lx * rows), DD = oracle::ipow(D, Lx);
  const MatrixXc F = phi.reshaped({P, DD}).to_matrix();
  if (F.norm() < 1e-9) return -1.0;
  const MatrixXc rho = F.transpose() * F.conjugate();
  const std::size_t DA = oracle::ipow(D, cut), DB = DD / DA;
  const MatrixXc m = DenseTensor::from_matrix(rho).reshaped({DA, DB, DA, DB}).permuted({0, 2, 1, 3}).matrix(2);
  const Eigen::VectorXd s = Eigen::JacobiSVD<MatrixXc>(m).singularValues();
  const double r = static_cast<double>(oracle::numerical_rank(s));
  return std::log(r) / std::log(static_cast<double>(spec.p)) / 2.0;
}

}  // namespace

TEST_CASE("primes and phase moduli") {
  CHECK(is_prime(2));
  CHECK(is_prime(173));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(4));
  CHECK_FALSE(is_prime(171));
  CHECK(phase_modulus(2) == 4);
  CHECK(phase_modulus(5) == 5);
  CHECK_THROWS_AS(StabilizerTableau(4, 2), DomainError);
  CHECK_THROWS_AS(random_stabilizer_state(2, 6, 1), DomainError);
  CHECK_THROWS_AS(random_stabilizer_state(0, 2, 1), DomainError);
}

TEST_CASE("Pauli products, powers and commutation match dense matrices") {
  for (int p : {2, 3, 5}) {
    Rng rng(static_cast<std::uint64_t>(p));
    const std::size_t n = p == 5 ? 2 : 3;
    for (int trial = 0; trial < 20; ++trial) {
      auto rand_pauli = [&] {
        QuditPauli g = QuditPauli::identity(p, n);
        for (std::size_t q = 0; q < n; ++q) {
          g.x[q] = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
          g.z[q] = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
        }
        g.phase = static_cast<int>(rng.below(static_cast<std::uint64_t>(phase_modulus(p))));
        return g;
      };
      const QuditPauli a = rand_pauli(), b = rand_pauli();
      const MatrixXc ma = oracle::matrix(a), mb = oracle::matrix(b);
      CHECK((oracle::matrix(a * b) - ma * mb).norm() < 1e-9);
      const int k = static_cast<int>(rng.below(7));
      MatrixXc mk = MatrixXc::Identity(ma.rows(), ma.cols());
      for (int i = 0; i < k; ++i) mk = mk * ma;
      CHECK((oracle::matrix(power(a, k)) - mk).norm() < 1e-9);
      // a b = omega^{-form} b a
      const Complex w = std::polar(1.0, -2.0 * std::numbers::pi * symplectic_form(a, b) / p);
      CHECK((ma * mb - w * mb * ma).norm() < 1e-9);
    }
  }
}

TEST_CASE("tableau invariants are enforced") {
  const StabilizerTableau zero(3, 2);
  CHECK(zero.is_pure());
  CHECK(oracle::state(zero)(0) != Complex(0.0));
  CHECK(std::abs(std::abs(oracle::state(zero)(0)) - 1.0) < 1e-12);
  const QuditPauli x0 = QuditPauli::x_on(2, 2, 0), z0 = QuditPauli::z_on(2, 2, 0);
  CHECK_THROWS_AS(StabilizerTableau::from_generators(2, 2, {x0, z0}), Error);  // anticommute
  CHECK_THROWS_AS(StabilizerTableau::from_generators(2, 2, {z0, z0}), Error);  // dependent
  QuditPauli y0 = x0 * z0;  // -iY, not Hermitian with phase 0
  CHECK_THROWS_AS(StabilizerTableau::from_generators(2, 2, {y0}), Error);
  for (int p : {2, 3, 5, 173})
    for (std::size_t n : {1u, 4u, 9u}) CHECK_NOTHROW(random_stabilizer_state(n, p, 11 * n).validate());
}

TEST_CASE("random states are deterministic in the seed") {
  const auto a = random_stabilizer_state(6, 3, 42), b = random_stabilizer_state(6, 3, 42);
  CHECK(a.raw_rows() == b.raw_rows());
  for (std::size_t k = 0; k < a.n_generators(); ++k) CHECK(a.phase(k) == b.phase(k));
  CHECK(random_stabilizer_state(6, 3, 43).raw_rows() != a.raw_rows());
}

TEST_CASE("single-qubit samples are uniform over the six stabilizer states") {
  std::map<std::string, int> counts;
  const int samples = 12000;
  for (int s = 0; s < samples; ++s) {
    const QuditPauli g = random_stabilizer_state(1, 2, static_cast<std::uint64_t>(s)).generator(0);
    counts[std::to_string(g.x[0]) + std::to_string(g.z[0]) + std::to_string(g.phase)]++;
  }
  check_uniform(counts, 6, samples);
}

TEST_CASE("two-qubit and single-qutrit samples are uniform over all stabilizer states") {
  {
    std::map<std::string, int> counts;
    const int samples = 18000;
    for (int s = 0; s < samples; ++s)
      counts[state_key(oracle::state(random_stabilizer_state(2, 2, static_cast<std::uint64_t>(s))))]++;
    check_uniform(counts, 60, samples);
  }
  {
    std::map<std::string, int> counts;
    const int samples = 6000;
    for (int s = 0; s < samples; ++s)
      counts[state_key(oracle::state(random_stabilizer_state(1, 3, static_cast<std::uint64_t>(s))))]++;
    check_uniform(counts, 12, samples);  // p (p + 1)
  }
}

TEST_CASE("stabilizer state vectors have flat amplitudes") {
  for (int p : {2, 3})
    for (std::uint64_t s = 0; s < 20; ++s) {
      const VectorXc v = oracle::state(random_stabilizer_state(p == 2 ? 2 : 3, p, s));
      double amp = 0.0;
      for (const auto& c : v)
        if (std::abs(c) > 1e-9) {
          if (amp == 0.0) amp = std::abs(c);
          CHECK(std::abs(std::abs(c) - amp) < 1e-9);
        }
      // the state is fixed by every generator
      const auto t = random_stabilizer_state(p == 2 ? 2 : 3, p, s);
      for (std::size_t k = 0; k < t.n_generators(); ++k) CHECK((oracle::act(t.generator(k), v) - v).norm() < 1e-9);
    }
}

TEST_CASE("forced Bell projection on worked examples") {
  const auto bell = bell_pair(2);
  auto r = forced_bell_project(bell, 0, 1);
  REQUIRE(r);
  CHECK(oracle::phase_distance(oracle::state(*r), oracle::state(bell)) < 1e-12);

  // |01>: Z Z^{-1} has eigenvalue -1 and commutes with the group
  const QuditPauli z0 = QuditPauli::z_on(2, 2, 0);
  QuditPauli mz1 = QuditPauli::z_on(2, 2, 1);
  mz1.phase = 2;
  const auto s01 = StabilizerTableau::from_generators(2, 2, {z0, mz1});
  CHECK_FALSE(forced_bell_project(s01, 0, 1));

  // qutrit |0 1>: eigenvalue omega^{-1}
  QuditPauli w1 = QuditPauli::z_on(3, 2, 1);
  w1.phase = 2;  // omega^2 Z stabilizes |1>
  const auto t01 = StabilizerTableau::from_generators(3, 2, {QuditPauli::z_on(3, 2, 0), w1});
  CHECK(std::abs(oracle::state(t01)(1)) > 0.999);
  CHECK_FALSE(forced_bell_project(t01, 0, 1));
  CHECK_THROWS_AS(forced_bell_project(bell, 1, 1), DimensionError);
  CHECK_THROWS_AS(forced_bell_project(bell, 0, 2), DimensionError);
}

TEST_CASE("forced Bell projection matches dense projectors") {
  int zeros = 0;
  for (int p : {2, 3}) {
    Rng rng(100 + static_cast<std::uint64_t>(p));
    const std::size_t nmax = p == 2 ? 8 : 4;
    for (int trial = 0; trial < 80; ++trial) {
      const std::size_t n = 2 + rng.below(nmax - 1);
      auto t = random_stabilizer_state(n, p, rng.next_u64());
      std::size_t a = rng.below(n);
      std::size_t b = rng.below(n - 1);
      if (b >= a) ++b;
      if (trial % 3 == 0) {
        // Bell-project (a, b) first, then shift by X_a^{-1}: the pair now
        // commutes with the group but sits outside the +1 sector
        auto pre = forced_bell_project(t, a, b);
        if (pre) t = *pre;
        const QuditPauli flip = QuditPauli::x_on(p, n, a);
        for (std::size_t k = 0; k < t.n_generators(); ++k) {
          QuditPauli g = t.generator(k);
          g.phase = (g.phase + (p == 2 ? 2 : 1) * symplectic_form(flip, g)) % phase_modulus(p);
          t.set_row(k, g);
        }
      }
      const VectorXc v = oracle::state(t);
      const QuditPauli xx = QuditPauli::x_on(p, n, a) * QuditPauli::x_on(p, n, b);
      const QuditPauli zz = QuditPauli::z_on(p, n, a) * QuditPauli::z_on(p, n, b, -1);
      const VectorXc w = oracle::project(zz, oracle::project(xx, v));
      const auto r = forced_bell_project(t, a, b);
      if (w.norm() < 1e-9) {
        CHECK_FALSE(r);
        ++zeros;
        continue;
      }
      REQUIRE(r);
      CHECK_NOTHROW(r->validate());
      CHECK(oracle::phase_distance(oracle::state(*r), w / w.norm()) < 1e-8);
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("contract_bond matches dense tensor contraction") {
  int zeros = 0;
  for (int p : {2, 3}) {
    Rng rng(200 + static_cast<std::uint64_t>(p));
    const std::size_t total = p == 2 ? 8 : 5;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t na = 1 + rng.below(total - 1);
      const std::size_t nb = 1 + rng.below(total - na);
      const std::size_t k = 1 + rng.below(std::min(na, nb));
      const auto a = random_stabilizer_state(na, p, rng.next_u64());
      const auto b = random_stabilizer_state(nb, p, rng.next_u64());
      std::vector<std::size_t> qa(na), qb(nb);
      std::iota(qa.begin(), qa.end(), 0);
      std::iota(qb.begin(), qb.end(), 0);
      for (std::size_t i = na; i > 1; --i) std::swap(qa[i - 1], qa[rng.below(i)]);
      for (std::size_t i = nb; i > 1; --i) std::swap(qb[i - 1], qb[rng.below(i)]);
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < k; ++i) pairs.emplace_back(qa[i], qb[i]);
      const VectorXc w = oracle::contract_vectors(oracle::state(a), na, oracle::state(b), nb, p, pairs);
      const auto r = contract_bond(a, b, pairs);
      if (w.norm() < 1e-9) {
        CHECK_FALSE(r);
        ++zeros;
        continue;
      }
      REQUIRE(r);
      CHECK(r->n_qudits() == na + nb - 2 * k);
      CHECK(r->is_pure());
      CHECK_NOTHROW(r->validate());
      if (r->n_qudits() > 0) CHECK(oracle::phase_distance(oracle::state(*r), w / w.norm()) < 1e-8);
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("contracting a Bell wire teleports the state") {
  for (int p : {2, 5}) {
    const auto s = random_stabilizer_state(3, p, 9);
    // wire qudit 0 to qudit 1 of s; the free wire end takes its place at the front
    auto r = contract_bond(bell_pair(p), s, {{1, 1}});
    REQUIRE(r);
    const VectorXc got = oracle::state(*r);
    const VectorXc want = oracle::state(s);
    // r orders [wire end, s0, s2]; s orders [s0, s1, s2]
    const DenseTensor g = oracle::as_tensor(got, p, 3).permuted({1, 0, 2});
    const VectorXc gv = Eigen::Map<const VectorXc>(g.ptr(), static_cast<Eigen::Index>(g.size()));
    CHECK(oracle::phase_distance(gv, want) < 1e-9);
  }
}

TEST_CASE("contracting a state with its conjugate never vanishes") {
  for (int p : {2, 3, 7})
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto t = random_stabilizer_state(4, p, s);
      CHECK(oracle::phase_distance(oracle::state(conjugate(t)), oracle::state(t).conjugate()) < 1e-9);
      auto r = contract_bond(t, conjugate(t), {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
      REQUIRE(r);
      CHECK(r->n_qudits() == 0);
      CHECK(r->n_generators() == 0);
      // partial contraction leaves the vectorized reduced density matrix
      auto half = contract_bond(t, conjugate(t), {{0, 0}, {1, 1}});
      REQUIRE(half);
      CHECK(half->n_qudits() == 4);
    }
}

TEST_CASE("projection onto |0> and partial trace match dense references") {
  Rng rng(5);
  for (int p : {2, 3})
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 3;
      const auto t = random_stabilizer_state(n, p, rng.next_u64());
      const VectorXc v = oracle::state(t);
      const std::size_t q = rng.below(n);
      // <0|_q psi
      const DenseTensor pv = oracle::as_tensor(v, p, n).slice(q, 0);
      VectorXc w = Eigen::Map<const VectorXc>(pv.ptr(), static_cast<Eigen::Index>(pv.size()));
      const auto r = project_zero(t, {q});
      if (w.norm() < 1e-9) {
        CHECK_FALSE(r);
      } else {
        REQUIRE(r);
        CHECK(oracle::phase_distance(oracle::state(*r), w / w.norm()) < 1e-9);
      }
      // tr_q |psi><psi|
      Axes perm;
      for (std::size_t i = 0; i < n; ++i)
        if (i != q) perm.push_back(i);
      perm.push_back(q);
      const MatrixXc m = oracle::as_tensor(v, p, n).permuted(perm).matrix(n - 1);
      const MatrixXc rho = m * m.adjoint();
      const auto tr = trace_out(t, {q});
      CHECK(tr.n_qudits() == n - 1);
      CHECK((oracle::density(tr) - rho / rho.trace()).norm() < 1e-9);
    }
}

TEST_CASE("entanglement entropy on worked examples") {
  CHECK(entanglement_entropy(bell_pair(2), {0}) == 1.0);
  CHECK(entanglement_entropy(bell_pair(5), {1}) == 1.0);
  const StabilizerTableau zero(3, 5);
  for (std::size_t q = 0; q < 5; ++q) CHECK(entanglement_entropy(zero, {q}) == 0.0);
  CHECK(entanglement_entropy(zero, {0, 2, 4}) == 0.0);
  CHECK(entanglement_entropy(zero, {}) == 0.0);
  CHECK_THROWS_AS(entanglement_entropy(zero, {5}), DimensionError);
  CHECK_THROWS_AS(entanglement_entropy(trace_out(bell_pair(2), {0}), {0}), DomainError);
}

TEST_CASE("entropies of random 8-qubit states match the dense partial-trace rank for every bipartition") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto t = random_stabilizer_state(8, 2, seed);
    const VectorXc v = oracle::state(t);
    for (unsigned mask = 1; mask < 255; ++mask) {
      std::vector<std::size_t> a;
      for (std::size_t q = 0; q < 8; ++q)
        if (mask >> q & 1u) a.push_back(q);
      const Eigen::VectorXd s = oracle::schmidt_values(v, 2, 8, a);
      const std::size_t rank = oracle::numerical_rank(s);
      CHECK(entanglement_entropy(t, a) == std::log2(static_cast<double>(rank)));
      // flat spectrum: every Renyi order agrees
      for (std::size_t i = 0; i < rank; ++i) CHECK(std::abs(s(static_cast<Eigen::Index>(i)) - s(0)) < 1e-8);
      CHECK(operator_entanglement(t, a) == 2.0 * entanglement_entropy(t, a));
    }
  }
}

TEST_CASE("qutrit entropies match the dense rank") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = random_stabilizer_state(4, 3, seed);
    const VectorXc v = oracle::state(t);
    for (unsigned mask = 1; mask < 15; ++mask) {
      std::vector<std::size_t> a;
      for (std::size_t q = 0; q < 4; ++q)
        if (mask >> q & 1u) a.push_back(q);
      const double rank = static_cast<double>(oracle::numerical_rank(oracle::schmidt_values(v, 3, 4, a)));
      CHECK(std::abs(entanglement_entropy(t, a) - std::log(rank) / std::log(3.0)) < 1e-12);
    }
  }
}

TEST_CASE("doubled site is the vectorized reduced density matrix of the legs") {
  StabilizerPepsSpec spec;
  spec.p = 2;
  spec.k_D = 1;
  spec.k_d = 1;
  const auto site = stabilizer_site(spec, 0, 0);
  const auto dbl = doubled_site(site, spec.k_d);
  CHECK(dbl.n_qudits() == 8);
  CHECK(dbl.is_pure());
  // rho_legs = tr_phys |T><T|, and the doubled state is sum rho[l, l'] |l>|l'>
  const VectorXc v = oracle::state(site);
  const MatrixXc m = oracle::as_tensor(v, 2, 5).matrix(1);  // [phys, legs]
  const MatrixXc rho = m.transpose() * m.conjugate();
  const RowMatrixXc rho_rows = rho;
  const VectorXc want = Eigen::Map<const VectorXc>(rho_rows.data(), rho.size());
  CHECK(oracle::phase_distance(oracle::state(dbl), want / want.norm()) < 1e-9);
}

TEST_CASE("layer profile matches the dense boundary state") {
  struct Case {
    int p, kD, kd;
    std::size_t Lx, rows;
    Ensemble e;
  };
  for (const Case c : {Case{2, 1, 1, 3, 3, Ensemble::Disordered}, Case{2, 1, 1, 3, 3, Ensemble::Clean},
                       Case{3, 1, 1, 2, 2, Ensemble::Disordered}, Case{2, 2, 1, 2, 2, Ensemble::Disordered},
                       Case{2, 1, 2, 4, 2, Ensemble::Disordered}}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      StabilizerPepsSpec spec;
      spec.p = c.p;
      spec.k_D = c.kD;
      spec.k_d = c.kd;
      spec.Lx = c.Lx;
      spec.Ly = c.rows;
      spec.ensemble = c.e;
      spec.seed = seed;
      for (std::size_t cut = 1; cut < c.Lx; ++cut) {
        const LayerProfile lp = layer_profile(spec, cut);
        for (std::size_t y = 1; y <= c.rows; ++y) {
          const double want = dense_layer_entropy(spec, y, cut);
          if (lp.zero && lp.zero_row < y) {
            CHECK(want < 0.0);
            break;
          }
          REQUIRE(lp.S.size() >= y);
          CHECK(std::abs(lp.S[y - 1] - want) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("layer profile with a trivial virtual space is identically zero") {
  StabilizerPepsSpec spec;
  spec.p = 5;
  spec.k_D = 0;
  spec.k_d = 2;
  spec.Lx = 6;
  spec.Ly = 5;
  const LayerProfile lp = layer_profile(spec);
  REQUIRE(lp.S.size() == 5);
  for (double s : lp.S) CHECK(s == 0.0);
}

TEST_CASE("layer profile rises, falls and plateaus independently of the cut") {
  // p = 2, k_D = 3, k_d = 1, L = 12
  StabilizerPepsSpec spec;
  spec.p = 2;
  spec.k_D = 3;
  spec.k_d = 1;
  spec.Lx = 12;
  spec.Ly = 10;
  const int seeds = 8;
  std::vector<double> half(spec.Ly, 0.0), third(spec.Ly, 0.0);
  for (int s = 0; s < seeds; ++s) {
    spec.seed = static_cast<std::uint64_t>(s);
    const auto a = sample_layer_profile(spec);
    const auto b = sample_layer_profile(spec, 4);
    for (std::size_t y = 0; y < spec.Ly; ++y) {
      half[y] += a.S[y] / seeds;
      third[y] += b.S[y] / seeds;
    }
  }
  const auto peak = std::max_element(half.begin(), half.end());
  CHECK(*peak > 4.0);
  CHECK(peak - half.begin() < 3);
  for (std::size_t y = 6; y < spec.Ly; ++y) {
    CHECK(half[y] < 1.0);
    CHECK(std::abs(half[y] - third[y]) < 1.0);
  }
}

TEST_CASE("layer profile is deterministic and validates its input") {
  StabilizerPepsSpec spec;
  spec.p = 3;
  spec.k_D = 1;
  spec.k_d = 1;
  spec.Lx = 4;
  spec.Ly = 4;
  spec.seed = 17;
  CHECK(layer_profile(spec).S == layer_profile(spec).S);
  const auto s = sample_layer_profile(spec);
  CHECK(s.resamples >= 0);
  spec.p = 9;
  CHECK_THROWS_AS(layer_profile(spec), DomainError);
  spec.p = 3;
  spec.k_D = -1;
  CHECK_THROWS_AS(layer_profile(spec), DomainError);
  spec.k_D = 1;
  CHECK_THROWS_AS(layer_profile(spec, 5), DimensionError);
  CHECK(ensemble_from_string("clean") == Ensemble::Clean);
  CHECK(to_string(Ensemble::Disordered) == "disordered");
  CHECK_THROWS_AS(ensemble_from_string("noisy"), DomainError);
}
