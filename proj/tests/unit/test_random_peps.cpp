#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "peps_oracle.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/random_peps.hpp"
#include "pepslab/rng.hpp"

using namespace pepslab;

namespace {

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) { return (a - b).max_abs(); }

// Norm network contracted from doubled tensors, dangling legs pinned to 0.
Complex double_network_norm(const PepsLattice& lat) {
  std::vector<LabeledTensor> net;
  for (std::size_t y = 0; y < lat.Ly; ++y)
    for (std::size_t x = 0; x < lat.Lx; ++x) {
      DenseTensor e = double_tensor(lat.at(x, y)).tensor;
      std::vector<int> labels = {x > 0 ? oracle::h_bond(lat, x - 1, y) : -1, y > 0 ? oracle::v_bond(lat, x, y - 1) : -1,
                                 x + 1 < lat.Lx ? oracle::h_bond(lat, x, y) : -1,
                                 y + 1 < lat.Ly ? oracle::v_bond(lat, x, y) : -1};
      for (std::size_t ax = 4; ax-- > 0;)
        if (labels[ax] < 0) {
          e = e.slice(ax, 0);
          labels.erase(labels.begin() + static_cast<long>(ax));
        }
      net.push_back({e, labels});
    }
  return contract_network(net, {}).data()[0];
}

}  // namespace

TEST_CASE("clean tensors have the documented shape and are reproducible") {
  PepsTensor t = sample_clean(2, 2, 7);
  CHECK(t.tensor.shape() == Shape{2, 2, 2, 2, 2});
  CHECK(t.d == 2);
  CHECK(t.D == 2);
  CHECK(sample_clean(2, 2, 7).tensor == t.tensor);
  CHECK_FALSE(sample_clean(2, 2, 8).tensor == t.tensor);
  CHECK(sample_clean(3, 1, 1).tensor.shape() == Shape{1, 3, 3, 3, 3});
  CHECK_THROWS_AS(sample_clean(0, 2, 1), InvalidShapeError);
  CHECK_THROWS_AS(sample_clean(2, 0, 1), InvalidShapeError);
}

TEST_CASE("entries have unit second moment across seeds") {
  const int seeds = 4000;
  double m2 = 0.0, m4 = 0.0;
  Complex mean = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const Complex z = sample_clean(2, 2, static_cast<std::uint64_t>(s)).tensor({1, 0, 1, 1, 0});
    mean += z;
    m2 += std::norm(z);
    m4 += std::norm(z) * std::norm(z);
  }
  mean /= seeds;
  m2 /= seeds;
  m4 /= seeds;
  const double se = std::sqrt((m4 - m2 * m2) / seeds);
  CHECK(std::abs(m2 - 1.0) < 5.0 * se);
  CHECK(std::abs(mean) < 5.0 / std::sqrt(seeds));
}

TEST_CASE("disordered lattices draw each site from its own stream") {
  PepsLattice a = sample_disordered(2, 2, 2, 2, 11);
  REQUIRE(a.tensors.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) CHECK_FALSE(a.tensors[i].tensor == a.tensors[j].tensor);

  PepsLattice b = sample_disordered(3, 3, 2, 2, 11, Boundary::PeriodicX);
  for (std::size_t r = 0; r < 4; ++r) CHECK(a.tensors[r].tensor == b.tensors[r].tensor);
  CHECK(b.boundary == Boundary::PeriodicX);
  CHECK(a.at(1, 1).tensor == a.tensors[3].tensor);
  CHECK(a.tensors[2].tensor == gaussian_tensor({2, 2, 2, 2, 2}, derive_seed(11, 2)));
  CHECK_THROWS_AS(sample_disordered(0, 2, 2, 2, 1), InvalidShapeError);
}

TEST_CASE("scalar PEPS norm is the product of squared moduli") {
  PepsLattice lat = sample_disordered(3, 2, 1, 1, 5);
  double expect = 1.0;
  for (const auto& t : lat.tensors) expect *= std::norm(t.tensor.data()[0]);
  CHECK(std::abs(double_network_norm(lat).real() - expect) < 1e-12 * expect);
  CHECK(std::abs(oracle::state_vector(lat).squaredNorm() - expect) < 1e-12 * expect);
}

TEST_CASE("perturbation endpoints and noise statistics") {
  PepsTensor t = sample_clean(2, 2, 3);
  CHECK(perturb(t, 0.0, 9).tensor == t.tensor);
  CHECK_THROWS_AS(perturb(t, -0.1, 9), DomainError);
  CHECK_THROWS_AS(perturb(t, 1.5, 9), DomainError);

  PepsTensor half = perturb(t, 0.5, 9);
  DenseTensor noise = half.tensor - Complex(0.5) * t.tensor;
  CHECK(max_abs_diff(noise, Complex(0.5) * gaussian_tensor(t.tensor.shape(), 9)) < 1e-15);

  // eta = 1 forgets T: normalized overlap averages to zero
  const int seeds = 2000;
  double sum = 0.0, sum2 = 0.0;
  Complex noise_mean = 0.0;
  for (int s = 0; s < seeds; ++s) {
    PepsTensor p = perturb(t, 1.0, static_cast<std::uint64_t>(1000 + s));
    Complex ov = 0.0;
    for (std::size_t i = 0; i < t.tensor.size(); ++i) ov += std::conj(t.tensor.data()[i]) * p.tensor.data()[i];
    const double c = ov.real() / (t.tensor.norm() * p.tensor.norm());
    sum += c;
    sum2 += c * c;
    PepsTensor q = perturb(t, 0.5, static_cast<std::uint64_t>(1000 + s));
    noise_mean += q.tensor({0, 1, 0, 1, 0}) - 0.5 * t.tensor({0, 1, 0, 1, 0});
  }
  const double mean = sum / seeds;
  const double se = std::sqrt((sum2 / seeds - mean * mean) / seeds);
  CHECK(std::abs(mean) < 5.0 * se);
  CHECK(std::abs(noise_mean / double(seeds)) < 5.0 * 0.5 / std::sqrt(seeds));

  PepsLattice lat = sample_disordered(2, 2, 2, 2, 1);
  PepsLattice pl = perturb(lat, 0.25, 77);
  for (std::size_t r = 0; r < 4; ++r)
    CHECK(pl.tensors[r].tensor == perturb(lat.tensors[r], 0.25, derive_seed(77, r)).tensor);
}

TEST_CASE("double tensor is Hermitian under ket-bra exchange") {
  for (std::size_t D : {1, 2, 3}) {
    PepsTensor t = sample_clean(D, 2, 40 + D);
    DoubleTensor dt = double_tensor(t);
    CHECK(dt.positive_flag);
    CHECK(dt.tensor.shape() == Shape{D * D, D * D, D * D, D * D});
    const DenseTensor e6 = dt.tensor.reshaped({D, D, D, D, D, D, D, D});
    const DenseTensor swapped = e6.permuted({1, 0, 3, 2, 5, 4, 7, 6}).conj();
    CHECK(max_abs_diff(e6, swapped) < 1e-12);
  }
  PepsTensor a = sample_clean(2, 2, 1), b = sample_clean(2, 2, 2);
  CHECK_FALSE(double_tensor(a, b).positive_flag);
  CHECK(double_tensor(a, a).positive_flag);
  MatrixXc op = MatrixXc::Identity(2, 2);
  CHECK_FALSE(double_tensor(a, nullptr, &op).positive_flag);
  CHECK_THROWS_AS(double_tensor(a, sample_clean(3, 2, 1)), DimensionError);
  MatrixXc bad = MatrixXc::Identity(3, 3);
  CHECK_THROWS_AS(double_tensor(a, nullptr, &bad), DimensionError);
}

TEST_CASE("D=1 double tensor is the scalar bra-op-ket sum") {
  PepsTensor t = sample_clean(1, 3, 4), u = sample_clean(1, 3, 5);
  MatrixXc op = gaussian_tensor({3, 3}, 6).to_matrix();
  DoubleTensor dt = double_tensor(t, &u, &op);
  Complex expect = 0.0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t q = 0; q < 3; ++q)
      expect += std::conj(u.tensor({s, 0, 0, 0, 0})) * op(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(q)) *
                t.tensor({q, 0, 0, 0, 0});
  REQUIRE(dt.tensor.size() == 1);
  CHECK(std::abs(dt.tensor.data()[0] - expect) < 1e-12);
}

TEST_CASE("closed trace of a double tensor with a traceless operator matches explicit loops") {
  const std::size_t D = 2, d = 2;
  PepsTensor t = sample_clean(D, d, 12);
  MatrixXc op(2, 2);
  op << Complex(0.3, 0.1), Complex(1.0, -2.0), Complex(0.5, 0.7), Complex(-0.3, -0.1);
  DoubleTensor dt = double_tensor(t, nullptr, &op);
  Complex got = 0.0;
  for (std::size_t a = 0; a < D * D; ++a)
    for (std::size_t b = 0; b < D * D; ++b) got += dt.tensor({a, b, a, b});

  Complex expect = 0.0;
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t q = 0; q < d; ++q)
      for (std::size_t lk = 0; lk < D; ++lk)
        for (std::size_t uk = 0; uk < D; ++uk)
          for (std::size_t lb = 0; lb < D; ++lb)
            for (std::size_t ub = 0; ub < D; ++ub)
              expect += op(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(q)) * t.tensor({q, lk, uk, lk, uk}) *
                        std::conj(t.tensor({s, lb, ub, lb, ub}));
  CHECK(std::abs(got - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
}

TEST_CASE("norm double tensor is positive as a ket-to-bra map") {
  for (std::size_t D : {1, 2, 3}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      DoubleTensor dt = double_tensor(sample_clean(D, 2, seed));
      const DenseTensor e8 = dt.tensor.reshaped({D, D, D, D, D, D, D, D});
      // rows: ket legs, columns: bra legs
      MatrixXc m = e8.permuted({0, 2, 4, 6, 1, 3, 5, 7}).matrix(4);
      MatrixXc h = 0.5 * (m + m.adjoint());
      CHECK((m - h).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
    }
  }
}

TEST_CASE("reflections relabel legs consistently") {
  DoubleTensor dt = double_tensor(sample_clean(2, 2, 8), sample_clean(2, 2, 9));
  DoubleTensor v = reflect_vertical(dt), h = reflect_horizontal(dt);
  CHECK(max_abs_diff(v.tensor, build_double(v.ket, v.bra)) < 1e-13);
  CHECK(max_abs_diff(h.tensor, build_double(h.ket, h.bra)) < 1e-13);
  CHECK(reflect_vertical(v).tensor == dt.tensor);
  CHECK(reflect_horizontal(h).tensor == dt.tensor);
  CHECK(v.tensor({1, 2, 3, 0}) == dt.tensor({1, 0, 3, 2}));
  CHECK(h.tensor({1, 2, 3, 0}) == dt.tensor({3, 2, 1, 0}));
}

TEST_CASE("open double tensor traces back to the closed one") {
  DoubleTensor dt = double_tensor(sample_clean(2, 3, 8));
  DenseTensor open = build_double_open(dt.ket, dt.bra);
  CHECK(open.shape() == Shape{3, 3, 4, 4, 4, 4});
  DenseTensor traced(Shape{4, 4, 4, 4});
  for (std::size_t s = 0; s < 3; ++s) traced += open.slice(0, s).slice(0, s);
  CHECK(max_abs_diff(traced, dt.tensor) < 1e-12);
}

TEST_CASE("small-lattice norm from double tensors equals the state-vector norm") {
  for (auto [lx, ly] : {std::pair<std::size_t, std::size_t>{2, 2}, {3, 2}, {3, 3}}) {
    for (std::uint64_t seed : {1, 2}) {
      PepsLattice lat = sample_disordered(lx, ly, 2, 2, seed);
      const double direct = oracle::state_vector(lat).squaredNorm();
      const Complex net = double_network_norm(lat);
      CHECK(std::abs(net - direct) < 1e-8 * direct);
    }
  }
}
