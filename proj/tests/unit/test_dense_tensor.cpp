#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "pepslab/dense_tensor.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/linalg.hpp"
#include "pepslab/rng.hpp"

using namespace pepslab;

namespace {

MatrixXc random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  return gaussian_tensor({static_cast<std::size_t>(r), static_cast<std::size_t>(c)}, seed).to_matrix();
}


// Reference contraction by explicit index loops over row-major storage.
DenseTensor naive_contract(const DenseTensor& a, const Axes& ca, const DenseTensor& b, const Axes& cb) {
  auto strides = [](const Shape& sh) {
    std::vector<std::size_t> st(sh.size(), 1);
    for (std::size_t i = sh.size(); i-- > 1;) st[i - 1] = st[i] * sh[i];
    return st;
  };
  const auto sa = strides(a.shape()), sb = strides(b.shape());
  Axes fa, fb;
  Shape out_shape, k_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (std::find(ca.begin(), ca.end(), i) == ca.end()) fa.push_back(i), out_shape.push_back(a.extent(i));
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (std::find(cb.begin(), cb.end(), i) == cb.end()) fb.push_back(i), out_shape.push_back(b.extent(i));
  for (auto i : ca) k_shape.push_back(a.extent(i));
  DenseTensor out(out_shape);
  std::size_t K = 1;
  for (auto e : k_shape) K *= e;
  const auto so = strides(out_shape), sk = strides(k_shape);
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::size_t base_a = 0, base_b = 0;
    for (std::size_t j = 0; j < out_shape.size(); ++j) {
      const std::size_t idx = (o / so[j]) % out_shape[j];
      if (j < fa.size()) base_a += idx * sa[fa[j]];
      else base_b += idx * sb[fb[j - fa.size()]];
    }
    Complex acc = 0;
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t ia = base_a, ib = base_b;
      for (std::size_t j = 0; j < k_shape.size(); ++j) {
        const std::size_t idx = (k / sk[j]) % k_shape[j];
        ia += idx * sa[ca[j]];
        ib += idx * sb[cb[j]];
      }
      acc += a.data()[ia] * b.data()[ib];
    }
    out.data()[o] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("gaussian tensors are reproducible and have unit variance") {
  auto a = gaussian_tensor({2, 2}, 42), b = gaussian_tensor({2, 2}, 42), c = gaussian_tensor({2, 2}, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);

  const std::size_t n = 1000000;
  auto t = gaussian_tensor({n}, 5);
  double s1 = 0, s2 = 0;
  Complex m = 0;
  double mr2 = 0;
  for (auto v : t.data()) {
    double a2 = std::norm(v);
    s1 += a2;
    s2 += a2 * a2;
    m += v;
    mr2 += v.real() * v.real();
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 5 * se);
  // each component has variance 1/2, so the mean has standard error sqrt(0.5 / n)
  const double se_mean = std::sqrt(0.5 / n);
  CHECK(std::abs(m.real() / n) < 5 * se_mean);
  CHECK(std::abs(m.imag() / n) < 5 * se_mean);
  CHECK(std::abs(mr2 / n - 0.5) < 0.01);
}

TEST_CASE("zero extent is rejected") {
  CHECK_THROWS_AS(gaussian_tensor({2, 0}, 1), InvalidShapeError);
  CHECK_THROWS_AS(DenseTensor({0}), InvalidShapeError);
}

TEST_CASE("first draws of a fixed seed are frozen") {
  // guards against accidental changes of the stream derivation
  Rng r(0);
  const std::uint64_t first = r.next_u64();
  Rng again(0);
  CHECK(again.next_u64() == first);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
}

TEST_CASE("contract with identity and naive loops") {
  auto v = gaussian_tensor({3}, 3);
  DenseTensor id({3, 3});
  for (std::size_t i = 0; i < 3; ++i) id({i, i}) = 1.0;
  auto w = contract(id, {1}, v, {0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w({i}) - v({i})) < 1e-15);

  auto a = gaussian_tensor({2, 3}, 10), b = gaussian_tensor({3, 4}, 11);
  auto c = contract(a, {1}, b, {0});
  REQUIRE(c.shape() == Shape{2, 4});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k) {
      Complex s = 0;
      for (std::size_t j = 0; j < 3; ++j) s += a({i, j}) * b({j, k});
      CHECK(std::abs(c({i, k}) - s) < 1e-13);
    }
}

TEST_CASE("multi-axis contraction keeps free axes in order") {
  auto a = gaussian_tensor({2, 3, 4, 5}, 20), b = gaussian_tensor({5, 6, 3}, 21);
  auto c = contract(a, {3, 1}, b, {0, 2});
  REQUIRE(c.shape() == Shape{2, 4, 6});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t m = 0; m < 6; ++m) {
        Complex s = 0;
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t l = 0; l < 5; ++l) s += a({i, j, k, l}) * b({l, m, j});
        CHECK(std::abs(c({i, k, m}) - s) < 1e-12);
      }
}

TEST_CASE("contract agrees with index loops for every operand layout") {
  // a is {2,3,4}, b is {3,4,5} or a permutation of it; the cases cover operands
  // used in place, through a transposed view, and after a permutation.
  const auto a = gaussian_tensor({2, 3, 4}, 40);
  const auto b = gaussian_tensor({3, 4, 5}, 41);
  const auto bt = gaussian_tensor({5, 3, 4}, 42);
  const auto at = gaussian_tensor({3, 4, 2}, 43);
  struct Case {
    const DenseTensor* x;
    Axes ax;
    const DenseTensor* y;
    Axes ay;
  };
  const std::vector<Case> cases = {
      {&a, {1, 2}, &b, {0, 1}},   // both direct
      {&at, {0, 1}, &b, {0, 1}},  // a transposed
      {&a, {1, 2}, &bt, {1, 2}},  // b transposed
      {&at, {0, 1}, &bt, {1, 2}}, // both transposed
      {&a, {2, 1}, &b, {1, 0}},   // axis order reversed on both sides
      {&a, {1}, &bt, {1}},        // b permuted
      {&at, {1, 0}, &bt, {2, 1}}, // a and b reordered
      {&a, {}, &b, {}},           // outer product
  };
  for (const auto& c : cases) {
    const auto got = contract(*c.x, c.ax, *c.y, c.ay);
    const auto want = naive_contract(*c.x, c.ax, *c.y, c.ay);
    REQUIRE(got.shape() == want.shape());
    CHECK((got - want).norm() < 1e-12 * want.norm());
  }
}

TEST_CASE("contract properties") {
  auto a = gaussian_tensor({3, 4, 2}, 30), b = gaussian_tensor({4, 5}, 31);
  auto n2 = contract(a, {0, 1, 2}, a.conj(), {0, 1, 2});
  CHECK(n2.rank() == 0);
  CHECK(std::abs(n2.data()[0].imag()) < 1e-12);
  CHECK(std::abs(n2.data()[0].real() - a.norm() * a.norm()) < 1e-10);

  const Complex alpha(0.3, -1.7);
  auto lhs = contract(alpha * a, {1}, b, {0});
  auto rhs = alpha * contract(a, {1}, b, {0});
  CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());

  CHECK_THROWS_AS(contract(a, {0}, b, {0}), DimensionError);
  CHECK_THROWS_AS(contract(a, {1, 1}, b, {0, 0}), DimensionError);
}

TEST_CASE("permutation matches index relabeling") {
  auto a = gaussian_tensor({2, 3, 4}, 40);
  auto p = a.permuted({2, 0, 1});
  REQUIRE(p.shape() == Shape{4, 2, 3});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) CHECK(p({k, i, j}) == a({i, j, k}));
  auto s = a.slice(1, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k) CHECK(s({i, k}) == a({i, 2, k}));
}

TEST_CASE("contract_network equals explicit pairwise contraction") {
  auto a = gaussian_tensor({2, 3}, 50), b = gaussian_tensor({3, 4}, 51), c = gaussian_tensor({4, 2}, 52);
  auto tr = contract_network({{a, {1, 2}}, {b, {2, 3}}, {c, {3, 1}}}, {});
  Complex s = 0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) s += a({i, j}) * b({j, k}) * c({k, i});
  CHECK(std::abs(tr.data()[0] - s) < 1e-12);
  auto open = contract_network({{a, {1, 2}}, {b, {2, 3}}}, {3, 1});
  CHECK(open.shape() == Shape{4, 2});
}

TEST_CASE("svd_truncate on a diagonal matrix") {
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = 0.8;
  m(1, 1) = 0.6;
  auto r = svd_truncate(m, 1);
  REQUIRE(r.singular_values.size() == 1);
  CHECK(r.singular_values[0] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.discarded_weight == doctest::Approx(0.6).epsilon(1e-14));
  CHECK_THROWS_AS(svd_truncate(m, 0), DomainError);

  auto z = svd_truncate(MatrixXc::Zero(3, 2).eval(), 5);
  for (double s : z.singular_values) CHECK(s == 0.0);
  CHECK(z.discarded_weight == 0.0);
}

TEST_CASE("svd_truncate reconstructs and matches a full decomposition") {
  for (auto [r, c] : {std::pair{6, 6}, {5, 9}, {17, 3}, {40, 40}, {64, 64}, {64, 31}}) {
    MatrixXc m = random_matrix(r, c, 100 + r * 7 + c);
    auto s = svd_truncate(m, 1000);
    Eigen::VectorXd sv = Eigen::Map<Eigen::VectorXd>(s.singular_values.data(), static_cast<Eigen::Index>(s.singular_values.size()));
    MatrixXc rec = s.left_vectors * sv.asDiagonal() * s.right_vectors_conj;
    CHECK((rec - m).cwiseAbs().maxCoeff() < 1e-10);
    const auto k = static_cast<Eigen::Index>(s.singular_values.size());
    CHECK((s.left_vectors.adjoint() * s.left_vectors - MatrixXc::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.right_vectors_conj * s.right_vectors_conj.adjoint() - MatrixXc::Identity(k, k)).cwiseAbs().maxCoeff() <
          1e-10);
    for (std::size_t i = 1; i < s.singular_values.size(); ++i) CHECK(s.singular_values[i] <= s.singular_values[i - 1]);
  }
  MatrixXc m = random_matrix(6, 6, 7);
  auto t = svd_truncate(m, 3);
  Eigen::JacobiSVD<MatrixXc> oracle(m);
  const auto& sv = oracle.singularValues();
  CHECK(t.discarded_weight == doctest::Approx(std::sqrt(sv(3) * sv(3) + sv(4) * sv(4) + sv(5) * sv(5))).epsilon(1e-12));
  double kept = 0;
  for (double x : t.singular_values) kept += x * x;
  CHECK(kept + t.discarded_weight * t.discarded_weight == doctest::Approx(m.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("dominant eigenpairs of diagonal maps") {
  auto diag_map = [](std::vector<double> d) {
    return [d](const VectorXc& in, VectorXc& out) {
      out = in;
      for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Eigen::Index>(i)) *= d[i];
    };
  };
  auto p = dominant_eigenpairs(diag_map({2, 1}), 2, 1, 1e-10, 1000, 1);
  CHECK(std::abs(p[0].value - 2.0) < 1e-12);
  CHECK(std::abs(std::abs(p[0].right_vector(0)) - 1.0) < 1e-12);
  auto q = dominant_eigenpairs(diag_map({3, 2, 1}), 3, 2, 1e-10, 1000, 1);
  CHECK(std::abs(q[0].value - 3.0) < 1e-12);
  CHECK(std::abs(q[1].value - 2.0) < 1e-12);
  CHECK_THROWS_AS(dominant_eigenpairs(diag_map({1, 1, 0.5}), 3, 1, 1e-10, 1000, 1), DegenerateError);
  CHECK_THROWS_AS(dominant_eigenpairs(diag_map({1, 0.5}), 2, 3, 1e-10, 1000, 1), DomainError);

  // Krylov path on a larger diagonal map
  std::vector<double> d(500);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 / (1.0 + 0.01 * i);
  auto k = dominant_eigenpairs(diag_map(d), 500, 2, 1e-10, 20000, 2);
  CHECK(std::abs(k[0].value - 1.0) < 1e-9);
  CHECK(std::abs(k[1].value - d[1]) < 1e-9);
  CHECK(k[0].residual <= 1e-10);
}

TEST_CASE("dominant eigenpairs against a dense eigensolver") {
  for (int n : {20, 120, 300}) {
    MatrixXc a = random_matrix(n, n, 900 + n);
    LinearMap map = [&](const VectorXc& in, VectorXc& out) { out = a * in; };
    Eigen::ComplexEigenSolver<MatrixXc> oracle(a, false);
    std::vector<Complex> ev(oracle.eigenvalues().data(), oracle.eigenvalues().data() + n);
    std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) { return std::abs(x) > std::abs(y); });
    EigenOptions opt;
    opt.count = 2;
    opt.dense_threshold = 0;
    opt.seed = 3;
    auto p = dominant_eigenpairs(map, n, opt);
    CHECK(std::abs(p[0].value - ev[0]) < 1e-8 * std::abs(ev[0]));
    CHECK(std::abs(p[1].value - ev[1]) < 1e-8 * std::abs(ev[0]));
    CHECK((a * p[0].right_vector - p[0].value * p[0].right_vector).norm() <= 1e-10 * std::abs(ev[0]));
    CHECK(std::abs(p[0].right_vector.norm() - 1.0) < 1e-12);

    auto dense = dense_eigenpairs(a, 1);
    CHECK(std::abs(dense[0].value - ev[0]) < 1e-10 * std::abs(ev[0]));
    CHECK(std::abs(dense[0].left_vector->dot(dense[0].right_vector) - 1.0) < 1e-8);
  }
}

TEST_CASE("iteration cap raises a convergence error") {
  const int n = 400;
  MatrixXc a = random_matrix(n, n, 77);
  LinearMap map = [&](const VectorXc& in, VectorXc& out) { out = a * in; };
  EigenOptions opt;
  opt.max_iter = 3;
  opt.dense_threshold = 0;
  CHECK_THROWS_AS(dominant_eigenpairs(map, n, opt), ConvergenceError);
}
