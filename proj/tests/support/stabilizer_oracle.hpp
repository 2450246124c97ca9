#pragma once

// Dense state-vector references for qudit stabilizer states. Qudit 0 is the
// most significant digit of a basis index.

#include <cmath>
#include <numbers>
#include <vector>

#include "pepslab/dense_tensor.hpp"
#include "pepslab/rng.hpp"
#include "pepslab/stabilizer.hpp"

namespace oracle {

using namespace pepslab;

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

inline Complex phase_factor(int p, long c) {
  const int K = p == 2 ? 4 : p;
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(c) / K);
}

inline std::vector<int> digits(std::size_t idx, int p, std::size_t n) {
  std::vector<int> d(n);
  for (std::size_t q = n; q-- > 0;) {
    d[q] = static_cast<int>(idx % static_cast<std::size_t>(p));
    idx /= static_cast<std::size_t>(p);
  }
  return d;
}

inline std::size_t index_of(const std::vector<int>& d, int p) {
  std::size_t idx = 0;
  for (int v : d) idx = idx * static_cast<std::size_t>(p) + static_cast<std::size_t>(v);
  return idx;
}

// g v with X|s> = |s+1>, Z|s> = omega^s |s>, omega = exp(2 pi i / p).
inline VectorXc act(const QuditPauli& g, const VectorXc& v) {
  const int p = g.p;
  const std::size_t n = g.size();
  VectorXc out = VectorXc::Zero(v.size());
  for (std::size_t s = 0; s < static_cast<std::size_t>(v.size()); ++s) {
    if (v(static_cast<Eigen::Index>(s)) == Complex(0.0)) continue;
    auto d = digits(s, p, n);
    long zs = 0;
    for (std::size_t q = 0; q < n; ++q) {
      zs += static_cast<long>(g.z[q]) * d[q];
      d[q] = (d[q] + g.x[q]) % p;
    }
    const Complex w = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(zs % p) / p);
    out(static_cast<Eigen::Index>(index_of(d, p))) += phase_factor(p, g.phase) * w * v(static_cast<Eigen::Index>(s));
  }
  return out;
}

inline MatrixXc matrix(const QuditPauli& g) {
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(g.p), g.size()));
  MatrixXc m(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) m.col(c) = act(g, VectorXc::Unit(dim, c));
  return m;
}

// Projector onto the +1 eigenspace of g, (1/p) sum_m g^m, applied to v.
// Requires g^p = I, which holds for every element of a consistent group.
inline VectorXc project(const QuditPauli& g, const VectorXc& v) {
  VectorXc acc = v, cur = v;
  for (int m = 1; m < g.p; ++m) {
    cur = act(g, cur);
    acc += cur;
  }
  return acc / static_cast<double>(g.p);
}

inline VectorXc random_vector(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  VectorXc v(static_cast<Eigen::Index>(dim));
  for (auto& c : v) c = rng.complex_normal();
  return v;
}

// Normalized state of a pure tableau.
inline VectorXc state(const StabilizerTableau& t, std::uint64_t seed = 7) {
  VectorXc v = random_vector(ipow(static_cast<std::size_t>(t.p()), t.n_qudits()), seed);
  for (std::size_t k = 0; k < t.n_generators(); ++k) v = project(t.generator(k), v);
  return v / v.norm();
}

// Trace-normalized density matrix prod_k P_k (mixed tableaux too).
inline MatrixXc density(const StabilizerTableau& t) {
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(t.p()), t.n_qudits()));
  MatrixXc rho(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    VectorXc v = VectorXc::Unit(dim, c);
    for (std::size_t k = 0; k < t.n_generators(); ++k) v = project(t.generator(k), v);
    rho.col(c) = v;
  }
  return rho / rho.trace();
}

// 1 - |<a|b>| for normalized vectors.
inline double phase_distance(const VectorXc& a, const VectorXc& b) { return std::abs(1.0 - std::abs(a.dot(b))); }

inline DenseTensor as_tensor(const VectorXc& v, int p, std::size_t n) {
  return DenseTensor(Shape(n, static_cast<std::size_t>(p)), std::vector<Complex>(v.data(), v.data() + v.size()));
}

// Sum over the paired indices of a and b; open qudits of a, then of b.
inline VectorXc contract_vectors(const VectorXc& a, std::size_t na, const VectorXc& b, std::size_t nb, int p,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<int> la(na), lb(nb);
  for (std::size_t q = 0; q < na; ++q) la[q] = static_cast<int>(q);
  for (std::size_t q = 0; q < nb; ++q) lb[q] = static_cast<int>(1000 + q);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    la[pairs[i].first] = static_cast<int>(5000 + i);
    lb[pairs[i].second] = static_cast<int>(5000 + i);
  }
  std::vector<int> open;
  for (int l : la)
    if (l < 5000) open.push_back(l);
  for (int l : lb)
    if (l < 5000) open.push_back(l);
  std::vector<LabeledTensor> net;
  if (na > 0) net.push_back({as_tensor(a, p, na), la});
  else net.push_back({DenseTensor::scalar(a(0)), {}});
  if (nb > 0) net.push_back({as_tensor(b, p, nb), lb});
  else net.push_back({DenseTensor::scalar(b(0)), {}});
  DenseTensor r = contract_network(net, open);
  return Eigen::Map<const VectorXc>(r.ptr(), static_cast<Eigen::Index>(r.size()));
}

// Singular values of the pure state split as region | rest.
inline Eigen::VectorXd schmidt_values(const VectorXc& v, int p, std::size_t n, const std::vector<std::size_t>& region) {
  std::vector<char> in(n, 0);
  for (std::size_t q : region) in[q] = 1;
  Axes perm(region.begin(), region.end());
  for (std::size_t q = 0; q < n; ++q)
    if (!in[q]) perm.push_back(q);
  const MatrixXc m = as_tensor(v, p, n).permuted(perm).matrix(region.size());
  return Eigen::JacobiSVD<MatrixXc>(m).singularValues();
}

inline std::size_t numerical_rank(const Eigen::VectorXd& s, double tol = 1e-9) {
  std::size_t r = 0;
  for (double v : s)
    if (v > tol * s(0)) ++r;
  return r;
}

}  // namespace oracle
