#include <cmath>
#include <limits>

#include "bmps_internal.hpp"
#include "pepslab/errors.hpp"

namespace pepslab {

Complex fidelity_per_site(const BoundaryMps& b1, const BoundaryMps& b2, const EngineOptions& opt) {
  if (b1.phys() != b2.phys()) throw DimensionError("fidelity_per_site: physical extents differ");
  const Complex l12 = detail::mixed_transfer_pairs(b1.B, b2.B, 1, opt).front().value;
  const Complex l11 = detail::mixed_transfer_pairs(b1.B, b1.B, 1, opt).front().value;
  const Complex l22 = detail::mixed_transfer_pairs(b2.B, b2.B, 1, opt).front().value;
  return l12 / std::sqrt(std::abs(l11) * std::abs(l22));
}

double correlation_length(const BoundaryMps& b, const EngineOptions& opt) {
  if (b.chi() == 1) return 0.0;
  auto pairs = detail::mixed_transfer_pairs(b.B, b.B, 2, opt);
  if (pairs.size() < 2) return 0.0;
  const double ratio = std::abs(pairs[1].value) / std::abs(pairs[0].value);
  if (ratio == 0.0) return 0.0;
  if (ratio >= 1.0 - 1e-12) throw DegenerateError("correlation_length: degenerate dominant eigenvalue");
  return -1.0 / std::log(ratio);
}

double renyi_entropy(const std::vector<double>& schmidt, double n) {
  if (!(n >= 0.0)) throw DomainError("Renyi index must be non-negative");
  if (n == 0.0) {
    std::size_t c = 0;
    for (double s : schmidt) c += s != 0.0;
    return c == 0 ? 0.0 : std::log(static_cast<double>(c));
  }
  if (n == 1.0) {
    double h = 0.0;
    for (double s : schmidt) {
      const double p = s * s;
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }
  double acc = 0.0;
  for (double s : schmidt) {
    const double p = s * s;
    if (p > 0.0) acc += std::pow(p, n);
  }
  return std::log(acc) / (1.0 - n);
}

double delta_rho(const MatrixXc& rho, const MatrixXc& ref) {
  if (rho.rows() != ref.rows() || rho.cols() != ref.cols() || rho.rows() != rho.cols())
    throw DimensionError("delta_rho: dimension mismatch");
  const MatrixXc diff = rho - ref;
  const MatrixXc h = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

DenseTensor vec_tensor(const VectorXc& v, const Shape& shape) {
  return DenseTensor(shape, std::vector<Complex>(v.data(), v.data() + v.size()));
}

VectorXc tensor_vec(const DenseTensor& t) { return Eigen::Map<const VectorXc>(t.ptr(), static_cast<Eigen::Index>(t.size())); }

}  // namespace

MatrixXc reduced_density_matrix(const FixedPointResult& top, const FixedPointResult& bottom, const DoubleTensor& dt,
                                int region, const EngineOptions& opt) {
  if (region != 1 && region != 2) throw DomainError("region must cover 1 or 2 sites");
  const DenseTensor& bt = top.bmps.B;
  const DenseTensor& bb = bottom.bmps.B;
  const std::size_t dd = dt.D * dt.D;
  if (bt.extent(0) != dd || bb.extent(0) != dd) throw DimensionError("fixed points do not match the double tensor");
  const std::size_t ct = bt.extent(1), cb = bb.extent(1);
  const Shape env_shape{ct, dd, cb};
  const auto dim = static_cast<long>(ct * dd * cb);
  const DenseTensor& e = dt.tensor;

  LinearMap right = [&](const VectorXc& in, VectorXc& out) {
    DenseTensor x = vec_tensor(in, env_shape);
    DenseTensor t = contract(bt, {2}, x, {0});   // [u,a,r,b']
    t = contract(t, {0, 2}, e, {1, 2});           // [a,b',l,d]
    t = contract(t, {3, 1}, bb, {0, 2});          // [a,l,b]
    out = tensor_vec(t);
  };
  LinearMap left = [&](const VectorXc& in, VectorXc& out) {
    DenseTensor z = vec_tensor(in, env_shape);
    DenseTensor t = contract(z, {0}, bt, {1});    // [l,b,u,a']
    t = contract(t, {0, 2}, e, {0, 1});           // [b,a',r,d]
    t = contract(t, {0, 3}, bb, {1, 0});          // [a',r,b']
    out = tensor_vec(t);
  };
  EigenOptions eo;
  eo.tol = opt.eig_tol;
  eo.max_iter = opt.eig_max_iter;
  eo.seed = opt.seed + 11;
  const DenseTensor xr = vec_tensor(dominant_eigenpairs(right, dim, eo).front().right_vector, env_shape);
  eo.seed = opt.seed + 13;
  const DenseTensor zl = vec_tensor(dominant_eigenpairs(left, dim, eo).front().right_vector, env_shape);

  const DenseTensor eo_open = build_double_open(dt.ket, dt.bra);
  const std::size_t d = dt.ket.extent(0);
  DenseTensor t = contract(zl, {0}, bt, {1});     // [l,b,u,a']
  t = contract(t, {0, 2}, eo_open, {2, 3});       // [b,a',s,s',r,d]
  t = contract(t, {0, 5}, bb, {1, 0});            // [a',s,s',r,b']
  MatrixXc rho;
  if (region == 1) {
    rho = contract(t, {0, 3, 4}, xr, {0, 1, 2}).to_matrix();
  } else {
    DenseTensor v = contract(t, {0}, bt, {1});    // [s1,s1',r,b',u,a'']
    v = contract(v, {2, 4}, eo_open, {2, 3});     // [s1,s1',b',a'',s2,s2',r2,d]
    v = contract(v, {2, 7}, bb, {1, 0});          // [s1,s1',a'',s2,s2',r2,b'']
    v = contract(v, {2, 5, 6}, xr, {0, 1, 2});    // [s1,s1',s2,s2']
    rho = v.permuted({0, 2, 1, 3}).reshaped({d * d, d * d}).to_matrix();
  }
  const Complex tr = rho.trace();
  if (!(std::abs(tr) > 1e-12 * rho.norm()) || !std::isfinite(std::abs(tr)))
    throw Error("reduced_density_matrix: environment norm vanishes");
  rho /= tr;
  return rho;
}

}  // namespace pepslab
