#include <algorithm>
#include <cmath>

#include "bmps_internal.hpp"
#include "pepslab/errors.hpp"

namespace pepslab {
namespace detail {

namespace {

std::vector<MatrixXc> split_matrices(const DenseTensor& b) {
  if (b.rank() != 3) throw DimensionError("boundary tensor must have rank 3");
  const auto rows = static_cast<Eigen::Index>(b.extent(1)), cols = static_cast<Eigen::Index>(b.extent(2));
  std::vector<MatrixXc> out;
  for (std::size_t a = 0; a < b.extent(0); ++a)
    out.emplace_back(Eigen::Map<const RowMatrixXc>(b.ptr() + a * b.extent(1) * b.extent(2), rows, cols));
  return out;
}

DenseTensor matrix_tensor(const MatrixXc& x, const Shape& shape) { return DenseTensor::from_matrix(x).reshaped(shape); }

}  // namespace

ExplicitSource::ExplicitSource(const DenseTensor& b) : mats_(split_matrices(b)), chi_(b.extent(1)) {
  if (b.extent(1) != b.extent(2)) throw DimensionError("uniform boundary tensor must be square in its bonds");
}

MatrixXc ExplicitSource::right(const MatrixXc& x) const {
  MatrixXc out = MatrixXc::Zero(x.rows(), x.cols());
  for (const auto& m : mats_) out.noalias() += m * x * m.adjoint();
  return out;
}

MatrixXc ExplicitSource::left(const MatrixXc& x) const {
  MatrixXc out = MatrixXc::Zero(x.rows(), x.cols());
  for (const auto& m : mats_) out.noalias() += m.adjoint() * x * m;
  return out;
}

DenseTensor ExplicitSource::project(const MatrixXc& pl, const MatrixXc& pr) const {
  DenseTensor out({mats_.size(), static_cast<std::size_t>(pl.rows()), static_cast<std::size_t>(pr.cols())});
  const std::size_t blk = static_cast<std::size_t>(pl.rows() * pr.cols());
  for (std::size_t a = 0; a < mats_.size(); ++a)
    Eigen::Map<RowMatrixXc>(out.ptr() + a * blk, pl.rows(), pr.cols()) = pl * mats_[a] * pr;
  return out;
}

RowSource::RowSource(const DenseTensor& b, const DoubleTensor& dt) {
  D_ = dt.D;
  dd_ = D_ * D_;
  chi_ = b.extent(1);
  if (b.rank() != 3 || b.extent(0) != dd_ || b.extent(2) != chi_)
    throw DimensionError("boundary physical extent does not match the double tensor");
  b4_ = b.reshaped({D_, D_, chi_, chi_});
  b4c_ = b4_.conj();
  bt4_ = b4_.permuted({0, 1, 3, 2});
  bt4c_ = bt4_.conj();
  bb_ = b4_.permuted({2, 0, 1, 3});
  bbt_ = bt4_.permuted({2, 0, 1, 3});
  k_ = dt.ket;
  kc_ = k_.conj();
  br_ = dt.bra;
  brc_ = br_.conj();
  km_ = k_.permuted({0, 3, 2, 1, 4});
  kmc_ = km_.conj();
  brm_ = br_.permuted({0, 3, 2, 1, 4});
  brmc_ = brm_.conj();
}

MatrixXc RowSource::right_impl(const DenseTensor& bb, const DenseTensor& b4c, const DenseTensor& k,
                               const DenseTensor& kc, const DenseTensor& br, const DenseTensor& brc,
                               const MatrixXc& x) const {
  const std::size_t c = chi_, D = D_;
  const std::size_t d = k.extent(0);
  const DenseTensor x6 = matrix_tensor(x, {c, D, D, c, D, D});
  const auto n = static_cast<Eigen::Index>(bond());
  MatrixXc out(n, n);
  // the row index b is a spectator of the whole chain, so blocks of it keep intermediates in cache
  const std::size_t per_row = d * c * D * D * D * D * D * D;
  const std::size_t block = std::max<std::size_t>(1, (std::size_t{1} << 16) / per_row);
  const std::size_t stride = D * D * c;
  for (std::size_t b0 = 0; b0 < c; b0 += block) {
    const std::size_t nb = std::min(block, c - b0);
    DenseTensor part({nb, D, D, c});
    std::copy(bb.ptr() + b0 * stride, bb.ptr() + (b0 + nb) * stride, part.ptr());
    // [b,uk,ub, rk,rb,g',rk',rb']
    DenseTensor t = contract(part, {3}, x6, {0});
    // [b,ub,rb,g',rk',rb', s,lk,dk]
    t = contract(t, {1, 3}, k, {2, 3});
    // [b,g',rk',rb',lk,dk, lb,db]
    t = contract(t, {6, 1, 2}, brc, {0, 2, 3});
    // [b,g',rb',lk,lb,db, s',lk',uk']
    t = contract(t, {2, 5}, kc, {3, 4});
    // [b,g',lk,lb,lk',uk', lb',ub']
    t = contract(t, {6, 2, 5}, br, {0, 3, 4});
    // [b,lk,lb,lk',lb', b']
    t = contract(t, {1, 5, 7}, b4c, {3, 0, 1});
    t = t.permuted({0, 1, 2, 5, 3, 4});
    const auto rows = static_cast<Eigen::Index>(nb * D * D);
    out.middleRows(static_cast<Eigen::Index>(b0 * D * D), rows) = Eigen::Map<const RowMatrixXc>(t.ptr(), rows, n);
  }
  return out;
}

MatrixXc RowSource::right(const MatrixXc& x) const { return right_impl(bb_, b4c_, k_, kc_, br_, brc_, x); }

MatrixXc RowSource::left(const MatrixXc& x) const {
  // left environment of B' is the transposed right environment of the mirrored row
  return right_impl(bbt_, bt4c_, km_, kmc_, brm_, brmc_, x.transpose()).transpose();
}

DenseTensor RowSource::project(const MatrixXc& pl, const MatrixXc& pr) const {
  const std::size_t c = chi_, D = D_;
  const auto a = static_cast<std::size_t>(pl.rows()), bcols = static_cast<std::size_t>(pr.cols());
  const DenseTensor pr4 = matrix_tensor(pr, {c, D, D, bcols});
  const DenseTensor pl4 = matrix_tensor(pl, {a, c, D, D});
  // [uk,ub,b, rk,rb,b2]
  DenseTensor t = contract(b4_, {3}, pr4, {0});
  // [ub,b,rb,b2, s,lk,dk]
  t = contract(t, {0, 3}, k_, {2, 3});
  // [b,b2,lk,dk, lb,db]
  t = contract(t, {4, 0, 2}, brc_, {0, 2, 3});
  // [a, b2, dk, db]
  t = contract(pl4, {1, 2, 3}, t, {0, 2, 4});
  return t.permuted({2, 3, 0, 1}).reshaped({dd_, a, bcols});
}

namespace {

struct HermitianFactor {
  MatrixXc vecs;
  Eigen::VectorXd vals;  // clipped at zero
  double lo_ratio = 0.0;
};

// Phase-fixed, Hermitized, positive-projected fixed point normalized to trace n.
HermitianFactor hermitian_fixed_point(const VectorXc& v, Eigen::Index n, MatrixXc& out) {
  MatrixXc x = Eigen::Map<const MatrixXc>(v.data(), n, n);
  Complex tr = x.trace();
  if (std::abs(tr) < 1e-300) tr = x.diagonal()(0);
  x *= std::conj(tr) / std::abs(tr);
  MatrixXc h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  HermitianFactor f;
  f.vecs = es.eigenvectors();
  f.vals = es.eigenvalues().cwiseMax(0.0);
  const double total = f.vals.sum();
  if (!(total > 0.0)) throw IllConditionedGaugeError("fixed point has no positive part");
  f.vals *= static_cast<double>(n) / total;
  const double mx = f.vals.maxCoeff();
  f.lo_ratio = f.vals.minCoeff() / mx;
  out = f.vecs * f.vals.asDiagonal() * f.vecs.adjoint();
  return f;
}

EigenPair solve_env(const TransferSource& src, bool left, const EngineOptions& opt, const VectorXc* warm,
                    Complex scale) {
  const auto n = static_cast<Eigen::Index>(src.bond());
  const Complex inv = 1.0 / scale;
  LinearMap map = [&](const VectorXc& in, VectorXc& out) {
    MatrixXc x = Eigen::Map<const MatrixXc>(in.data(), n, n);
    MatrixXc y = left ? src.left(x) : src.right(x);
    out = Eigen::Map<const VectorXc>(y.data(), n * n) * inv;
  };
  EigenOptions eo;
  eo.count = 1;
  eo.tol = opt.eig_tol;
  eo.max_iter = opt.eig_max_iter;
  eo.seed = opt.seed + (left ? 1 : 0);
  VectorXc start;
  if (warm && warm->size() == n * n) {
    eo.initial = warm;
  } else {
    // identity is a good generic start for positive maps
    start = Eigen::Map<const VectorXc>(MatrixXc::Identity(n, n).eval().data(), n * n);
    eo.initial = &start;
  }
  EigenPair p = dominant_eigenpairs(map, n * n, eo).front();
  p.value *= scale;
  p.residual *= std::abs(scale);
  return p;
}

}  // namespace

GaugePair gauges_of(const TransferSource& src, const EngineOptions& opt, EnvCache* cache) {
  const auto n = static_cast<Eigen::Index>(src.bond());
  const Complex scale = cache && std::abs(cache->scale) > 0.0 ? cache->scale : Complex(1.0);
  EigenPair er = solve_env(src, false, opt, cache ? &cache->right : nullptr, scale);
  EigenPair el = solve_env(src, true, opt, cache ? &cache->left : nullptr, scale);
  if (cache) {
    cache->right = er.right_vector;
    cache->left = el.right_vector;
    cache->scale = er.value;
  }
  GaugePair g;
  g.lambda = er.value;
  HermitianFactor fl = hermitian_fixed_point(el.right_vector, n, g.L);
  HermitianFactor fr = hermitian_fixed_point(er.right_vector, n, g.R);
  g.conditioning_M = std::sqrt(fl.lo_ratio);
  g.conditioning_P = std::sqrt(fr.lo_ratio);
  if (opt.strict_gauge && (fl.lo_ratio < 1e-12 || fr.lo_ratio < 1e-12))
    throw IllConditionedGaugeError("fixed-point matrix has eigenvalues below 1e-12 of its maximum");

  const Eigen::VectorXd sl = fl.vals.cwiseSqrt(), sr = fr.vals.cwiseSqrt();
  Eigen::VectorXd il(n), ir(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    il(i) = sl(i) > 1e-12 * sl.maxCoeff() ? 1.0 / sl(i) : 0.0;
    ir(i) = sr(i) > 1e-12 * sr.maxCoeff() ? 1.0 / sr(i) : 0.0;
  }
  g.M = sl.asDiagonal() * fl.vecs.adjoint();
  g.M_pinv = fl.vecs * il.asDiagonal();
  g.P = fr.vecs * sr.asDiagonal();
  g.P_pinv = ir.asDiagonal() * fr.vecs.adjoint();
  return g;
}

TruncationResult truncate_source(const TransferSource& src, std::size_t chi, const EngineOptions& opt,
                                 EnvCache* cache) {
  if (chi < 1) throw DomainError("truncate: chi must be at least 1");
  GaugePair g = gauges_of(src, opt, cache);
  const MatrixXc mp = g.M * g.P;
  SvdResult svd = svd_truncate(mp, chi);
  const std::vector<double>& s = svd.singular_values;
  double total = 0.0;
  for (double v : s) total += v * v;
  total += svd.discarded_weight * svd.discarded_weight;
  if (!(total > 0.0)) throw IllConditionedGaugeError("gauge product has no weight");

  // numerically zero singular values carry no state and are dropped
  std::size_t keep = 0;
  while (keep < s.size() && s[keep] > 1e-13 * s[0]) ++keep;
  double disc2 = svd.discarded_weight * svd.discarded_weight;
  for (std::size_t i = keep; i < s.size(); ++i) disc2 += s[i] * s[i];
  const auto k = static_cast<Eigen::Index>(keep);

  Eigen::VectorXd is(k);
  for (Eigen::Index i = 0; i < k; ++i) is(i) = 1.0 / std::sqrt(s[static_cast<std::size_t>(i)]);
  const MatrixXc u = svd.left_vectors.leftCols(k);
  const MatrixXc v = svd.right_vectors_conj.topRows(k).adjoint();
  // S^{1/2} V^dag P^+ = S^{-1/2} U^dag M P P^+ and M^+ U S^{1/2} = M^+ M P V S^{-1/2}
  const MatrixXc pl = is.asDiagonal() * (u.adjoint() * g.M * (g.P * g.P_pinv));
  const MatrixXc pr = (g.M_pinv * g.M * g.P) * v * is.asDiagonal();

  TruncationResult out;
  out.bmps.B = src.project(pl, pr);
  out.bmps.B *= Complex(1.0 / std::sqrt(std::abs(g.lambda)));
  out.bmps = normalized(out.bmps, opt);
  // retained values are renormalized; the discarded weight is relative to the full spectrum
  double kept2 = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept2 += s[i] * s[i];
  for (std::size_t i = 0; i < keep; ++i) out.schmidt.push_back(s[i] / std::sqrt(kept2));
  out.discarded_weight = std::sqrt(disc2 / total);
  out.bmps.schmidt = out.schmidt;
  return out;
}

std::vector<EigenPair> mixed_transfer_pairs(const DenseTensor& b1, const DenseTensor& b2, int count,
                                            const EngineOptions& opt) {
  if (b1.extent(0) != b2.extent(0)) throw DimensionError("boundary tensors differ in physical extent");
  const auto m1 = split_matrices(b1), m2 = split_matrices(b2);
  const auto r = static_cast<Eigen::Index>(b1.extent(1)), c = static_cast<Eigen::Index>(b2.extent(1));
  LinearMap map = [&](const VectorXc& in, VectorXc& out) {
    Eigen::Map<const MatrixXc> x(in.data(), r, c);
    MatrixXc y = MatrixXc::Zero(r, c);
    for (std::size_t a = 0; a < m1.size(); ++a) y.noalias() += m1[a] * x * m2[a].adjoint();
    out = Eigen::Map<const VectorXc>(y.data(), r * c);
  };
  EigenOptions eo;
  eo.count = count;
  eo.tol = opt.eig_tol;
  eo.max_iter = opt.eig_max_iter;
  eo.seed = opt.seed + 7;
  VectorXc start = VectorXc::Zero(r * c);
  for (Eigen::Index i = 0; i < std::min(r, c); ++i) start(i * r + i) = 1.0;
  eo.initial = &start;
  return dominant_eigenpairs(map, r * c, eo);
}

}  // namespace detail

BoundaryMps init_boundary(const DoubleTensor& dt) {
  BoundaryMps b;
  // [l, r, d] -> [d, l, r]
  b.B = dt.tensor.slice(1, 0).permuted({2, 0, 1});
  return b;
}

BoundaryMps apply_row(const BoundaryMps& b, const DoubleTensor& dt) {
  const std::size_t dd = dt.D * dt.D;
  if (b.phys() != dd) throw DimensionError("apply_row: physical extent mismatch");
  const std::size_t c = b.chi();
  // [b,g, l,r,d] -> [d, b,l, g,r]
  DenseTensor t = contract(b.B, {0}, dt.tensor, {1}).permuted({4, 0, 2, 1, 3});
  BoundaryMps out;
  out.B = t.reshaped({dd, c * dd, c * dd});
  return out;
}

GaugePair find_gauges(const BoundaryMps& b, const EngineOptions& opt) {
  detail::ExplicitSource src(b.B);
  return detail::gauges_of(src, opt, nullptr);
}

TruncationResult truncate(const BoundaryMps& b, std::size_t chi, const EngineOptions& opt) {
  if (chi < 1) throw DomainError("truncate: chi must be at least 1");
  detail::ExplicitSource src(b.B);
  return detail::truncate_source(src, chi, opt, nullptr);
}

TruncationResult truncate_row(const BoundaryMps& b, const DoubleTensor& dt, std::size_t chi,
                              const EngineOptions& opt) {
  if (chi < 1) throw DomainError("truncate: chi must be at least 1");
  detail::RowSource src(b.B, dt);
  return detail::truncate_source(src, chi, opt, nullptr);
}

Complex transfer_eigenvalue(const BoundaryMps& b, const EngineOptions& opt) {
  return detail::mixed_transfer_pairs(b.B, b.B, 1, opt).front().value;
}

BoundaryMps normalized(const BoundaryMps& b, const EngineOptions& opt) {
  const Complex lam = transfer_eigenvalue(b, opt);
  BoundaryMps out = b;
  out.B *= Complex(1.0 / std::sqrt(std::abs(lam)));
  return out;
}

}  // namespace pepslab
