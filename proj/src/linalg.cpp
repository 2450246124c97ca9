#include "pepslab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

SvdResult svd_truncate(const MatrixXc& m, std::size_t chi) {
  if (chi < 1) throw DomainError("svd_truncate: chi must be at least 1");
  if (m.rows() == 0 || m.cols() == 0) throw InvalidShapeError("svd_truncate: empty matrix");
  Eigen::BDCSVD<MatrixXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Eigen::Index full = s.size();
  const Eigen::Index keep = std::min<Eigen::Index>(full, static_cast<Eigen::Index>(chi));

  SvdResult r;
  r.left_vectors = svd.matrixU().leftCols(keep);
  MatrixXc v = svd.matrixV().leftCols(keep);
  r.singular_values.resize(static_cast<std::size_t>(keep));
  for (Eigen::Index i = 0; i < keep; ++i) {
    r.singular_values[static_cast<std::size_t>(i)] = s(i);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index k = 0; k < r.left_vectors.rows(); ++k) {
      double a = std::abs(r.left_vectors(k, i));
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        arg = k;
      }
    }
    if (best > 0.0) {
      const Complex ph = std::conj(r.left_vectors(arg, i)) / best;
      r.left_vectors.col(i) *= ph;
      v.col(i) *= ph;
    }
  }
  r.right_vectors_conj = v.adjoint();
  double disc = 0.0;
  for (Eigen::Index i = keep; i < full; ++i) disc += s(i) * s(i);
  r.discarded_weight = std::sqrt(disc);
  return r;
}

SvdResult svd_truncate(const DenseTensor& m, std::size_t chi) {
  if (m.rank() != 2) throw DimensionError("svd_truncate expects a rank-2 tensor");
  return svd_truncate(m.to_matrix(), chi);
}

bool eigen_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  return a.imag() > b.imag();
}

namespace {

void check_count(int count) {
  if (count != 1 && count != 2) throw DomainError("eigenpair count must be 1 or 2");
}

void check_degenerate(const Complex& l1, const Complex& l2) {
  const double a1 = std::abs(l1);
  if (a1 - std::abs(l2) < 1e-12 * a1) throw DegenerateError("dominant eigenvalue is degenerate in modulus");
}

// Moves T(i+1,i+1) above T(i,i) in a complex Schur form, updating Z.
void swap_adjacent(MatrixXc& T, MatrixXc& Z, Eigen::Index i) {
  Eigen::Vector2cd x(T(i, i + 1), T(i + 1, i + 1) - T(i, i));
  const double nx = x.norm();
  if (nx == 0.0) return;
  x /= nx;
  Eigen::Matrix2cd G;
  G.col(0) = x;
  G(0, 1) = -std::conj(x(1));
  G(1, 1) = std::conj(x(0));
  T.middleRows(i, 2) = G.adjoint() * T.middleRows(i, 2);
  T.middleCols(i, 2) = T.middleCols(i, 2) * G;
  Z.middleCols(i, 2) = Z.middleCols(i, 2) * G;
  T(i + 1, i) = 0.0;
}

void sort_schur(MatrixXc& T, MatrixXc& Z, Eigen::Index upto) {
  const Eigen::Index s = T.rows();
  for (Eigen::Index p = 0; p < std::min(upto, s); ++p) {
    Eigen::Index q = p;
    for (Eigen::Index k = p + 1; k < s; ++k)
      if (eigen_order(T(k, k), T(q, q))) q = k;
    for (Eigen::Index i = q; i-- > p;) swap_adjacent(T, Z, i);
  }
}

void orthonormalize_against(const MatrixXc& V, Eigen::Index cols, VectorXc& w) {
  for (int pass = 0; pass < 2; ++pass) {
    VectorXc h = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * h;
  }
}

VectorXc random_vector(Rng& rng, long n) {
  VectorXc v(n);
  for (long i = 0; i < n; ++i) v(i) = rng.complex_normal();
  return v;
}

std::vector<EigenPair> dense_path(const LinearMap& apply, long n, const EigenOptions& opt) {
  MatrixXc a(n, n);
  VectorXc e = VectorXc::Zero(n), col(n);
  for (long i = 0; i < n; ++i) {
    e(i) = 1.0;
    apply(e, col);
    a.col(i) = col;
    e(i) = 0.0;
  }
  auto pairs = dense_eigenpairs(a, std::min<int>(opt.count, static_cast<int>(n)));
  if (opt.count == 1 && n > 1) {
    auto all = dense_eigenpairs(a, 2);
    check_degenerate(all[0].value, all[1].value);
  }
  return pairs;
}

}  // namespace

std::vector<EigenPair> dense_eigenpairs(const MatrixXc& a, int count) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || n == 0) throw DimensionError("dense_eigenpairs: matrix must be square and non-empty");
  Eigen::ComplexEigenSolver<MatrixXc> es(a, true);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", NAN);
  const auto& vals = es.eigenvalues();
  MatrixXc vecs = es.eigenvectors();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return eigen_order(vals(x), vals(y)); });
  // rows of inv(vecs) are the dual (left) vectors
  Eigen::PartialPivLU<MatrixXc> lu(vecs);
  MatrixXc dual = lu.inverse();
  std::vector<EigenPair> out;
  for (int k = 0; k < std::min<Eigen::Index>(count, n); ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    EigenPair p;
    p.value = vals(i);
    const double nr = vecs.col(i).norm();
    p.right_vector = vecs.col(i) / nr;
    p.left_vector = VectorXc(dual.row(i).adjoint() / nr);
    p.residual = (a * p.right_vector - p.value * p.right_vector).norm();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<EigenPair> dominant_eigenpairs(const LinearMap& apply, long dim, int count, double tol, long max_iter,
                                           std::uint64_t seed) {
  EigenOptions opt;
  opt.count = count;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.seed = seed;
  return dominant_eigenpairs(apply, dim, opt);
}

std::vector<EigenPair> dominant_eigenpairs(const LinearMap& apply, long n, const EigenOptions& opt) {
  check_count(opt.count);
  if (!(opt.tol > 0.0)) throw DomainError("eigen tolerance must be positive");
  if (n < 1) throw DimensionError("eigen problem dimension must be positive");
  if (n <= opt.dense_threshold) return dense_path(apply, n, opt);

  const int count = opt.count;
  const Eigen::Index m = std::min<Eigen::Index>(n, opt.krylov_dim > 0 ? opt.krylov_dim : std::max(20, 4 * count + 12));
  const Eigen::Index keep = std::max<Eigen::Index>(count + 1, std::min<Eigen::Index>(m - 4, count + 8));
  Rng rng(opt.seed, 0xE16E);

  MatrixXc V = MatrixXc::Zero(n, m + 1);
  MatrixXc H = MatrixXc::Zero(m + 1, m);
  VectorXc v0 = opt.initial ? *opt.initial : random_vector(rng, n);
  if (v0.size() != n) throw DimensionError("initial vector has wrong length");
  if (v0.norm() == 0.0 || !std::isfinite(v0.norm())) v0 = random_vector(rng, n);
  V.col(0) = v0 / v0.norm();

  long matvecs = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  VectorXc w(n);
  Eigen::Index j = 0;

  MatrixXc T, Z;
  auto schur_at = [&](Eigen::Index s) {
    Eigen::ComplexSchur<MatrixXc> cs(H.topLeftCorner(s, s), true);
    T = cs.matrixT();
    Z = cs.matrixU();
    sort_schur(T, Z, std::max<Eigen::Index>(keep, count + 1));
  };

  // Tries to finish with the current basis of size s. Returns true on success.
  std::vector<EigenPair> result;
  auto try_finish = [&](Eigen::Index s) -> bool {
    schur_at(s);
    const Eigen::Index c = std::min<Eigen::Index>(count, s);
    const VectorXc r = H.row(s).head(s).transpose();
    std::vector<VectorXc> ys;
    std::vector<double> est;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(s, 2); ++i) {
      VectorXc y = VectorXc::Zero(s);
      y(i) = 1.0;
      if (i == 1) {
        const Complex den = T(0, 0) - T(1, 1);
        y(0) = den == Complex(0.0) ? Complex(0.0) : -T(0, 1) / den;
      }
      VectorXc hy = Z.leftCols(i + 1) * y.head(i + 1);
      hy /= hy.norm();
      est.push_back(std::abs((r.array() * hy.array()).sum()));
      ys.push_back(std::move(hy));
    }
    const double scale = std::max(1.0, std::abs(T(0, 0)));
    const double tol = opt.tol * scale;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < c; ++i) worst = std::max(worst, est[static_cast<std::size_t>(i)]);
    history.push_back(worst);
    if (worst > 0.5 * tol && s < n) return false;
    std::vector<EigenPair> out;
    double true_worst = 0.0;
    for (Eigen::Index i = 0; i < c; ++i) {
      EigenPair p;
      p.value = T(i, i);
      VectorXc x = V.leftCols(s) * ys[static_cast<std::size_t>(i)];
      x /= x.norm();
      apply(x, w);
      ++matvecs;
      p.residual = (w - p.value * x).norm();
      true_worst = std::max(true_worst, p.residual);
      p.right_vector = std::move(x);
      out.push_back(std::move(p));
    }
    best = std::min(best, true_worst);
    if (true_worst > tol) return false;
    if (count == 1 && s >= 2 && est[1] <= tol) check_degenerate(T(0, 0), T(1, 1));
    result = std::move(out);
    return true;
  };

  while (true) {
    bool complete = false;
    for (; j < m; ++j) {
      apply(V.col(j), w);
      ++matvecs;
      VectorXc h = V.leftCols(j + 1).adjoint() * w;
      w.noalias() -= V.leftCols(j + 1) * h;
      VectorXc h2 = V.leftCols(j + 1).adjoint() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      h += h2;
      H.col(j).head(j + 1) = h;
      const double beta = w.norm();
      if (beta <= 1e-13 * std::max(h.norm(), 1e-300)) {
        H(j + 1, j) = 0.0;
        if (j + 1 >= n) {
          complete = true;
          ++j;
          break;
        }
        VectorXc v = random_vector(rng, n);
        orthonormalize_against(V, j + 1, v);
        V.col(j + 1) = v / v.norm();
      } else {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
      }
      if (j + 1 >= count + 1 && try_finish(j + 1)) return result;
      if (matvecs >= opt.max_iter) throw ConvergenceError("Krylov eigensolver did not converge", best, history);
    }
    if (complete) {
      if (try_finish(j)) return result;
      throw ConvergenceError("Krylov eigensolver failed on a complete basis", best, history);
    }
    if (matvecs >= opt.max_iter) throw ConvergenceError("Krylov eigensolver did not converge", best, history);

    // thick restart on the leading Schur vectors
    schur_at(m);
    const VectorXc r = H.row(m).head(m).transpose();
    MatrixXc Vk = V.leftCols(m) * Z.leftCols(keep);
    VectorXc vlast = V.col(m);
    V.leftCols(keep) = Vk;
    V.col(keep) = vlast;
    H.setZero();
    H.topLeftCorner(keep, keep) = T.topLeftCorner(keep, keep);
    H.row(keep).head(keep) = (r.transpose() * Z.leftCols(keep));
    j = keep;
  }
}

}  // namespace pepslab
