#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pepslab/dense_tensor.hpp"

namespace pepslab {

struct SvdResult {
  MatrixXc left_vectors;           // U, columns orthonormal
  std::vector<double> singular_values;
  MatrixXc right_vectors_conj;     // V^dagger, rows orthonormal
  double discarded_weight = 0.0;   // sqrt of the sum of discarded sigma^2
};

// Keeps the min(chi, rank bound) largest singular triplets. Each left vector
// is rotated so its largest-modulus entry (first one on ties) is real and
// positive, which makes the factorization unique for a simple spectrum.
SvdResult svd_truncate(const MatrixXc& m, std::size_t chi);
SvdResult svd_truncate(const DenseTensor& m, std::size_t chi);

struct EigenPair {
  Complex value;
  VectorXc right_vector;
  std::optional<VectorXc> left_vector;
  double residual = 0.0;
};

using LinearMap = std::function<void(const VectorXc& in, VectorXc& out)>;

struct EigenOptions {
  int count = 1;
  double tol = 1e-10;
  // maximum number of map applications
  long max_iter = 20000;
  std::uint64_t seed = 0;
  // optional start vector (warm start)
  const VectorXc* initial = nullptr;
  int krylov_dim = 0;
  // maps of at most this dimension are solved densely
  long dense_threshold = 48;
};

// Dominant eigenpairs by modulus. Convergence means
// ||A v - lambda v|| <= tol * max(1, |lambda_1|) for unit v.
std::vector<EigenPair> dominant_eigenpairs(const LinearMap& apply, long dim, const EigenOptions& opt);
std::vector<EigenPair> dominant_eigenpairs(const LinearMap& apply, long dim, int count, double tol, long max_iter,
                                           std::uint64_t seed);

// Full dense eigendecomposition, sorted by descending modulus (ties: larger
// imaginary part first). Left vectors normalized so that l^H r = 1.
std::vector<EigenPair> dense_eigenpairs(const MatrixXc& a, int count);

// Orders two eigenvalues: descending modulus, then descending imaginary part.
bool eigen_order(const Complex& a, const Complex& b);

}  // namespace pepslab
