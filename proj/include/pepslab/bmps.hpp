#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pepslab/dense_tensor.hpp"
#include "pepslab/linalg.hpp"
#include "pepslab/random_peps.hpp"

namespace pepslab {

// Translation-invariant boundary MPS, tensor B[alpha, beta, gamma] with
// alpha the doubled physical leg and beta/gamma the left/right bonds.
struct BoundaryMps {
  DenseTensor B;
  std::vector<double> schmidt;  // empty when unknown

  std::size_t chi() const { return B.extent(1); }
  std::size_t phys() const { return B.extent(0); }
};

struct GaugePair {
  MatrixXc M, P;            // L = M^dagger M, R = P P^dagger
  MatrixXc M_pinv, P_pinv;  // pseudo-inverses, relative cutoff 1e-12
  MatrixXc L, R;            // dominant left/right fixed points, trace chi each
  double conditioning_M = 0.0, conditioning_P = 0.0;  // smallest / largest singular value
  Complex lambda = 0.0;     // dominant eigenvalue of the self-transfer
};

struct TruncationResult {
  BoundaryMps bmps;
  std::vector<double> schmidt;
  double discarded_weight = 0.0;  // sqrt of the dropped squared weight, relative to the full spectrum
};

struct EngineOptions {
  double eig_tol = 1e-10;
  long eig_max_iter = 20000;
  std::uint64_t seed = 0;
  // true: eigenvalues of L or R below 1e-12 * max raise IllConditionedGaugeError.
  bool strict_gauge = false;
};

struct FixedPointOptions {
  double fidelity_tol = 1e-10;
  double spectrum_tol = 1e-8;
  int max_iter = 2000;
  EngineOptions engine;
  // Optional starting boundary; the default starts from init_boundary.
  const BoundaryMps* initial = nullptr;
};

struct FixedPointResult {
  BoundaryMps bmps;
  int iterations = 0;
  std::vector<double> fidelity_history;  // |1 - |F_s|| per iteration
  std::vector<double> schmidt;
};

// Dangling up leg fixed to index 0.
BoundaryMps init_boundary(const DoubleTensor& dt);
// Exact row application, chi -> chi * D^2.
BoundaryMps apply_row(const BoundaryMps& b, const DoubleTensor& dt);

GaugePair find_gauges(const BoundaryMps& b, const EngineOptions& opt = {});
TruncationResult truncate(const BoundaryMps& b, std::size_t chi, const EngineOptions& opt = {});
// truncate(apply_row(b, dt), chi) without forming the enlarged tensor.
TruncationResult truncate_row(const BoundaryMps& b, const DoubleTensor& dt, std::size_t chi,
                              const EngineOptions& opt = {});

FixedPointResult fixed_point(const DoubleTensor& dt, std::size_t chi, const FixedPointOptions& opt = {});

// Dominant eigenvalue of the self-transfer sum_a B_a (.) B_a^dagger.
Complex transfer_eigenvalue(const BoundaryMps& b, const EngineOptions& opt = {});
// Divides B by sqrt(lambda_1).
BoundaryMps normalized(const BoundaryMps& b, const EngineOptions& opt = {});

Complex fidelity_per_site(const BoundaryMps& b1, const BoundaryMps& b2, const EngineOptions& opt = {});
double correlation_length(const BoundaryMps& b, const EngineOptions& opt = {});
double renyi_entropy(const std::vector<double>& schmidt, double n);

// Single-site (region = 1) or two-site (region = 2) density matrix.
MatrixXc reduced_density_matrix(const FixedPointResult& top, const FixedPointResult& bottom, const DoubleTensor& dt,
                                int region, const EngineOptions& opt = {});
double delta_rho(const MatrixXc& rho, const MatrixXc& ref);

// ---- finite lattices (open boundaries, dangling legs fixed to index 0) ----

struct FiniteBoundaryMps {
  std::vector<DenseTensor> sites;  // [phys, left, right]
  double log_scale = 0.0;          // state = exp(log_scale) * phase * contraction
  Complex phase = 1.0;
  std::vector<double> cut_schmidt;  // normalized spectrum at the recorded cut
};

// A ket/bra pair of lattices; bra == nullptr means the norm network.
struct FiniteNetwork {
  const PepsLattice* ket = nullptr;
  const PepsLattice* bra = nullptr;
  const PepsLattice& bra_lattice() const { return bra ? *bra : *ket; }
};

struct FiniteOptions {
  std::size_t chi = 16;
  // bond index whose Schmidt values are recorded, default Lx / 2
  std::optional<std::size_t> cut;
};

// Doubled row tensors [l, u, r, d] for row y; flags slice the top/bottom legs.
std::vector<DenseTensor> finite_row(const FiniteNetwork& net, std::size_t y, bool slice_up, bool slice_down,
                                    bool reflect = false);

FiniteBoundaryMps finite_first_row(const std::vector<DenseTensor>& row);
FiniteBoundaryMps finite_apply_row(const FiniteBoundaryMps& b, const std::vector<DenseTensor>& row);
// Left-to-right QR sweep, then right-to-left truncating SVD sweep.
FiniteBoundaryMps finite_truncate(const FiniteBoundaryMps& b, const FiniteOptions& opt);

std::vector<double> finite_entropy_profile(const FiniteNetwork& net, const FiniteOptions& opt);
std::vector<double> finite_entropy_profile(const PepsLattice& lattice, std::size_t chi,
                                           std::optional<std::size_t> cut = std::nullopt);

struct LogScalar {
  double log_abs = 0.0;
  Complex phase = 1.0;
};
LogScalar finite_norm(const FiniteNetwork& net, std::size_t chi);
MatrixXc finite_reduced_density_matrix(const FiniteNetwork& net, std::size_t chi, std::size_t x, std::size_t y);

}  // namespace pepslab
