#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pepslab/dense_tensor.hpp"

namespace pepslab {

// Index order (s, left, up, right, down).
struct PepsTensor {
  DenseTensor tensor;
  std::size_t d = 1;
  std::size_t D = 1;

  static PepsTensor from_tensor(DenseTensor t);
};

enum class Boundary { Open, PeriodicX };

struct PepsLattice {
  std::size_t Lx = 0, Ly = 0;
  std::vector<PepsTensor> tensors;  // site r = y * Lx + x
  Boundary boundary = Boundary::Open;

  const PepsTensor& at(std::size_t x, std::size_t y) const { return tensors.at(y * Lx + x); }
  std::size_t d() const { return tensors.front().d; }
  std::size_t D() const { return tensors.front().D; }
};

// E[(lk,lb),(uk,ub),(rk,rb),(dk,db)] = sum_s ket[s,lk,uk,rk,dk] * conj(bra[s,lb,ub,rb,db]),
// each doubled leg flattened as ket * D + bra. `ket` already carries the
// operator, if any.
struct DoubleTensor {
  DenseTensor tensor;
  DenseTensor ket;
  DenseTensor bra;
  std::size_t D = 1;
  bool positive_flag = false;
};

PepsTensor sample_clean(std::size_t D, std::size_t d, std::uint64_t seed);
PepsLattice sample_disordered(std::size_t Lx, std::size_t Ly, std::size_t D, std::size_t d, std::uint64_t seed,
                              Boundary boundary = Boundary::Open);
PepsLattice uniform_lattice(std::size_t Lx, std::size_t Ly, const PepsTensor& t, Boundary boundary = Boundary::Open);

// (1 - eta) T + eta G with G drawn from `seed`.
PepsTensor perturb(const PepsTensor& t, double eta, std::uint64_t seed);
// Site r is perturbed with the stream derive_seed(seed, r).
PepsLattice perturb(const PepsLattice& lat, double eta, std::uint64_t seed);

DoubleTensor double_tensor(const PepsTensor& t, const PepsTensor* other = nullptr, const MatrixXc* op = nullptr);
inline DoubleTensor double_tensor(const PepsTensor& t, const PepsTensor& other) { return double_tensor(t, &other); }

// Doubled tensor for arbitrary per-leg extents of ket/bra (used for sliced
// boundary tensors). Shape of the result: [l, u, r, d] doubled extents.
DenseTensor build_double(const DenseTensor& ket, const DenseTensor& bra);
// Same with the physical legs left open: [s, s', l, u, r, d].
DenseTensor build_double_open(const DenseTensor& ket, const DenseTensor& bra);

// Swaps the up and down legs.
DoubleTensor reflect_vertical(const DoubleTensor& dt);
// Swaps the left and right legs.
DoubleTensor reflect_horizontal(const DoubleTensor& dt);

// Applies a d x d matrix on the physical leg.
DenseTensor apply_physical(const DenseTensor& t, const MatrixXc& op);

}  // namespace pepslab
