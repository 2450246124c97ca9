#include "pepslab/random_peps.hpp"

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

PepsTensor PepsTensor::from_tensor(DenseTensor t) {
  if (t.rank() != 5) throw InvalidShapeError("PEPS tensor must have rank 5");
  const std::size_t D = t.extent(1);
  for (std::size_t i = 2; i < 5; ++i)
    if (t.extent(i) != D) throw InvalidShapeError("PEPS bond legs must share one extent");
  PepsTensor p;
  p.d = t.extent(0);
  p.D = D;
  p.tensor = std::move(t);
  return p;
}

PepsTensor sample_clean(std::size_t D, std::size_t d, std::uint64_t seed) {
  if (D < 1 || d < 1) throw InvalidShapeError("D and d must be positive");
  return PepsTensor::from_tensor(gaussian_tensor({d, D, D, D, D}, seed));
}

PepsLattice uniform_lattice(std::size_t Lx, std::size_t Ly, const PepsTensor& t, Boundary boundary) {
  if (Lx < 1 || Ly < 1) throw InvalidShapeError("lattice extents must be positive");
  PepsLattice lat;
  lat.Lx = Lx;
  lat.Ly = Ly;
  lat.boundary = boundary;
  lat.tensors.assign(Lx * Ly, t);
  return lat;
}

PepsLattice sample_disordered(std::size_t Lx, std::size_t Ly, std::size_t D, std::size_t d, std::uint64_t seed,
                              Boundary boundary) {
  if (Lx < 1 || Ly < 1) throw InvalidShapeError("lattice extents must be positive");
  if (D < 1 || d < 1) throw InvalidShapeError("D and d must be positive");
  PepsLattice lat;
  lat.Lx = Lx;
  lat.Ly = Ly;
  lat.boundary = boundary;
  lat.tensors.reserve(Lx * Ly);
  for (std::size_t r = 0; r < Lx * Ly; ++r)
    lat.tensors.push_back(PepsTensor::from_tensor(gaussian_tensor({d, D, D, D, D}, derive_seed(seed, r))));
  return lat;
}

PepsTensor perturb(const PepsTensor& t, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  if (eta == 0.0) return t;
  DenseTensor g = gaussian_tensor(t.tensor.shape(), seed);
  DenseTensor out = Complex(1.0 - eta) * t.tensor;
  out += Complex(eta) * g;
  return PepsTensor::from_tensor(std::move(out));
}

PepsLattice perturb(const PepsLattice& lat, double eta, std::uint64_t seed) {
  PepsLattice out = lat;
  for (std::size_t r = 0; r < lat.tensors.size(); ++r) out.tensors[r] = perturb(lat.tensors[r], eta, derive_seed(seed, r));
  return out;
}

DenseTensor apply_physical(const DenseTensor& t, const MatrixXc& op) {
  const std::size_t d = t.extent(0);
  if (static_cast<std::size_t>(op.rows()) != d || static_cast<std::size_t>(op.cols()) != d)
    throw DimensionError("operator must be d x d");
  DenseTensor o = DenseTensor::from_matrix(op);
  return contract(o, {1}, t, {0});
}

DenseTensor build_double_open(const DenseTensor& ket, const DenseTensor& bra) {
  if (ket.rank() != 5 || bra.rank() != 5 || ket.extent(0) != bra.extent(0))
    throw DimensionError("ket and bra tensors must be rank 5 with equal physical extent");
  // [s, lk,uk,rk,dk, s', lb,ub,rb,db] -> [s, s', lk,lb, uk,ub, rk,rb, dk,db]
  DenseTensor o = outer(ket, bra.conj()).permuted({0, 5, 1, 6, 2, 7, 3, 8, 4, 9});
  const std::size_t d = ket.extent(0);
  return o.reshaped({d, d, ket.extent(1) * bra.extent(1), ket.extent(2) * bra.extent(2), ket.extent(3) * bra.extent(3),
                     ket.extent(4) * bra.extent(4)});
}

DenseTensor build_double(const DenseTensor& ket, const DenseTensor& bra) {
  if (ket.rank() != 5 || bra.rank() != 5 || ket.extent(0) != bra.extent(0))
    throw DimensionError("ket and bra tensors must be rank 5 with equal physical extent");
  DenseTensor e = contract(ket, {0}, bra.conj(), {0}).permuted({0, 4, 1, 5, 2, 6, 3, 7});
  return e.reshaped({ket.extent(1) * bra.extent(1), ket.extent(2) * bra.extent(2), ket.extent(3) * bra.extent(3),
                     ket.extent(4) * bra.extent(4)});
}

DoubleTensor double_tensor(const PepsTensor& t, const PepsTensor* other, const MatrixXc* op) {
  const PepsTensor& b = other ? *other : t;
  if (b.d != t.d || b.D != t.D) throw DimensionError("double_tensor: tensors differ in (d, D)");
  DoubleTensor dt;
  dt.D = t.D;
  dt.ket = op ? apply_physical(t.tensor, *op) : t.tensor;
  dt.bra = b.tensor;
  dt.positive_flag = (other == nullptr || other->tensor == t.tensor) && op == nullptr;
  dt.tensor = build_double(dt.ket, dt.bra);
  return dt;
}

namespace {
DoubleTensor relabel(const DoubleTensor& dt, const Axes& peps_perm, const Axes& dbl_perm) {
  DoubleTensor out;
  out.D = dt.D;
  out.positive_flag = dt.positive_flag;
  out.ket = dt.ket.permuted(peps_perm);
  out.bra = dt.bra.permuted(peps_perm);
  out.tensor = dt.tensor.permuted(dbl_perm);
  return out;
}
}  // namespace

DoubleTensor reflect_vertical(const DoubleTensor& dt) { return relabel(dt, {0, 1, 4, 3, 2}, {0, 3, 2, 1}); }

DoubleTensor reflect_horizontal(const DoubleTensor& dt) { return relabel(dt, {0, 3, 2, 1, 4}, {2, 1, 0, 3}); }

}  // namespace pepslab
