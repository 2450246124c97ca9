#pragma once

#include "pepslab/bmps.hpp"

namespace pepslab::detail {

// Something whose self-transfer can be applied: an explicit uniform MPS or
// the unmaterialized product of an MPS with a row of double tensors.
class TransferSource {
 public:
  virtual ~TransferSource() = default;
  virtual std::size_t bond() const = 0;
  virtual std::size_t phys() const = 0;
  // sum_a B_a X B_a^dagger
  virtual MatrixXc right(const MatrixXc& x) const = 0;
  // sum_a B_a^dagger X B_a
  virtual MatrixXc left(const MatrixXc& x) const = 0;
  // tensor [a, rows(pl), cols(pr)] with entries (pl B_a pr)
  virtual DenseTensor project(const MatrixXc& pl, const MatrixXc& pr) const = 0;
};

class ExplicitSource : public TransferSource {
 public:
  explicit ExplicitSource(const DenseTensor& b);
  std::size_t bond() const override { return chi_; }
  std::size_t phys() const override { return mats_.size(); }
  MatrixXc right(const MatrixXc& x) const override;
  MatrixXc left(const MatrixXc& x) const override;
  DenseTensor project(const MatrixXc& pl, const MatrixXc& pr) const override;

 private:
  std::vector<MatrixXc> mats_;
  std::size_t chi_;
};

class RowSource : public TransferSource {
 public:
  RowSource(const DenseTensor& b, const DoubleTensor& dt);
  std::size_t bond() const override { return chi_ * dd_; }
  std::size_t phys() const override { return dd_; }
  MatrixXc right(const MatrixXc& x) const override;
  MatrixXc left(const MatrixXc& x) const override;
  DenseTensor project(const MatrixXc& pl, const MatrixXc& pr) const override;

 private:
  // bb is the boundary tensor ordered [b, uk, ub, g]
  MatrixXc right_impl(const DenseTensor& bb, const DenseTensor& b4c, const DenseTensor& k, const DenseTensor& kc,
                      const DenseTensor& br, const DenseTensor& brc, const MatrixXc& x) const;
  std::size_t chi_, D_, dd_;
  DenseTensor b4_, b4c_, bt4_, bt4c_, bb_, bbt_;
  DenseTensor k_, kc_, br_, brc_;      // ket, conj(ket), bra, conj(bra)
  DenseTensor km_, kmc_, brm_, brmc_;  // left-right mirrored copies
};

struct EnvCache {
  VectorXc left, right;
  // last dominant eigenvalue, used to rescale the next solve to order one
  Complex scale{1.0, 0.0};
};

GaugePair gauges_of(const TransferSource& src, const EngineOptions& opt, EnvCache* cache);
TruncationResult truncate_source(const TransferSource& src, std::size_t chi, const EngineOptions& opt,
                                 EnvCache* cache);

// Dominant eigenpair of X -> sum_a B1_a X B2_a^dagger.
std::vector<EigenPair> mixed_transfer_pairs(const DenseTensor& b1, const DenseTensor& b2, int count,
                                            const EngineOptions& opt);

}  // namespace pepslab::detail
