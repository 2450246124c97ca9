#include "pepslab/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

void DenseTensor::index_error(const char* what) { throw DimensionError(what); }

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

namespace {

void check_shape(const Shape& shape) {
  for (auto e : shape)
    if (e == 0) throw InvalidShapeError("tensor extent must be positive");
}

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), Complex(0.0));
}

DenseTensor::DenseTensor(Shape shape, std::vector<Complex> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_)) throw InvalidShapeError("data length does not match shape");
}

DenseTensor DenseTensor::scalar(Complex v) { return DenseTensor({}, {v}); }

DenseTensor DenseTensor::from_matrix(const MatrixXc& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrixXc>(t.ptr(), m.rows(), m.cols()) = m;
  return t;
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) throw InvalidShapeError("reshape changes size");
  return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::permuted(const Axes& perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw DimensionError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw DimensionError("invalid permutation");
    seen[p] = true;
  }
  bool identity = true;
  for (std::size_t i = 0; i < r; ++i) identity = identity && perm[i] == i;
  if (identity) return *this;

  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = shape_[perm[i]];
  DenseTensor out(out_shape);
  if (data_.empty()) return out;

  // fuse runs of output axes that are also adjacent, in order, on the input side
  const auto in_strides = strides_of(shape_);
  std::vector<std::size_t> ext, stride;
  for (std::size_t i = 0; i < r; ++i) {
    if (shape_[perm[i]] == 1) continue;
    if (!ext.empty() && stride.back() == in_strides[perm[i]] * shape_[perm[i]]) {
      ext.back() *= shape_[perm[i]];
      stride.back() = in_strides[perm[i]];
    } else {
      ext.push_back(shape_[perm[i]]);
      stride.push_back(in_strides[perm[i]]);
    }
  }
  const Complex* in = ptr();
  Complex* dst = out.ptr();
  const std::size_t n = data_.size();
  if (ext.size() <= 1) {
    std::copy(in, in + n, dst);
    return out;
  }
  const std::size_t q = ext.size();
  const std::size_t inner = ext[q - 1];
  const std::size_t inner_stride = stride[q - 1];
  std::vector<std::size_t> counter(q, 0);
  std::size_t src = 0;
  for (std::size_t done = 0; done < n; done += inner) {
    const Complex* s = in + src;
    if (inner_stride == 1)
      std::copy(s, s + inner, dst);
    else
      for (std::size_t j = 0; j < inner; ++j) dst[j] = s[j * inner_stride];
    dst += inner;
    for (std::size_t ax = q - 1; ax-- > 0;) {
      ++counter[ax];
      src += stride[ax];
      if (counter[ax] < ext[ax]) break;
      src -= stride[ax] * counter[ax];
      counter[ax] = 0;
    }
  }
  return out;
}

DenseTensor DenseTensor::conj() const {
  DenseTensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

DenseTensor DenseTensor::slice(std::size_t axis, std::size_t index) const {
  if (axis >= rank()) throw DimensionError("slice axis out of range");
  if (index >= shape_[axis]) throw DimensionError("slice index out of range");
  std::size_t outer_n = 1, inner_n = 1;
  for (std::size_t i = 0; i < axis; ++i) outer_n *= shape_[i];
  for (std::size_t i = axis + 1; i < rank(); ++i) inner_n *= shape_[i];
  Shape s = shape_;
  s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
  DenseTensor out(s);
  for (std::size_t o = 0; o < outer_n; ++o) {
    const Complex* src = ptr() + (o * shape_[axis] + index) * inner_n;
    std::copy(src, src + inner_n, out.ptr() + o * inner_n);
  }
  return out;
}

MatrixXc DenseTensor::matrix(std::size_t row_axes) const {
  if (row_axes > rank()) throw DimensionError("row axis count exceeds rank");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  const std::size_t cols = data_.size() / rows;
  return Eigen::Map<const RowMatrixXc>(ptr(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatrixXc DenseTensor::to_matrix() const {
  if (rank() != 2) throw DimensionError("to_matrix needs a rank-2 tensor");
  return matrix(1);
}

double DenseTensor::norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

DenseTensor& DenseTensor::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
  if (o.shape_ != shape_) throw DimensionError("shape mismatch in addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
  if (o.shape_ != shape_) throw DimensionError("shape mismatch in subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseTensor gaussian_tensor(const Shape& shape, std::uint64_t seed) {
  DenseTensor t(shape);
  Rng rng(seed);
  for (auto& v : t.data()) v = rng.complex_normal();
  return t;
}

DenseTensor contract(const DenseTensor& a, const Axes& axes_a, const DenseTensor& b, const Axes& axes_b) {
  if (axes_a.size() != axes_b.size()) throw DimensionError("contract: axis lists differ in length");
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  std::size_t k = 1;
  for (std::size_t i = 0; i < axes_a.size(); ++i) {
    const auto ia = axes_a[i], ib = axes_b[i];
    if (ia >= a.rank() || ib >= b.rank()) throw DimensionError("contract: axis out of range");
    if (used_a[ia] || used_b[ib]) throw DimensionError("contract: duplicate axis");
    used_a[ia] = used_b[ib] = true;
    if (a.extent(ia) != b.extent(ib))
      throw DimensionError("contract: extent mismatch on axes " + std::to_string(ia) + "/" + std::to_string(ib));
    k *= a.extent(ia);
  }
  Axes perm_a, perm_b;
  Shape out_shape;
  std::size_t m = 1, n = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      perm_a.push_back(i);
      out_shape.push_back(a.extent(i));
      m *= a.extent(i);
    }
  perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
  perm_b = axes_b;
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      perm_b.push_back(i);
      out_shape.push_back(b.extent(i));
      n *= b.extent(i);
    }
  using Idx = Eigen::Index;
  auto in_order = [](const Axes& axes, std::size_t first) {
    for (std::size_t i = 0; i < axes.size(); ++i)
      if (axes[i] != first + i) return false;
    return true;
  };
  // operands already laid out as (k x m) or (n x k) are used through a transposed view
  const bool a_direct = in_order(perm_a, 0);
  const bool a_trans = !a_direct && in_order(axes_a, 0);
  const bool b_direct = in_order(perm_b, 0);
  const bool b_trans = !b_direct && in_order(axes_b, b.rank() - axes_b.size());
  DenseTensor ap, bp;
  if (!a_direct && !a_trans) ap = a.permuted(perm_a);
  if (!b_direct && !b_trans) bp = b.permuted(perm_b);
  const Complex* pa = a_direct || a_trans ? a.ptr() : ap.ptr();
  const Complex* pb = b_direct || b_trans ? b.ptr() : bp.ptr();
  const auto M = static_cast<Idx>(m), K = static_cast<Idx>(k), N = static_cast<Idx>(n);

  DenseTensor out(out_shape);
  Eigen::Map<RowMatrixXc> om(out.ptr(), M, N);
  if (out.size() == 0) return out;
  if (K == 0) {
    om.setZero();
    return out;
  }
  using CMap = Eigen::Map<const RowMatrixXc>;
  if (a_trans && b_trans)
    om.noalias() = CMap(pa, K, M).transpose() * CMap(pb, N, K).transpose();
  else if (a_trans)
    om.noalias() = CMap(pa, K, M).transpose() * CMap(pb, K, N);
  else if (b_trans)
    om.noalias() = CMap(pa, M, K) * CMap(pb, N, K).transpose();
  else
    om.noalias() = CMap(pa, M, K) * CMap(pb, K, N);
  return out;
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) { return contract(a, {}, b, {}); }

DenseTensor contract_network(std::vector<LabeledTensor> ts, const std::vector<int>& open) {
  if (ts.empty()) throw DimensionError("contract_network: empty network");
  for (const auto& t : ts) {
    if (t.labels.size() != t.tensor.rank()) throw DimensionError("contract_network: label count mismatch");
    std::vector<int> l = t.labels;
    std::sort(l.begin(), l.end());
    if (std::adjacent_find(l.begin(), l.end()) != l.end())
      throw DimensionError("contract_network: repeated label within a tensor");
  }
  auto pair_cost = [&](const LabeledTensor& x, const LabeledTensor& y, bool& shares) {
    double sz = 1.0;
    shares = false;
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
      bool in_y = std::find(y.labels.begin(), y.labels.end(), x.labels[i]) != y.labels.end();
      shares = shares || in_y;
      if (!in_y) sz *= static_cast<double>(x.tensor.extent(i));
    }
    for (std::size_t i = 0; i < y.labels.size(); ++i)
      if (std::find(x.labels.begin(), x.labels.end(), y.labels[i]) == x.labels.end())
        sz *= static_cast<double>(y.tensor.extent(i));
    return sz;
  };
  while (ts.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    bool best_shares = false;
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        bool shares;
        double c = pair_cost(ts[i], ts[j], shares);
        // prefer pairs that share a leg, then the smallest result
        if (best < 0 || (shares && !best_shares) || (shares == best_shares && c < best)) {
          best = c;
          best_shares = shares;
          bi = i;
          bj = j;
        }
      }
    LabeledTensor& x = ts[bi];
    LabeledTensor& y = ts[bj];
    Axes ax, ay;
    std::vector<int> out_labels;
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
      auto it = std::find(y.labels.begin(), y.labels.end(), x.labels[i]);
      if (it != y.labels.end()) {
        ax.push_back(i);
        ay.push_back(static_cast<std::size_t>(it - y.labels.begin()));
      } else {
        out_labels.push_back(x.labels[i]);
      }
    }
    for (std::size_t i = 0; i < y.labels.size(); ++i)
      if (std::find(x.labels.begin(), x.labels.end(), y.labels[i]) == x.labels.end()) out_labels.push_back(y.labels[i]);
    LabeledTensor merged{contract(x.tensor, ax, y.tensor, ay), out_labels};
    ts.erase(ts.begin() + static_cast<std::ptrdiff_t>(bj));
    ts[bi] = std::move(merged);
  }
  auto& last = ts.front();
  if (last.labels.size() != open.size()) throw DimensionError("contract_network: open labels do not match result");
  Axes perm;
  for (int l : open) {
    auto it = std::find(last.labels.begin(), last.labels.end(), l);
    if (it == last.labels.end()) throw DimensionError("contract_network: unknown open label");
    perm.push_back(static_cast<std::size_t>(it - last.labels.begin()));
  }
  return last.tensor.permuted(perm);
}

}  // namespace pepslab
