#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace pepslab {

using Complex = std::complex<double>;
using Shape = std::vector<std::size_t>;
using Axes = std::vector<std::size_t>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using RowMatrixXc = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-major complex array. The last index runs fastest.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<Complex> data);

  static DenseTensor scalar(Complex v);
  // Copies a matrix into a rank-2 tensor.
  static DenseTensor from_matrix(const MatrixXc& m);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }
  const Complex* ptr() const { return data_.data(); }
  Complex* ptr() { return data_.data(); }

  Complex& operator()(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
  const Complex& operator()(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }
  Complex& at(std::span<const std::size_t> idx) { return data_[offset(idx)]; }
  const Complex& at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }

  DenseTensor reshaped(Shape shape) const;
  DenseTensor permuted(const Axes& perm) const;
  DenseTensor conj() const;
  // Fixes one axis to a value and drops it.
  DenseTensor slice(std::size_t axis, std::size_t index) const;

  // Rows are the leading `row_axes` indices, flattened row-major.
  MatrixXc matrix(std::size_t row_axes) const;
  MatrixXc to_matrix() const;

  double norm() const;
  double max_abs() const;
  bool all_finite() const;

  DenseTensor& operator*=(Complex s);
  DenseTensor& operator+=(const DenseTensor& o);
  DenseTensor& operator-=(const DenseTensor& o);
  friend DenseTensor operator*(Complex s, DenseTensor t) { return t *= s; }
  friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
  friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }

  bool operator==(const DenseTensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

 private:
  [[noreturn]] static void index_error(const char* what);

  template <class Idx>
  std::size_t offset(const Idx& idx) const {
    if (idx.size() != shape_.size()) index_error("index rank mismatch");
    std::size_t off = 0, k = 0;
    for (auto i : idx) {
      if (i >= shape_[k]) index_error("index out of range");
      off = off * shape_[k] + i;
      ++k;
    }
    return off;
  }

  Shape shape_;
  std::vector<Complex> data_;
};

std::size_t shape_size(const Shape& shape);

// Entries are complex standard normal, drawn in row-major order from the
// stream of `seed`.
DenseTensor gaussian_tensor(const Shape& shape, std::uint64_t seed);

// Sums over paired axes. Output axes: free axes of a, then free axes of b.
DenseTensor contract(const DenseTensor& a, const Axes& axes_a, const DenseTensor& b, const Axes& axes_b);

// Outer product, axes of a then b.
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

// A small network of tensors with integer leg labels. contract_network sums
// every label that appears twice and returns the open legs in `open` order.
struct LabeledTensor {
  DenseTensor tensor;
  std::vector<int> labels;
};
DenseTensor contract_network(std::vector<LabeledTensor> tensors, const std::vector<int>& open);

}  // namespace pepslab
