#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace robustkit {

// Dense n-dimensional array of 64-bit reals, row-major. The universal numeric
// value of the toolkit. requires_grad marks the tensor as a differentiable
// leaf when it enters a Tape; it has no effect outside one.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;
  // Checks product(shape) == data.size().
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor zeros_like(const Tensor& t);
  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return data.size() == 1 && shape.size() <= 1; }
  double scalar_value() const;  // ContractError unless size() == 1

  std::size_t rows() const;  // rank-2 only
  std::size_t cols() const;

  double operator()(std::size_t i) const { return data[i]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  Tensor& set_requires_grad(bool flag) {
    requires_grad = flag;
    return *this;
  }

  // "[2x3]" style, for error messages.
  std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
bool same_shape(const Tensor& a, const Tensor& b);
bool bitwise_equal(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);

double l2_norm(const Tensor& t);
std::size_t argmax_lowest(const Tensor& t);  // ties resolve to the lowest index

}  // namespace robustkit
