#include "robustkit/tensor.hpp"

#include <cmath>
#include <cstring>

#include "robustkit/error.hpp"

namespace robustkit {

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
  if (shape_numel(shape) != data.size()) {
    throw ContractError("tensor: shape " + shape_str() + " does not match " +
                        std::to_string(data.size()) + " elements");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::zeros_like(const Tensor& t) { return zeros(t.shape); }

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

double Tensor::scalar_value() const {
  if (data.size() != 1) {
    throw ContractError("tensor: scalar_value() on shape " + shape_str());
  }
  return data[0];
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ContractError("tensor: rows() on shape " + shape_str());
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ContractError("tensor: cols() on shape " + shape_str());
  return shape[1];
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) return false;
  if (a.data.size() != b.data.size()) return false;
  if (a.data.empty()) return true;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

std::size_t argmax_lowest(const Tensor& t) {
  if (t.data.empty()) throw ContractError("argmax of an empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.data.size(); ++i) {
    if (t.data[i] > t.data[best]) best = i;
  }
  return best;
}

}  // namespace robustkit
