#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "roadrl/error.hpp"

namespace roadrl {

/// Dense row-major array of 64-bit reals. Used for observations, Q-value
/// grids, weights and gradients alike.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::initializer_list<int> s) : shape(s) { data.assign(count(shape), 0.0); }
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) { data.assign(count(shape), 0.0); }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t size() const { return data.size(); }
  double* begin() { return data.data(); }
  double* end() { return data.data() + data.size(); }
  const double* begin() const { return data.data(); }
  const double* end() const { return data.data() + data.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  int dim(int k) const { return shape[static_cast<std::size_t>(k)]; }

  /// Element access for 2-d tensors.
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

}  // namespace roadrl
