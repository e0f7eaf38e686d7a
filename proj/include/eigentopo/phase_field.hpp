// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace eigentopo {

/// Nodal N-vector field, one vector per mesh vertex, stored node-major.
///
/// Used for the design variable phi as well as for directions h and for
/// gradient fields (which share the same shape).
class PhaseField
{
public:
  PhaseField() = default;
  PhaseField(int n_nodes, int n_phases, double value = 0.0)
      : n_nodes_(n_nodes), n_phases_(n_phases),
        data_(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_phases), value)
  {
    if (n_nodes < 0 || n_phases < 1)
    {
      throw std::invalid_argument("phase field: bad dimensions");
    }
  }

  /// Every node set to the same vector.
  static PhaseField uniform(int n_nodes, std::span<const double> value)
  {
    PhaseField f(n_nodes, static_cast<int>(value.size()));
    for (int v = 0; v < n_nodes; ++v)
    {
      for (std::size_t i = 0; i < value.size(); ++i)
      {
        f(v, static_cast<int>(i)) = value[i];
      }
    }
    return f;
  }

  [[nodiscard]] int n_nodes() const { return n_nodes_; }
  [[nodiscard]] int n_phases() const { return n_phases_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  double& operator()(int node, int phase) { return data_[index(node, phase)]; }
  double operator()(int node, int phase) const { return data_[index(node, phase)]; }

  [[nodiscard]] std::span<double> node(int v)
  {
    return {data_.data() + index(v, 0), static_cast<std::size_t>(n_phases_)};
  }
  [[nodiscard]] std::span<const double> node(int v) const
  {
    return {data_.data() + index(v, 0), static_cast<std::size_t>(n_phases_)};
  }

  [[nodiscard]] std::span<double> values() { return data_; }
  [[nodiscard]] std::span<const double> values() const { return data_; }

  [[nodiscard]] bool same_shape(const PhaseField& other) const
  {
    return n_nodes_ == other.n_nodes_ && n_phases_ == other.n_phases_;
  }

  PhaseField& operator+=(const PhaseField& o)
  {
    check_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k)
    {
      data_[k] += o.data_[k];
    }
    return *this;
  }
  PhaseField& operator-=(const PhaseField& o)
  {
    check_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k)
    {
      data_[k] -= o.data_[k];
    }
    return *this;
  }
  PhaseField& operator*=(double s)
  {
    for (double& x : data_)
    {
      x *= s;
    }
    return *this;
  }

  friend PhaseField operator+(PhaseField a, const PhaseField& b) { return a += b; }
  friend PhaseField operator-(PhaseField a, const PhaseField& b) { return a -= b; }
  friend PhaseField operator*(double s, PhaseField a) { return a *= s; }

  /// Plain Euclidean dot product over all entries (duality pairing of a
  /// nodal gradient with a nodal direction).
  [[nodiscard]] double dot(const PhaseField& o) const
  {
    check_shape(o);
    double s = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k)
    {
      s += data_[k] * o.data_[k];
    }
    return s;
  }

  [[nodiscard]] double max_abs() const
  {
    double m = 0.0;
    for (double x : data_)
    {
      m = std::max(m, x < 0 ? -x : x);
    }
    return m;
  }

private:
  [[nodiscard]] std::size_t index(int node, int phase) const
  {
    return static_cast<std::size_t>(node) * static_cast<std::size_t>(n_phases_) + static_cast<std::size_t>(phase);
  }
  void check_shape(const PhaseField& o) const
  {
    if (!same_shape(o))
    {
      throw std::invalid_argument("phase field: shape mismatch");
    }
  }

  int n_nodes_ = 0;
  int n_phases_ = 1;
  std::vector<double> data_;
};

inline double dot(const PhaseField& a, const PhaseField& b) { return a.dot(b); }

}  // namespace eigentopo
