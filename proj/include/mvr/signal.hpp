#pragma once

#include <vector>

#include "mvr/manifold.hpp"

namespace mvr {

/// Rectangular array (1D or 2D) of points sharing one manifold.
/// 2D signals are stored row-major with shape = {rows, cols}.
struct Signal {
  ManifoldKind kind;
  std::vector<int> shape;  // size 1 or 2
  std::vector<ManifoldPoint> data;

  int size() const { return static_cast<int>(data.size()); }
  bool is_2d() const { return shape.size() == 2; }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() == 2 ? shape[1] : 1; }

  int index(int r, int c) const { return r * cols() + c; }
  const ManifoldPoint& at(int r, int c) const { return data[index(r, c)]; }
  ManifoldPoint& at(int r, int c) { return data[index(r, c)]; }

  void validate() const {
    long long n = 1;
    if (shape.empty() || shape.size() > 2)
      throw InvalidValue("signal shape must be 1D or 2D");
    for (int s : shape) {
      if (s <= 0) throw InvalidValue("signal shape entries must be positive");
      n *= s;
    }
    if (n != static_cast<long long>(data.size()))
      throw InvalidValue("signal data length does not match shape");
    for (const auto& p : data)
      if (p.kind != kind) throw KindMismatch("signal mixes manifold kinds");
  }
};

inline Signal constant_signal(const ManifoldKind& kind, std::vector<int> shape,
                              const ManifoldPoint& value) {
  Signal s;
  s.kind = kind;
  s.shape = std::move(shape);
  long long n = 1;
  for (int d : s.shape) n *= d;
  s.data.assign(static_cast<std::size_t>(n), value);
  return s;
}

}  // namespace mvr
