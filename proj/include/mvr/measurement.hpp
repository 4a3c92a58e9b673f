#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mvr/karcher.hpp"
#include "mvr/signal.hpp"

namespace mvr {

enum class KernelShape { Gaussian, Triangular, MovingAverage };

/// Convolution kernel description. `support` is the (odd) number of taps per
/// axis; 2D kernels are separable products of the 1D profile.
struct KernelSpec {
  KernelShape shape = KernelShape::Gaussian;
  int support = 7;
  int dims = 1;
  double sigma = 1.0;  // Gaussian only

  void validate() const;
};

/// Sparse row-indexed measurement matrix with unit row sums. Entries may be
/// negative; every row must sum to one.
struct MeasurementMatrix {
  using Row = std::vector<std::pair<int, double>>;
  std::vector<Row> rows;
  int n_cols = 0;

  int n_rows() const { return static_cast<int>(rows.size()); }
  void validate() const;
};

/// Normalized 1D kernel tap weights, symmetric about the center.
std::vector<double> kernel_weights(const KernelSpec& spec);

/// Convolution matrix acting on signals with the given shape. Boundary rows
/// are truncated and renormalized to keep unit row sums.
MeasurementMatrix conv_matrix(const KernelSpec& spec,
                              const std::vector<int>& signal_shape);

MeasurementMatrix identity_matrix(int n);

/// The manifold analogue of the matrix-vector product: entry i is the
/// weighted Riemannian mean of u under row i. When `anchor` is given, means
/// with ties are resolved toward the corresponding anchor entry.
Signal apply(const MeasurementMatrix& A, const Signal& u,
             const Signal* anchor = nullptr, const MeanOptions& opts = {});

/// Mean of a single row, exposed for per-row gradient computations.
ManifoldPoint apply_row(const MeasurementMatrix& A, int row, const Signal& u,
                        const ManifoldPoint* anchor = nullptr,
                        const MeanOptions& opts = {});

}  // namespace mvr
