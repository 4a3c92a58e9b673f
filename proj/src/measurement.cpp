#include "mvr/measurement.hpp"

#include <cmath>
#include <string>

namespace mvr {

namespace {

std::vector<double> profile_1d(const KernelSpec& spec) {
  const int h = (spec.support - 1) / 2;
  std::vector<double> w(spec.support);
  double s = 0.0;
  for (int k = -h; k <= h; ++k) {
    double v = 0.0;
    switch (spec.shape) {
      case KernelShape::Gaussian:
        v = std::exp(-0.5 * k * k / (spec.sigma * spec.sigma));
        break;
      case KernelShape::Triangular:
        v = static_cast<double>(h + 1 - std::abs(k));
        break;
      case KernelShape::MovingAverage:
        v = 1.0;
        break;
    }
    w[k + h] = v;
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

}  // namespace

void KernelSpec::validate() const {
  if (support < 1 || support % 2 == 0)
    throw InvalidValue("kernel support must be odd and >= 1");
  if (dims != 1 && dims != 2)
    throw InvalidValue("kernel dims must be 1 or 2");
  if (shape == KernelShape::Gaussian && !(sigma > 0.0))
    throw InvalidValue("Gaussian kernel requires sigma > 0");
}

void MeasurementMatrix::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (const auto& [j, w] : rows[i]) {
      if (j < 0 || j >= n_cols)
        throw InvalidValue("measurement matrix column index out of range");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw InvalidValue("measurement matrix row " + std::to_string(i) +
                         " does not sum to one");
  }
}

std::vector<double> kernel_weights(const KernelSpec& spec) {
  spec.validate();
  return profile_1d(spec);
}

MeasurementMatrix conv_matrix(const KernelSpec& spec,
                              const std::vector<int>& signal_shape) {
  spec.validate();
  if (static_cast<int>(signal_shape.size()) != spec.dims)
    throw InvalidValue("kernel dims do not match signal shape");
  for (int s : signal_shape)
    if (spec.support > s)
      throw InvalidValue("kernel support exceeds signal extent");

  const std::vector<double> w = profile_1d(spec);
  const int h = (spec.support - 1) / 2;

  MeasurementMatrix m;
  if (spec.dims == 1) {
    const int n = signal_shape[0];
    m.n_cols = n;
    m.rows.reserve(n);
    for (int i = 0; i < n; ++i) {
      MeasurementMatrix::Row row;
      double s = 0.0;
      for (int k = -h; k <= h; ++k) {
        const int j = i + k;
        if (j < 0 || j >= n) continue;
        row.emplace_back(j, w[k + h]);
        s += w[k + h];
      }
      for (auto& [j, v] : row) v /= s;
      m.rows.push_back(std::move(row));
    }
  } else {
    const int nr = signal_shape[0];
    const int nc = signal_shape[1];
    m.n_cols = nr * nc;
    m.rows.reserve(static_cast<std::size_t>(nr) * nc);
    for (int r = 0; r < nr; ++r) {
      for (int c = 0; c < nc; ++c) {
        MeasurementMatrix::Row row;
        double s = 0.0;
        for (int k = -h; k <= h; ++k) {
          const int rr = r + k;
          if (rr < 0 || rr >= nr) continue;
          for (int l = -h; l <= h; ++l) {
            const int cc = c + l;
            if (cc < 0 || cc >= nc) continue;
            const double v = w[k + h] * w[l + h];
            row.emplace_back(rr * nc + cc, v);
            s += v;
          }
        }
        for (auto& [j, v] : row) v /= s;
        m.rows.push_back(std::move(row));
      }
    }
  }
  return m;
}

MeasurementMatrix identity_matrix(int n) {
  MeasurementMatrix m;
  m.n_cols = n;
  m.rows.reserve(n);
  for (int i = 0; i < n; ++i) m.rows.push_back({{i, 1.0}});
  return m;
}

ManifoldPoint apply_row(const MeasurementMatrix& A, int row, const Signal& u,
                        const ManifoldPoint* anchor, const MeanOptions& opts) {
  const auto& r = A.rows[row];
  std::vector<ManifoldPoint> pts;
  WeightVector a;
  pts.reserve(r.size());
  a.weights.reserve(r.size());
  for (const auto& [j, w] : r) {
    pts.push_back(u.data[j]);
    a.weights.push_back(w);
  }
  const std::string where = "apply: row " + std::to_string(row) + ": ";
  try {
    if (anchor) return weighted_mean_nearest(pts, a, *anchor, opts);
    return weighted_mean(pts, a, opts);
  } catch (const AntipodalPoint& e) {
    throw AntipodalPoint(where + e.what());
  } catch (const NoConvergence& e) {
    throw NoConvergence(where + e.what());
  } catch (const InvalidValue& e) {
    throw InvalidValue(where + e.what());
  }
}

Signal apply(const MeasurementMatrix& A, const Signal& u, const Signal* anchor,
             const MeanOptions& opts) {
  if (A.n_cols != u.size())
    throw InvalidValue("apply: matrix width does not match signal length");
  if (anchor && anchor->size() != A.n_rows())
    throw InvalidValue("apply: anchor length does not match row count");

  Signal out;
  out.kind = u.kind;
  out.shape = anchor ? anchor->shape : std::vector<int>{A.n_rows()};
  if (!anchor && u.is_2d() && A.n_rows() == u.size()) out.shape = u.shape;
  out.data.reserve(A.n_rows());
  for (int i = 0; i < A.n_rows(); ++i) {
    const ManifoldPoint* anc = anchor ? &anchor->data[i] : nullptr;
    out.data.push_back(apply_row(A, i, u, anc, opts));
  }
  return out;
}

}  // namespace mvr
