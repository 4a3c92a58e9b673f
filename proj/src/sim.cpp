#include "mvr/sim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "mvr/rng.hpp"

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kDwiB = 1000.0;
constexpr double kEigFloor = 1e-6;

ManifoldPoint random_level(const ManifoldKind& kind, RandomStream& rs) {
  switch (kind.tag) {
    case ManifoldTag::Circle:
      return circle_point(rs.next_in(-kPi, kPi));
    case ManifoldTag::Sphere2: {
      Eigen::Vector3d v;
      do {
        v << rs.next_normal(), rs.next_normal(), rs.next_normal();
      } while (v.norm() < 1e-6);
      return sphere_point(v.normalized());
    }
    case ManifoldTag::Spd3: {
      // Physiological diffusion scale so that b * lambda is O(1).
      Eigen::Vector3d lam;
      for (int i = 0; i < 3; ++i) {
        const double t = rs.next_double();
        lam(i) = std::exp(std::log(2e-4) + t * (std::log(3e-3) - std::log(2e-4)));
      }
      Eigen::Matrix3d g;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(r, c) = rs.next_normal();
      const Eigen::Matrix3d q =
          Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ();
      return spd_point(q * lam.asDiagonal() * q.transpose());
    }
    case ManifoldTag::Euclidean: {
      Eigen::VectorXd v(kind.euclidean_dim);
      for (int i = 0; i < kind.euclidean_dim; ++i) v(i) = rs.next_normal();
      return euclidean_point(v);
    }
  }
  throw InvalidValue("random_level: unknown manifold kind");
}

/// Level sequence with pairwise-consecutive separation >= 0.5.
std::vector<ManifoldPoint> random_levels(const ManifoldKind& kind, int count,
                                         RandomStream& rs) {
  std::vector<ManifoldPoint> levels;
  levels.push_back(random_level(kind, rs));
  while (static_cast<int>(levels.size()) < count) {
    ManifoldPoint cand = random_level(kind, rs);
    for (int attempt = 0; attempt < 200; ++attempt) {
      if (dist(cand, levels.back()) >= 0.5) break;
      cand = random_level(kind, rs);
    }
    levels.push_back(std::move(cand));
  }
  return levels;
}

Phantom piecewise_constant_1d(const PhantomSpec& spec) {
  const int n = spec.shape[0];
  RandomStream rs(spec.seed ^ 0x70686e746d31ull);
  const int segments = 4 + static_cast<int>(rs.next_below(3));
  const int min_len = std::max(2, n / 16);

  std::vector<int> cuts;
  bool placed = false;
  for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
    cuts.clear();
    for (int s = 0; s < segments - 1; ++s)
      cuts.push_back(1 + static_cast<int>(rs.next_below(n - 1)));
    std::sort(cuts.begin(), cuts.end());
    placed = true;
    int prev = 0;
    for (int c : cuts) {
      if (c - prev < min_len) placed = false;
      prev = c;
    }
    if (n - prev < min_len) placed = false;
  }
  if (!placed) {
    cuts.clear();
    for (int s = 1; s < segments; ++s) cuts.push_back(s * n / segments);
  }

  const auto levels = random_levels(spec.manifold, segments, rs);
  Phantom ph;
  ph.signal.kind = spec.manifold;
  ph.signal.shape = {n};
  ph.signal.data.reserve(n);
  ph.jumps = cuts;
  int seg = 0;
  for (int i = 0; i < n; ++i) {
    while (seg < static_cast<int>(cuts.size()) && i >= cuts[seg]) ++seg;
    ph.signal.data.push_back(levels[seg]);
  }
  return ph;
}

Phantom piecewise_smooth_image(const PhantomSpec& spec) {
  const int nr = spec.shape[0];
  const int nc = spec.shape[1];
  RandomStream rs(spec.seed ^ 0x70686e746d32ull);
  const auto levels = random_levels(spec.manifold, 3, rs);

  const double cx = (0.25 + 0.5 * rs.next_double()) * nc;
  const double cy = (0.25 + 0.5 * rs.next_double()) * nr;
  const double rad = (0.18 + 0.17 * rs.next_double()) * std::min(nr, nc);
  const double theta = rs.next_in(-kPi, kPi);

  // Smooth drift per region: a small tangent field linear in the pixel
  // coordinates, pushed through exp.
  struct Drift {
    Eigen::VectorXd ax, ay;
  };
  std::vector<Drift> drifts;
  std::vector<std::vector<TangentVector>> bases;
  for (const auto& lv : levels) {
    const auto basis = tangent_basis(lv);
    Eigen::VectorXd ax(basis.size()), ay(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      ax(k) = 0.35 * (rs.next_double() - 0.5);
      ay(k) = 0.35 * (rs.next_double() - 0.5);
    }
    drifts.push_back({ax, ay});
    bases.push_back(basis);
  }

  Phantom ph;
  ph.signal.kind = spec.manifold;
  ph.signal.shape = spec.shape;
  ph.signal.data.reserve(static_cast<std::size_t>(nr) * nc);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      const double dx = c - cx, dy = r - cy;
      int region;
      if (dx * dx + dy * dy <= rad * rad)
        region = 0;
      else
        region = (dx * std::cos(theta) + dy * std::sin(theta) >= 0.0) ? 1 : 2;
      const auto& b = bases[region];
      const auto& dr = drifts[region];
      TangentVector t = zero_tangent(levels[region]);
      const double fx = nc > 1 ? static_cast<double>(c) / (nc - 1) : 0.0;
      const double fy = nr > 1 ? static_cast<double>(r) / (nr - 1) : 0.0;
      for (std::size_t k = 0; k < b.size(); ++k)
        t.v += (fx * dr.ax(k) + fy * dr.ay(k)) * b[k].v;
      ph.signal.data.push_back(exp_map(levels[region], t));
    }
  }
  return ph;
}

double sample_von_mises(RandomStream& rs, double mu, double kappa) {
  // Best & Fisher (1979) rejection sampler.
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  double f = 0.0;
  for (;;) {
    const double u1 = rs.next_double();
    const double u2 = rs.next_double();
    const double z = std::cos(kPi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double u3 = rs.next_double();
  const double ang = (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
  return wrap_angle(mu + ang);
}

Eigen::Vector3d dwi_direction(int k, RandomStream&) {
  static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (k) {
    case 0: return {1, 0, 0};
    case 1: return {0, 1, 0};
    case 2: return {0, 0, 1};
    case 3: return {inv_sqrt2, inv_sqrt2, 0};
    case 4: return {inv_sqrt2, 0, inv_sqrt2};
    case 5: return {0, inv_sqrt2, inv_sqrt2};
    default: {
      // Fibonacci sphere points for the extra directions.
      const int i = k - 6;
      const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
      const double z = 1.0 - 2.0 * ((i + 0.5) / 64.0);
      const double phi = 2.0 * kPi * (i / golden - std::floor(i / golden));
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      return {rr * std::cos(phi), rr * std::sin(phi), z};
    }
  }
}

double rician(RandomStream& rs, double s, double sigma) {
  const double re = s + sigma * rs.next_normal();
  const double im = sigma * rs.next_normal();
  return std::sqrt(re * re + im * im);
}

ManifoldPoint rician_dwi_pixel(const ManifoldPoint& tensor,
                               const NoiseSpec& spec, RandomStream& rs) {
  const Eigen::Matrix3d d = spd_to_matrix(tensor);
  const int ng = spec.gradient_count;
  const double sigma = 1.0 / spec.level;

  const double s0 = std::max(rician(rs, 1.0, sigma), 1e-12);
  Eigen::MatrixXd design(ng, 6);
  Eigen::VectorXd rhs(ng);
  for (int k = 0; k < ng; ++k) {
    const Eigen::Vector3d g = dwi_direction(k, rs);
    const double att = g.dot(d * g);
    const double s = std::max(rician(rs, std::exp(-kDwiB * att), sigma), 1e-12);
    design.row(k) << g(0) * g(0), 2.0 * g(0) * g(1), 2.0 * g(0) * g(2),
        g(1) * g(1), 2.0 * g(1) * g(2), g(2) * g(2);
    rhs(k) = -std::log(s / s0) / kDwiB;
  }
  const Eigen::VectorXd fit = design.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix3d m;
  m << fit(0), fit(1), fit(2),
       fit(1), fit(3), fit(4),
       fit(2), fit(4), fit(5);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(kEigFloor);
  return spd_point(es.eigenvectors() * ev.asDiagonal() *
                   es.eigenvectors().transpose());
}

}  // namespace

void NoiseSpec::validate() const {
  switch (model) {
    case NoiseModel::VonMises:
      if (!(kappa > 0.0)) throw InvalidValue("von Mises noise requires kappa > 0");
      break;
    case NoiseModel::WrappedGaussian:
      if (!(sigma > 0.0))
        throw InvalidValue("wrapped Gaussian noise requires sigma > 0");
      break;
    case NoiseModel::RicianDwi:
      if (!(level > 0.0)) throw InvalidValue("Rician noise requires level > 0");
      if (gradient_count < 6)
        throw InvalidValue("Rician DWI needs at least 6 gradient directions");
      break;
  }
}

void PhantomSpec::validate() const {
  if (kind == PhantomKind::PiecewiseConstant1D) {
    if (shape.size() != 1 || shape[0] < 16)
      throw InvalidValue("1D phantom needs a 1D shape of at least 16 samples");
  } else {
    if (shape.size() != 2 || shape[0] < 8 || shape[1] < 8)
      throw InvalidValue("image phantom needs a 2D shape of at least 8x8");
  }
}

Phantom make_phantom(const PhantomSpec& spec) {
  spec.validate();
  return spec.kind == PhantomKind::PiecewiseConstant1D
             ? piecewise_constant_1d(spec)
             : piecewise_smooth_image(spec);
}

Signal add_noise(const Signal& u, const NoiseSpec& spec) {
  spec.validate();
  u.validate();
  Signal out = u;
  switch (spec.model) {
    case NoiseModel::VonMises: {
      if (u.kind.tag != ManifoldTag::Circle)
        throw InvalidValue("von Mises noise applies to circle-valued signals");
      for (int i = 0; i < u.size(); ++i) {
        RandomStream rs = RandomStream::for_index(spec.seed, i);
        out.data[i] = circle_point(
            sample_von_mises(rs, u.data[i].x(0), spec.kappa));
      }
      return out;
    }
    case NoiseModel::WrappedGaussian: {
      if (u.kind.tag == ManifoldTag::Circle) {
        for (int i = 0; i < u.size(); ++i) {
          RandomStream rs = RandomStream::for_index(spec.seed, i);
          out.data[i] =
              circle_point(u.data[i].x(0) + spec.sigma * rs.next_normal());
        }
        return out;
      }
      if (u.kind.tag == ManifoldTag::Sphere2) {
        for (int i = 0; i < u.size(); ++i) {
          RandomStream rs = RandomStream::for_index(spec.seed, i);
          const auto basis = tangent_basis(u.data[i]);
          TangentVector t = zero_tangent(u.data[i]);
          for (const auto& e : basis)
            t.v += spec.sigma * rs.next_normal() * e.v;
          out.data[i] = exp_map(u.data[i], t);
        }
        return out;
      }
      throw InvalidValue(
          "wrapped Gaussian noise applies to circle- or sphere-valued signals");
    }
    case NoiseModel::RicianDwi: {
      if (u.kind.tag != ManifoldTag::Spd3)
        throw InvalidValue("Rician DWI noise applies to Spd3-valued signals");
      for (int i = 0; i < u.size(); ++i) {
        RandomStream rs = RandomStream::for_index(spec.seed, i);
        out.data[i] = rician_dwi_pixel(u.data[i], spec, rs);
      }
      return out;
    }
  }
  throw InvalidValue("add_noise: unknown noise model");
}

double delta_snr(const Signal& ground, const Signal& noisy,
                 const Signal& recon) {
  ground.validate();
  if (ground.kind != noisy.kind || ground.kind != recon.kind ||
      ground.size() != noisy.size() || ground.size() != recon.size())
    throw KindMismatch("delta_snr: signals must share manifold and shape");
  double num = 0.0, den = 0.0;
  for (int i = 0; i < ground.size(); ++i) {
    const double dn = dist(ground.data[i], noisy.data[i]);
    const double dr = dist(ground.data[i], recon.data[i]);
    num += dn * dn;
    den += dr * dr;
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

}  // namespace mvr
