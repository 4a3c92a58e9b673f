#pragma once

#include <cstdint>
#include <vector>

#include "mvr/signal.hpp"

namespace mvr {

enum class NoiseModel { VonMises, WrappedGaussian, RicianDwi };

struct NoiseSpec {
  NoiseModel model = NoiseModel::VonMises;
  double kappa = 100.0;  // VonMises concentration
  double sigma = 0.1;    // WrappedGaussian std (tangent space for Sphere2)
  double level = 30.0;   // RicianDwi: SNR of the b=0 image
  int gradient_count = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class PhantomKind { PiecewiseConstant1D, PiecewiseSmoothImage };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::PiecewiseConstant1D;
  ManifoldKind manifold = ManifoldKind::circle();
  std::vector<int> shape = {128};
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Signal signal;
  /// Jump locations of 1D phantoms (index i means a jump between i-1 and i);
  /// empty for images.
  std::vector<int> jumps;
};

/// Deterministic synthetic ground truth: piecewise-constant 1D signals with
/// at least three jumps, or images with piecewise regions whose interiors
/// vary geodesically smoothly.
Phantom make_phantom(const PhantomSpec& spec);

/// Seeded, per-pixel-stream noise. Models are manifold-specific:
/// VonMises/WrappedGaussian on the circle, tangent-space WrappedGaussian on
/// the sphere, and the Rician diffusion-imaging pipeline on Spd3 (synthesize
/// Stejskal-Tanner intensities at b = 1000, corrupt, refit by least squares
/// on log-intensities, floor eigenvalues at 1e-6).
Signal add_noise(const Signal& u, const NoiseSpec& spec);

/// Signal-to-noise ratio improvement in dB:
/// 10 log10( sum d(g,f)^2 / sum d(g,u)^2 ). Returns +infinity when the
/// reconstruction equals the ground truth.
double delta_snr(const Signal& ground, const Signal& noisy,
                 const Signal& recon);

}  // namespace mvr
