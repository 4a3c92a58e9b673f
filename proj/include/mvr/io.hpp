#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvr/measurement.hpp"
#include "mvr/regularizers.hpp"
#include "mvr/signal.hpp"
#include "mvr/sim.hpp"
#include "mvr/solvers.hpp"

namespace mvr {

/// Declarative description of one generate/degrade/reconstruct/evaluate run.
struct PipelineConfig {
  PhantomSpec phantom;
  KernelSpec kernel;
  NoiseSpec noise;
  RegularizerSpec regularizer = TvSpec{0.1};
  SolverSpec solver;
  AntipodalPolicy antipodal = AntipodalPolicy::DeterministicPositive;
  std::map<std::string, std::string> io;  // named file paths

  /// Cross-stage consistency (noise model vs manifold, kernel dims vs shape,
  /// p = 1 vs scheme).
  void validate() const;
};

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

/// Applies a `--set dotted.key=value` override onto a JSON document. The
/// value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& dotted_key,
                    const std::string& value);

PipelineConfig parse_config(const nlohmann::json& j);

/// Replaces every stage seed by the given one.
void override_seeds(PipelineConfig& cfg, std::uint64_t seed);

// ---- signal files ------------------------------------------------------------

/// JSON envelope {"manifold": "S1"|"S2"|"Spd3"|"Rn", "shape": [..],
/// "data": [..]} with a flat row-major numeric payload in the manifold chart
/// conventions ("dim" is added for Rn). Serialization is lossless.
nlohmann::json signal_to_json(const Signal& s);
Signal signal_from_json(const nlohmann::json& j);
void write_signal(const std::string& path, const Signal& s);
Signal read_signal(const std::string& path);

/// CSV trace "iteration,functional\n" with full-precision values.
void write_trace_csv(const std::string& path, const std::vector<double>& trace);

// ---- rendering -----------------------------------------------------------------

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // 3 bytes per pixel, row-major
};

/// Renders a signal to a raster: circle values as hue, sphere values by a
/// hue/value code of the spherical angles, Spd3 values as projected ellipse
/// glyphs, Euclidean values as normalized gray.
RasterImage render_signal(const Signal& s, int scale = 8);

/// Binary PPM (P6).
void write_ppm(const std::string& path, const RasterImage& img);

}  // namespace mvr
