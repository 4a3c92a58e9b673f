#include "mvr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::string manifold_name(const ManifoldKind& kind) {
  switch (kind.tag) {
    case ManifoldTag::Circle: return "S1";
    case ManifoldTag::Sphere2: return "S2";
    case ManifoldTag::Spd3: return "Spd3";
    case ManifoldTag::Euclidean: return "Rn";
  }
  return "?";
}

ManifoldKind manifold_from_name(const std::string& name, int dim) {
  if (name == "S1") return ManifoldKind::circle();
  if (name == "S2") return ManifoldKind::sphere2();
  if (name == "Spd3") return ManifoldKind::spd3();
  if (name == "Rn") return ManifoldKind::euclidean(dim);
  throw ConfigError("unknown manifold name: " + name);
}

template <typename Enum>
Enum parse_enum(const std::string& v,
                const std::vector<std::pair<std::string, Enum>>& table,
                const std::string& what) {
  for (const auto& [name, e] : table)
    if (name == v) return e;
  throw ConfigError("unknown " + what + ": " + v);
}

void hsv_to_rgb(double h, double s, double v, unsigned char* out) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  out[0] = static_cast<unsigned char>(std::lround(255.0 * (r + m)));
  out[1] = static_cast<unsigned char>(std::lround(255.0 * (g + m)));
  out[2] = static_cast<unsigned char>(std::lround(255.0 * (b + m)));
}

void pixel_color(const ManifoldPoint& p, double norm_lo, double norm_hi,
                 unsigned char* out) {
  switch (p.kind.tag) {
    case ManifoldTag::Circle: {
      hsv_to_rgb((p.x(0) + kPi) / (2.0 * kPi), 1.0, 1.0, out);
      return;
    }
    case ManifoldTag::Sphere2: {
      const double az = std::atan2(p.x(1), p.x(0));
      const double pol = std::acos(std::clamp(p.x(2), -1.0, 1.0));
      hsv_to_rgb((az + kPi) / (2.0 * kPi), 1.0, 0.25 + 0.75 * (pol / kPi), out);
      return;
    }
    case ManifoldTag::Euclidean: {
      const double n = p.x.norm();
      double t = norm_hi > norm_lo ? (n - norm_lo) / (norm_hi - norm_lo) : 0.5;
      t = std::clamp(t, 0.0, 1.0);
      out[0] = out[1] = out[2] =
          static_cast<unsigned char>(std::lround(255.0 * t));
      return;
    }
    default:
      out[0] = out[1] = out[2] = 0;
      return;
  }
}

RasterImage render_spd_glyphs(const Signal& s, int glyph) {
  const int nr = s.rows(), nc = s.cols();
  RasterImage img;
  img.width = nc * glyph;
  img.height = nr * glyph;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 255);

  double max_ev = 0.0;
  for (const auto& p : s.data) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(spd_to_matrix(p));
    max_ev = std::max(max_ev, es.eigenvalues()(2));
  }
  if (max_ev <= 0.0) max_ev = 1.0;

  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      const Eigen::Matrix3d d = spd_to_matrix(s.at(r, c));
      // Project onto the image plane: the xy sub-block, normalized so the
      // largest tensor in the image fills its glyph cell.
      Eigen::Matrix2d d2 = d.topLeftCorner<2, 2>() / max_ev;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(d2);
      const double ang = std::atan2(es2.eigenvectors()(1, 1), es2.eigenvectors()(0, 1));
      unsigned char color[3];
      hsv_to_rgb((ang + kPi) / (2.0 * kPi), 0.9, 0.85, color);
      const Eigen::Matrix2d inv = d2.inverse();
      const double half = 0.5 * (glyph - 1);
      for (int py = 0; py < glyph; ++py) {
        for (int px = 0; px < glyph; ++px) {
          // Level set x^T d2^{-1} x <= c of the quadratic form.
          const double x = (px - half) / half;
          const double y = (py - half) / half;
          const Eigen::Vector2d v(x, y);
          if (v.dot(inv * v) <= 1.0) {
            const std::size_t idx =
                (static_cast<std::size_t>(r * glyph + py) * img.width +
                 (c * glyph + px)) * 3;
            img.rgb[idx] = color[0];
            img.rgb[idx + 1] = color[1];
            img.rgb[idx + 2] = color[2];
          }
        }
      }
    }
  }
  return img;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void apply_override(nlohmann::json& doc, const std::string& dotted_key,
                    const std::string& value) {
  nlohmann::json* cur = &doc;
  std::stringstream ss(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty --set key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = &((*cur)[parts[i]]);
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  (*cur)[parts.back()] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
}

void PipelineConfig::validate() const {
  phantom.validate();
  kernel.validate();
  noise.validate();
  if (static_cast<int>(phantom.shape.size()) != kernel.dims)
    throw ConfigError("kernel dims do not match the phantom shape");
  const ManifoldTag tag = phantom.manifold.tag;
  switch (noise.model) {
    case NoiseModel::VonMises:
      if (tag != ManifoldTag::Circle)
        throw ConfigError("von Mises noise requires an S1 phantom");
      break;
    case NoiseModel::WrappedGaussian:
      if (tag != ManifoldTag::Circle && tag != ManifoldTag::Sphere2)
        throw ConfigError("wrapped Gaussian noise requires S1 or S2");
      break;
    case NoiseModel::RicianDwi:
      if (tag != ManifoldTag::Spd3)
        throw ConfigError("Rician DWI noise requires an Spd3 phantom");
      break;
  }
  solver.validate();
}

PipelineConfig parse_config(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    if (j.contains("phantom")) {
      const auto& p = j.at("phantom");
      cfg.phantom.kind = parse_enum<PhantomKind>(
          p.value("kind", "piecewise_constant_1d"),
          {{"piecewise_constant_1d", PhantomKind::PiecewiseConstant1D},
           {"piecewise_smooth_image", PhantomKind::PiecewiseSmoothImage}},
          "phantom kind");
      cfg.phantom.manifold = manifold_from_name(p.value("manifold", "S1"),
                                                p.value("dim", 1));
      cfg.phantom.shape = p.value("shape", std::vector<int>{128});
      cfg.phantom.seed = p.value("seed", 0ull);
    }
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      cfg.kernel.shape = parse_enum<KernelShape>(
          k.value("shape", "gaussian"),
          {{"gaussian", KernelShape::Gaussian},
           {"triangular", KernelShape::Triangular},
           {"moving_average", KernelShape::MovingAverage}},
          "kernel shape");
      cfg.kernel.support = k.value("support", 7);
      cfg.kernel.dims = k.value("dims", 1);
      cfg.kernel.sigma = k.value("sigma", 1.0);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      cfg.noise.model = parse_enum<NoiseModel>(
          n.value("model", "von_mises"),
          {{"von_mises", NoiseModel::VonMises},
           {"wrapped_gaussian", NoiseModel::WrappedGaussian},
           {"rician_dwi", NoiseModel::RicianDwi}},
          "noise model");
      cfg.noise.kappa = n.value("kappa", 100.0);
      cfg.noise.sigma = n.value("sigma", 0.1);
      cfg.noise.level = n.value("level", 30.0);
      cfg.noise.gradient_count = n.value("gradient_count", 6);
      cfg.noise.seed = n.value("seed", 0ull);
    }
    if (j.contains("regularizer")) {
      const auto& r = j.at("regularizer");
      const std::string tag = r.value("tag", "tv");
      if (tag == "tv") {
        cfg.regularizer = TvSpec{r.value("lambda", 0.1)};
      } else if (tag == "vq") {
        cfg.regularizer = VqSpec{r.value("lambda", 0.1), r.value("q", 2.0)};
      } else if (tag == "mixed_tv2") {
        cfg.regularizer =
            MixedTv2Spec{r.value("mu1", 1.0), r.value("mu2", 1.0),
                         r.value("mu21", 1.0), r.value("mu22", 1.0)};
      } else if (tag == "tgv") {
        const TgvVariant variant = parse_enum<TgvVariant>(
            r.value("variant", "schild"),
            {{"schild", TgvVariant::Schild},
             {"parallel_transport", TgvVariant::ParallelTransport}},
            "TGV variant");
        if (r.contains("r") || r.contains("s"))
          cfg.regularizer =
              tgv_from_rs(r.value("r", 0.2), r.value("s", 0.3), variant);
        else
          cfg.regularizer = TgvSpec{r.value("lambda0", 1.0),
                                    r.value("lambda1", 1.0), variant};
      } else {
        throw ConfigError("unknown regularizer tag: " + tag);
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.solver.scheme = parse_enum<SolverScheme>(
          s.value("scheme", "gfb_traj"),
          {{"gfb", SolverScheme::Gfb},
           {"gfb_traj", SolverScheme::GfbTraj},
           {"stochastic_gfb_traj", SolverScheme::StochasticGfbTraj},
           {"cppa", SolverScheme::Cppa}},
          "solver scheme");
      cfg.solver.iterations = s.value("iterations", 1000);
      cfg.solver.mu0 = s.value("mu0", 1.0);
      cfg.solver.seed = s.value("seed", 0ull);
      cfg.solver.record_functional = s.value("record_functional", true);
      cfg.solver.damping = s.value("damping", 1.0);
    }
    cfg.solver.p = j.value("p", 2.0);
    const std::string pol = j.value("antipodal", "deterministic_positive");
    cfg.antipodal = parse_enum<AntipodalPolicy>(
        pol,
        {{"error", AntipodalPolicy::Error},
         {"deterministic_positive", AntipodalPolicy::DeterministicPositive}},
        "antipodal policy");
    cfg.solver.antipodal = cfg.antipodal;
    if (j.contains("io"))
      for (const auto& [k, v] : j.at("io").items())
        cfg.io[k] = v.get<std::string>();
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      Tols::sphere_unit = t.value("sphere_unit", Tols::sphere_unit);
      Tols::tangent_orthogonal =
          t.value("tangent_orthogonal", Tols::tangent_orthogonal);
      Tols::spd_positive = t.value("spd_positive", Tols::spd_positive);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void override_seeds(PipelineConfig& cfg, std::uint64_t seed) {
  cfg.phantom.seed = seed;
  cfg.noise.seed = seed;
  cfg.solver.seed = seed;
}

nlohmann::json signal_to_json(const Signal& s) {
  s.validate();
  nlohmann::json j;
  j["manifold"] = manifold_name(s.kind);
  if (s.kind.tag == ManifoldTag::Euclidean) j["dim"] = s.kind.euclidean_dim;
  j["shape"] = s.shape;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(s.size()) * s.kind.ambient_size());
  for (const auto& p : s.data)
    for (int k = 0; k < p.x.size(); ++k) flat.push_back(p.x(k));
  j["data"] = std::move(flat);
  return j;
}

Signal signal_from_json(const nlohmann::json& j) {
  try {
    const std::string name = j.at("manifold").get<std::string>();
    const ManifoldKind kind = manifold_from_name(name, j.value("dim", 1));
    Signal s;
    s.kind = kind;
    s.shape = j.at("shape").get<std::vector<int>>();
    const auto flat = j.at("data").get<std::vector<double>>();
    const int stride = kind.ambient_size();
    if (flat.size() % stride != 0)
      throw ConfigError("signal payload length does not match the chart");
    s.data.reserve(flat.size() / stride);
    for (std::size_t off = 0; off + stride <= flat.size(); off += stride) {
      SmallVec c(stride);
      for (int k = 0; k < stride; ++k) c(k) = flat[off + k];
      s.data.push_back(make_point(kind, c));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed signal file: ") + e.what());
  }
}

void write_signal(const std::string& path, const Signal& s) {
  save_json_file(path, signal_to_json(s));
}

Signal read_signal(const std::string& path) {
  return signal_from_json(load_json_file(path));
}

void write_trace_csv(const std::string& path,
                     const std::vector<double>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << "iteration,functional\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, trace[i]);
    out << buf;
  }
}

RasterImage render_signal(const Signal& s, int scale) {
  s.validate();
  if (scale < 1) throw ConfigError("render scale must be >= 1");
  if (s.kind.tag == ManifoldTag::Spd3)
    return render_spd_glyphs(s, std::max(8, scale));

  double lo = 0.0, hi = 0.0;
  if (s.kind.tag == ManifoldTag::Euclidean) {
    lo = s.data[0].x.norm();
    hi = lo;
    for (const auto& p : s.data) {
      lo = std::min(lo, p.x.norm());
      hi = std::max(hi, p.x.norm());
    }
  }

  const int nr = s.rows(), nc = s.cols();
  const int ribbon = s.is_2d() ? scale : 32;
  RasterImage img;
  img.width = (s.is_2d() ? nc : nr) * scale;
  img.height = s.is_2d() ? nr * scale : ribbon;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);

  for (int py = 0; py < img.height; ++py) {
    for (int px = 0; px < img.width; ++px) {
      const ManifoldPoint& p = s.is_2d()
                                   ? s.at(py / scale, px / scale)
                                   : s.data[px / scale];
      pixel_color(p, lo, hi,
                  &img.rgb[(static_cast<std::size_t>(py) * img.width + px) * 3]);
    }
  }
  return img;
}

void write_ppm(const std::string& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
}

}  // namespace mvr
