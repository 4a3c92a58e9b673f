#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mvr/io.hpp"
#include "mvr/rng.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

mvr::PipelineConfig load_config(const CommonArgs& args) {
  nlohmann::json doc = args.config_path.empty()
                           ? nlohmann::json::object()
                           : mvr::load_json_file(args.config_path);
  for (const auto& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw mvr::ConfigError("--set expects dotted.key=value, got: " + ov);
    mvr::apply_override(doc, ov.substr(0, eq), ov.substr(eq + 1));
  }
  mvr::PipelineConfig cfg = mvr::parse_config(doc);
  if (args.seed) mvr::override_seeds(cfg, *args.seed);
  return cfg;
}

std::string path_or(const mvr::PipelineConfig& cfg, const std::string& flag,
                    const std::string& key, const std::string& fallback) {
  if (!flag.empty()) return flag;
  const auto it = cfg.io.find(key);
  if (it != cfg.io.end()) return it->second;
  return fallback;
}

mvr::MeanOptions pipeline_mean_options(const mvr::PipelineConfig& cfg) {
  mvr::MeanOptions mo;
  mo.antipodal = cfg.antipodal;
  mo.max_iters = 400;
  return mo;
}

int cmd_generate(const CommonArgs& common, const std::string& out) {
  const mvr::PipelineConfig cfg = load_config(common);
  const mvr::Phantom ph = mvr::make_phantom(cfg.phantom);
  const std::string path = path_or(cfg, out, "ground", "ground.json");
  mvr::write_signal(path, ph.signal);
  nlohmann::json meta;
  meta["jumps"] = ph.jumps;
  mvr::save_json_file(path + ".meta.json", meta);
  std::cout << "wrote " << path << " (" << ph.signal.size() << " samples)\n";
  return 0;
}

void require_kernel_fits(const mvr::KernelSpec& kernel,
                         const mvr::Signal& signal, const std::string& stage) {
  if (static_cast<int>(signal.shape.size()) != kernel.dims)
    throw mvr::ConfigError(stage + ": kernel dims do not match the " +
                           std::to_string(signal.shape.size()) +
                           "D input signal");
}

int cmd_degrade(const CommonArgs& common, const std::string& in,
                const std::string& out) {
  const mvr::PipelineConfig cfg = load_config(common);
  const std::string in_path = path_or(cfg, in, "ground", "ground.json");
  const mvr::Signal ground = mvr::read_signal(in_path);
  require_kernel_fits(cfg.kernel, ground, "degrade");
  const mvr::MeasurementMatrix a = mvr::conv_matrix(cfg.kernel, ground.shape);
  const mvr::Signal blurred =
      mvr::apply(a, ground, nullptr, pipeline_mean_options(cfg));
  const mvr::Signal noisy = mvr::add_noise(blurred, cfg.noise);
  const std::string path = path_or(cfg, out, "degraded", "degraded.json");
  mvr::write_signal(path, noisy);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_reconstruct(const CommonArgs& common, const std::string& in,
                    const std::string& out, const std::string& trace) {
  const mvr::PipelineConfig cfg = load_config(common);
  const std::string in_path = path_or(cfg, in, "degraded", "degraded.json");
  const mvr::Signal f = mvr::read_signal(in_path);
  require_kernel_fits(cfg.kernel, f, "reconstruct");
  const mvr::MeasurementMatrix a = mvr::conv_matrix(cfg.kernel, f.shape);
  // The degraded data itself is the natural starting iterate.
  const mvr::SolveReport report =
      mvr::solve(f, a, f, cfg.regularizer, cfg.solver);
  const std::string path = path_or(cfg, out, "result", "result.json");
  mvr::write_signal(path, report.result);
  if (cfg.solver.record_functional) {
    const std::string trace_path = path_or(cfg, trace, "trace", "trace.csv");
    mvr::write_trace_csv(trace_path, report.functional_trace);
    std::cout << "wrote " << path << " and " << trace_path << " ("
              << report.wall_time_seconds << " s)\n";
  } else {
    std::cout << "wrote " << path << " (" << report.wall_time_seconds
              << " s)\n";
  }
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& ground_path,
                 const std::string& degraded_path,
                 const std::string& result_path) {
  const mvr::PipelineConfig cfg = load_config(common);
  const mvr::Signal g = mvr::read_signal(path_or(cfg, ground_path, "ground", "ground.json"));
  const mvr::Signal f = mvr::read_signal(path_or(cfg, degraded_path, "degraded", "degraded.json"));
  const mvr::Signal u = mvr::read_signal(path_or(cfg, result_path, "result", "result.json"));
  const double snr = mvr::delta_snr(g, f, u);
  nlohmann::json rep;
  rep["delta_snr_db"] = snr;
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_render(const std::string& in, const std::string& out, int scale) {
  const mvr::Signal s = mvr::read_signal(in);
  mvr::write_ppm(out, mvr::render_signal(s, scale));
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_bench(const CommonArgs& common, const std::string& out) {
  const mvr::PipelineConfig cfg = load_config(common);
  if (cfg.solver.p <= 1.0)
    throw mvr::ConfigError("bench compares gradient schemes and needs p > 1");

  const mvr::Phantom ph = mvr::make_phantom(cfg.phantom);
  const mvr::MeasurementMatrix a = mvr::conv_matrix(cfg.kernel, ph.signal.shape);
  const mvr::Signal blurred =
      mvr::apply(a, ph.signal, nullptr, pipeline_mean_options(cfg));
  const mvr::Signal f = mvr::add_noise(blurred, cfg.noise);

  mvr::SolverSpec base = cfg.solver;
  base.record_functional = true;

  const auto trace_of = [&](mvr::SolverScheme scheme, std::uint64_t seed) {
    mvr::SolverSpec s = base;
    s.scheme = scheme;
    s.seed = seed;
    return mvr::solve(f, a, f, cfg.regularizer, s).functional_trace;
  };

  std::cerr << "bench: gfb\n";
  const auto gfb = trace_of(mvr::SolverScheme::Gfb, base.seed);
  std::cerr << "bench: gfb_traj\n";
  const auto traj = trace_of(mvr::SolverScheme::GfbTraj, base.seed);
  std::cerr << "bench: stochastic (10 seeds)\n";
  std::vector<double> stoch_mean(base.iterations, 0.0);
  for (int s = 0; s < 10; ++s) {
    const auto t = trace_of(mvr::SolverScheme::StochasticGfbTraj, base.seed + s);
    for (int i = 0; i < base.iterations; ++i) stoch_mean[i] += t[i] / 10.0;
  }
  std::cerr << "bench: cppa\n";
  const auto cppa = trace_of(mvr::SolverScheme::Cppa, base.seed);

  const std::string path = path_or(cfg, out, "bench", "bench.csv");
  std::ofstream file(path, std::ios::binary);
  if (!file) throw mvr::ConfigError("cannot write file: " + path);
  file << "iteration,gfb,gfb_traj,stgfb_traj_mean,cppa\n";
  char buf[256];
  for (int i = 0; i < base.iterations; ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                  gfb[i], traj[i], stoch_mean[i], cppa[i]);
    file << buf;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Variational reconstruction of manifold-valued signals under indirect "
      "measurements (deconvolution with TV/TGV-type regularizers)"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string in, out, trace, ground, degraded, result;
  int scale = 8;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "pipeline config (JSON)");
    sub->add_option("--set", common.overrides,
                    "override a config field: dotted.key=value");
    sub->add_option("--seed", common.seed, "override every stage seed");
  };

  auto* gen = app.add_subcommand("generate", "synthesize a ground-truth signal");
  add_common(gen);
  gen->add_option("--out", out, "output signal file");

  auto* deg = app.add_subcommand("degrade", "convolve and add noise");
  add_common(deg);
  deg->add_option("--in", in, "input signal file");
  deg->add_option("--out", out, "output signal file");

  auto* rec = app.add_subcommand("reconstruct", "run the configured solver");
  add_common(rec);
  rec->add_option("--in", in, "degraded signal file");
  rec->add_option("--out", out, "output signal file");
  rec->add_option("--trace", trace, "functional trace CSV");

  auto* eva = app.add_subcommand("evaluate", "report the SNR improvement");
  add_common(eva);
  eva->add_option("--ground", ground, "ground-truth signal file");
  eva->add_option("--degraded", degraded, "degraded signal file");
  eva->add_option("--result", result, "reconstructed signal file");

  auto* ren = app.add_subcommand("render", "rasterize a signal to PPM");
  ren->add_option("--in", in, "signal file")->required();
  ren->add_option("--out", out, "output PPM file")->required();
  ren->add_option("--scale", scale, "pixels per sample");

  auto* ben = app.add_subcommand(
      "bench", "run all four solver schemes and emit a trace CSV");
  add_common(ben);
  ben->add_option("--out", out, "output CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(common, out);
    if (deg->parsed()) return cmd_degrade(common, in, out);
    if (rec->parsed()) return cmd_reconstruct(common, in, out, trace);
    if (eva->parsed()) return cmd_evaluate(common, ground, degraded, result);
    if (ren->parsed()) return cmd_render(in, out, scale);
    if (ben->parsed()) return cmd_bench(common, out);
  } catch (const mvr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mvr::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
