#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mvr/io.hpp"
#include "test_util.hpp"

using namespace mvr;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("signal json round trip is lossless") {
  RandomStream rs(91);
  for (const auto& kind : testutil::all_kinds()) {
    Signal s = testutil::random_signal(kind, 10, rs);
    const nlohmann::json j = signal_to_json(s);
    const Signal back = signal_from_json(j);
    REQUIRE(back.size() == s.size());
    CHECK(back.kind == s.kind);
    for (int i = 0; i < s.size(); ++i)
      for (int k = 0; k < s.data[i].x.size(); ++k)
        CHECK(back.data[i].x(k) == s.data[i].x(k));  // bit-exact

    // File round trip is byte-stable.
    const std::string path = temp_path("mvr_sig_test.json");
    write_signal(path, s);
    const std::string bytes1 = slurp(path);
    write_signal(path, read_signal(path));
    CHECK(slurp(path) == bytes1);
    std::remove(path.c_str());
  }

  // 2D shapes survive.
  Signal img = testutil::random_signal(ManifoldKind::circle(), 12, rs);
  img.shape = {3, 4};
  const Signal back = signal_from_json(signal_to_json(img));
  CHECK(back.shape == std::vector<int>{3, 4});
}

TEST_CASE("malformed signal files raise config errors") {
  CHECK_THROWS_AS((void)signal_from_json(nlohmann::json{{"manifold", "S7"}}),
                  ConfigError);
  nlohmann::json j;
  j["manifold"] = "S2";
  j["shape"] = {2};
  j["data"] = {1.0, 0.0, 0.0, 0.0, 1.0};  // wrong payload length
  CHECK_THROWS_AS((void)signal_from_json(j), ConfigError);
  CHECK_THROWS_AS((void)read_signal("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("config parsing, overrides, and validation") {
  nlohmann::json j = {
      {"phantom",
       {{"kind", "piecewise_constant_1d"},
        {"manifold", "S1"},
        {"shape", {128}},
        {"seed", 7}}},
      {"kernel",
       {{"shape", "gaussian"}, {"support", 7}, {"dims", 1}, {"sigma", 1.0}}},
      {"noise", {{"model", "von_mises"}, {"kappa", 100.0}, {"seed", 11}}},
      {"regularizer", {{"tag", "tv"}, {"lambda", 0.1}}},
      {"solver",
       {{"scheme", "gfb_traj"}, {"iterations", 1000}, {"mu0", 1.0}}},
      {"p", 2.0}};
  PipelineConfig cfg = parse_config(j);
  CHECK(cfg.solver.p == 2.0);
  CHECK(cfg.solver.iterations == 1000);
  CHECK(std::get<TvSpec>(cfg.regularizer).lambda == 0.1);
  CHECK(cfg.antipodal == AntipodalPolicy::DeterministicPositive);

  apply_override(j, "solver.iterations", "50");
  apply_override(j, "regularizer.tag", "tgv");
  apply_override(j, "regularizer.r", "0.2");
  apply_override(j, "regularizer.s", "0.3");
  cfg = parse_config(j);
  CHECK(cfg.solver.iterations == 50);
  const auto& tgv = std::get<TgvSpec>(cfg.regularizer);
  CHECK(tgv.lambda1 == doctest::Approx(0.2));

  override_seeds(cfg, 42);
  CHECK(cfg.phantom.seed == 42);
  CHECK(cfg.noise.seed == 42);
  CHECK(cfg.solver.seed == 42);

  // Inconsistent stages are rejected.
  nlohmann::json bad = j;
  apply_override(bad, "noise.model", "rician_dwi");
  CHECK_THROWS_AS((void)parse_config(bad), ConfigError);
  bad = j;
  apply_override(bad, "kernel.dims", "2");
  CHECK_THROWS_AS((void)parse_config(bad), ConfigError);
  bad = j;
  apply_override(bad, "p", "1.0");  // gradient scheme with p = 1
  CHECK_THROWS_AS((void)parse_config(bad), ConfigError);
  bad = j;
  apply_override(bad, "solver.scheme", "cppa");
  apply_override(bad, "p", "1.0");
  (void)parse_config(bad);  // CPPA supports p = 1
}

TEST_CASE("rendering") {
  // A constant circle signal renders as a single hue.
  const Signal c = constant_signal(ManifoldKind::circle(), {17},
                                   circle_point(0.8));
  const RasterImage img = render_signal(c, 4);
  CHECK(img.width == 17 * 4);
  CHECK(img.height == 32);
  for (std::size_t px = 3; px < img.rgb.size(); px += 3) {
    CHECK(img.rgb[px] == img.rgb[0]);
    CHECK(img.rgb[px + 1] == img.rgb[1]);
    CHECK(img.rgb[px + 2] == img.rgb[2]);
  }

  // 2D sphere image.
  RandomStream rs(92);
  Signal s2 = testutil::random_signal(ManifoldKind::sphere2(), 6, rs);
  s2.shape = {2, 3};
  const RasterImage sphere_img = render_signal(s2, 5);
  CHECK(sphere_img.width == 15);
  CHECK(sphere_img.height == 10);

  // Spd3 glyphs: white background plus colored ellipses.
  Signal t = testutil::random_signal(ManifoldKind::spd3(), 4, rs);
  t.shape = {2, 2};
  const RasterImage glyphs = render_signal(t, 16);
  CHECK(glyphs.width == 32);
  CHECK(glyphs.height == 32);
  bool has_white = false, has_color = false;
  for (std::size_t px = 0; px < glyphs.rgb.size(); px += 3) {
    if (glyphs.rgb[px] == 255 && glyphs.rgb[px + 1] == 255 &&
        glyphs.rgb[px + 2] == 255)
      has_white = true;
    else
      has_color = true;
  }
  CHECK(has_white);
  CHECK(has_color);

  // PPM header.
  const std::string path = temp_path("mvr_render_test.ppm");
  write_ppm(path, img);
  const std::string bytes = slurp(path);
  CHECK(bytes.rfind("P6\n68 32\n255\n", 0) == 0);
  CHECK(bytes.size() == 13 + static_cast<std::size_t>(68) * 32 * 3);
  std::remove(path.c_str());
}

TEST_CASE("trace csv format") {
  const std::string path = temp_path("mvr_trace_test.csv");
  write_trace_csv(path, {1.5, 0.25, 0.125});
  const std::string got = slurp(path);
  CHECK(got == "iteration,functional\n1,1.5\n2,0.25\n3,0.125\n");
  std::remove(path.c_str());
}
