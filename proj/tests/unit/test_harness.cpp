#include "pnpmri/cplx_io.hpp"
#include "pnpmri/errors.hpp"
#include "pnpmri/experiment.hpp"
#include "pnpmri/metrics.hpp"
#include "pnpmri/png_io.hpp"
#include "pnpmri/weights.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>

using namespace pnpmri;
using namespace pnpmri::testing;

namespace {

std::string small_config(const std::string &extra_solvers = "") {
  return R"({
    "name": "small",
    "seeds": [1, 2],
    "phantom": {"nx": 24, "ny": 24, "nt": 6},
    "accelerations": [6, 8, 10],
    "calib_lines": 2,
    "n_coils": 4,
    "true_maps": true,
    "noise_snr_db": 30,
    "solvers": [
      {"label": "ZF", "type": "zero-filled"},
      {"label": "CG", "type": "cg-sense", "iters": [2, 5]})" +
         extra_solvers + R"(
    ]
  })";
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("rSNR definition") {
  Rng rng(1);
  const ComplexImage x = random_image({6, 5, 4}, rng);
  CHECK(rsnr(x, x) == kRsnrCap);
  CHECK(rsnr(x, cplx(0.5) * x) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(rsnr(x, cplx(0.5) * x) == doctest::Approx(6.0206).epsilon(1e-5));
  for (int k = 0; k < 10; ++k) {
    const ComplexImage e = x + cplx(0.1 * (k + 1)) * random_image(x.shape(), rng);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      num += std::norm(x[i]);
      den += std::norm(x[i] - e[i]);
    }
    REQUIRE(std::abs(rsnr(x, e) - 10.0 * std::log10(num / den)) < 1e-10);
  }
  CHECK_THROWS_AS(rsnr(ComplexImage(6, 5, 4), x), UndefinedMetricError);
  CHECK_THROWS_AS(rsnr(x, ComplexImage(6, 5, 3)), DimensionError);
  CHECK(snr_db(x, cplx(0.1) * x) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("CPLX files round-trip images, k-space, maps and masks") {
  TempDir dir("cplx");
  Rng rng(2);
  ComplexImage x = random_image({5, 4, 3}, rng);
  for (auto &v : x.values()) {
    v = cplx(float(v.real()), float(v.imag()));
  }
  write_image(dir / "x.cplx", x);
  CHECK(read_image(dir / "x.cplx") == x);

  MultiCoilKSpace y = random_kspace({3, 5, 4, 2}, rng);
  for (auto &v : y.values()) {
    v = cplx(float(v.real()), float(v.imag()));
  }
  write_kspace(dir / "y.cplx", y);
  CHECK(read_kspace(dir / "y.cplx") == y);
  CHECK(read_cplx(dir / "y.cplx").dims == std::vector<std::uint32_t>{5, 4, 2, 3});

  SensitivityMaps m = random_maps(3, 5, 4, rng);
  for (auto &v : m.values()) {
    v = cplx(float(v.real()), float(v.imag()));
  }
  write_maps(dir / "m.cplx", m);
  CHECK(read_maps(dir / "m.cplx").values().size() == m.values().size());
  CHECK(std::equal(m.values().begin(), m.values().end(), read_maps(dir / "m.cplx").values().begin()));

  MaskSpec ms;
  ms.nkx = ms.nky = 16;
  ms.nt = 4;
  ms.R = 4.0;
  ms.seed = 3;
  const SamplingMask mask = generate_mask(ms);
  write_mask(dir / "k.cplx", mask);
  const SamplingMask back = read_mask(dir / "k.cplx");
  CHECK(std::equal(mask.values().begin(), mask.values().end(), back.values().begin(), back.values().end()));
  CHECK(back.r_nominal() == doctest::Approx(acceleration_of(mask)));

  CHECK_THROWS_AS(read_image(dir / "y.cplx"), FormatError);
  CHECK_THROWS_AS(read_cplx(dir / "absent.cplx"), FormatError);
  {
    std::ofstream f(dir / "junk.cplx", std::ios::binary);
    f << "CPLXjunk";
  }
  CHECK_THROWS_AS(read_cplx(dir / "junk.cplx"), FormatError);
  auto bytes = slurp(dir / "x.cplx");
  bytes.pop_back();
  {
    std::ofstream f(dir / "short.cplx", std::ios::binary);
    f << bytes;
  }
  CHECK_THROWS_AS(read_cplx(dir / "short.cplx"), FormatError);
}

TEST_CASE("PNG round trip and montage geometry") {
  TempDir dir("png");
  GrayImage g{7, 3, {}};
  for (std::size_t i = 0; i < 21; ++i) {
    g.pixels.push_back(std::uint8_t(12 * i));
  }
  write_png(dir / "g.png", g);
  const GrayImage back = read_png(dir / "g.png");
  CHECK(back.width == 7);
  CHECK(back.height == 3);
  CHECK(back.pixels == g.pixels);

  Rng rng(4);
  const ComplexImage x = random_image({6, 5, 7}, rng);
  const GrayImage m = magnitude_montage(x);
  CHECK(m.width == 6 * 3);
  CHECK(m.height == 5 * 3);
  CHECK(*std::max_element(m.pixels.begin(), m.pixels.end()) == 255);
  const GrayImage e = error_montage(x, x);
  CHECK(std::all_of(e.pixels.begin(), e.pixels.end(), [](auto p) { return p == 0; }));
  const GrayImage tp = temporal_profile(x, 2);
  CHECK(tp.width == 6);
  CHECK(tp.height == 7);
  const std::vector<double> vals{0.0, 0.5, 1.0, 2.0};
  CHECK(to_gray(vals, 4, 1, 1.0).pixels == std::vector<std::uint8_t>{0, 128, 255, 255});
}

TEST_CASE("experiment configs: parse, validate and echo") {
  const ExperimentConfig cfg = parse_experiment_config(small_config());
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.phantom.nx == 24);
  CHECK(cfg.noise_snr_db.value() == 30.0);
  REQUIRE(cfg.solvers.size() == 2);
  const auto combos = cfg.solvers[1].combinations();
  REQUIRE(combos.size() == 2);
  CHECK(combos[0].at("iters") == 2.0);
  CHECK(combos[0].at("tol") == 1e-8);
  const ExperimentConfig again = parse_experiment_config(experiment_config_to_json(cfg));
  CHECK(experiment_config_to_json(again) == experiment_config_to_json(cfg));

  CHECK_THROWS_AS(parse_experiment_config("{"), FormatError);
  CHECK_THROWS_AS(parse_experiment_config("[]"), FormatError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"acceleration": [4]})"), FormatError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": "one"})"), FormatError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"accelerations": [0.5]})"), ParameterError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"walsh_block": 4})"), ParameterError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"solvers": [{"type": "lps", "denoiser": "cnn"}]})"), ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"solvers": [{"type": "lps"}, {"type": "lps"}]})"), ParameterError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"solvers": [{"type": "lps", "bogus": 1}]})"), ParameterError);
}

TEST_CASE("fully sampled noiseless least squares recovers the reference") {
  auto cfg = parse_experiment_config(R"({
    "seeds": [3], "phantom": {"nx": 24, "ny": 24, "nt": 4}, "accelerations": [1], "n_coils": 4,
    "true_maps": true, "solvers": [{"label": "CG", "type": "cg-sense", "iters": 10}]
  })");
  const ExperimentResult res = run_experiment(cfg);
  const TableEntry &e = res.entry("CG", 1.0);
  REQUIRE(e.ok);
  CHECK(e.mean_rsnr >= 100.0);
}

TEST_CASE("failing cells are recorded without stopping the run") {
  const ExperimentConfig cfg = parse_experiment_config(
      small_config(R"(, {"label": "DL", "type": "admm-pnp", "denoiser": "cnn", "weights": "missing.pnpd"})"));
  std::size_t seen = 0;
  const ExperimentResult res = run_experiment(cfg, [&](const CellResult &) { ++seen; });
  CHECK(seen == res.cells.size());
  CHECK(res.cells.size() == 3 * (2 + 4 + 2));
  for (double R : {6.0, 8.0, 10.0}) {
    CHECK_FALSE(res.entry("DL", R).ok);
    CHECK(res.entry("DL", R).failed_cells == 2);
    CHECK(res.entry("ZF", R).ok);
    CHECK(res.entry("CG", R).ok);
    CHECK(res.entry("CG", R).mean_rsnr >= res.entry("ZF", R).mean_rsnr);
  }
  const std::string text = results_to_text(res);
  CHECK(text.find("FAILED") != std::string::npos);
  CHECK(text.find("failed (2 cell(s))") != std::string::npos);
  const auto j = nlohmann::json::parse(results_to_json(res));
  CHECK(j.at("table").size() == 3);
  CHECK(j.at("cells").size() == res.cells.size());
}

TEST_CASE("results table has one row per acceleration and reproducible JSON") {
  TempDir dir("experiment");
  ExperimentConfig cfg = parse_experiment_config(small_config(), dir.path());
  cfg.output_dir = "out";
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  CHECK(results_to_json(a) == results_to_json(b));
  CHECK(slurp(dir / "out/results.json") == results_to_json(a));

  const std::string text = slurp(dir / "out/results.txt");
  std::size_t rows = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("     6", 0) == 0 || line.rfind("     8", 0) == 0 || line.rfind("    10", 0) == 0) {
      ++rows;
    }
  }
  CHECK(rows == 3);
  CHECK(std::filesystem::exists(dir / "out/reference_R8.png"));
  CHECK(std::filesystem::exists(dir / "out/mask_R8.cplx"));

  const auto entry = a.entry("CG", 8.0);
  CHECK(entry.per_seed.size() == 2);
  CHECK(entry.mean_rsnr == doctest::Approx((entry.per_seed[0] + entry.per_seed[1]) / 2));
  double best = -1e9;
  for (const auto &c : a.cells) {
    if (c.solver == "CG" && c.R == 8.0 && c.params.at("iters") == entry.params.at("iters")) {
      REQUIRE(c.ok);
    }
    best = std::max(best, c.solver == "CG" && c.R == 8.0 ? c.rsnr : best);
  }
  CHECK(best >= entry.mean_rsnr);
  CHECK_THROWS_AS(a.entry("nope", 8.0), ParameterError);
}

TEST_CASE("simulated datasets are deterministic and scored against the truth with true maps") {
  ExperimentConfig cfg = parse_experiment_config(small_config());
  const Dataset a = simulate_dataset(cfg, 8.0, 5);
  const Dataset b = simulate_dataset(cfg, 8.0, 5);
  CHECK(a.kspace == b.kspace);
  CHECK(a.reference == a.truth);
  CHECK(acceleration_of(a.mask) == doctest::Approx(8.0).epsilon(0.15));
  cfg.true_maps = false;
  const Dataset w = simulate_dataset(cfg, 8.0, 5);
  CHECK(w.truth == a.truth);
  CHECK_FALSE(w.reference == w.truth);
  cfg.n_virtual = 2;
  CHECK(simulate_dataset(cfg, 8.0, 5).kspace.nc() == 2);
}
