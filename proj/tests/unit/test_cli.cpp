#include "pnpmri/weights.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

using namespace pnpmri;
using namespace pnpmri::testing;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string &args) {
  const std::string cmd = std::string("\"") + PNPMRI_CLI_PATH + "\" " + args + " 2>&1";
  Run r;
  FILE *p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), int(buf.size()), p)) {
    r.out += buf.data();
  }
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path &p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("recon --no-such-flag").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("eval of an image against itself reports the cap") {
  TempDir dir("cli_eval");
  const Run ph = cli("phantom -o " + q(dir / "x.cplx") + " --nx 16 --ny 16 --nt 4 --seed 3");
  REQUIRE(ph.code == 0);
  const Run ev = cli("eval " + q(dir / "x.cplx") + " " + q(dir / "x.cplx"));
  CHECK(ev.code == 0);
  CHECK(ev.out.find("rsnr_db inf (capped at 300)") != std::string::npos);
}

TEST_CASE("malformed inputs exit with code 3") {
  TempDir dir("cli_format");
  {
    std::ofstream f(dir / "bad.cplx", std::ios::binary);
    f << "NOPE";
  }
  CHECK(cli("eval " + q(dir / "bad.cplx") + " " + q(dir / "bad.cplx")).code == 3);
}

TEST_CASE("certify exits with code 4 on a violating weight file") {
  TempDir dir("cli_cert");
  std::vector<ConvLayer3D> layers = random_denoiser_net(1, 8, true, 1.5).layers();
  const DenoiserNet ok(layers, true);
  save_weights(ok, dir / "ok.pnpd");
  layers[3].declared_spectral_norm = 1.0f;
  save_weights(DenoiserNet(layers, true), dir / "bad.pnpd");
  const Run good = cli("certify " + q(dir / "ok.pnpd"));
  CHECK(good.code == 0);
  const Run bad = cli("certify " + q(dir / "bad.pnpd"));
  CHECK(bad.code == 4);
  CHECK(bad.out.find("layer 3") != std::string::npos);
}

TEST_CASE("fully sampled noiseless reconstruction through the command line") {
  TempDir dir("cli_recon");
  REQUIRE(cli("phantom -o " + q(dir / "x.cplx") + " --nx 16 --ny 16 --nt 4 --seed 5").code == 0);
  REQUIRE(cli("mask -o " + q(dir / "m.cplx") + " --nkx 16 --nky 16 --nt 4 -R 1 --calib 0 --seed 5").code == 0);
  REQUIRE(cli("simulate -i " + q(dir / "x.cplx") + " --mask " + q(dir / "m.cplx") + " --coils 4 -o " +
              q(dir / "k.cplx") + " --maps-out " + q(dir / "s.cplx") + " --seed 5")
              .code == 0);
  const Run r = cli("recon -k " + q(dir / "k.cplx") + " --mask " + q(dir / "m.cplx") + " --maps " +
                    q(dir / "s.cplx") + " --solver cg-sense -p iters=10 --reference " + q(dir / "x.cplx") +
                    " -o " + q(dir / "r.cplx") + " --report " + q(dir / "r.json") + " -q");
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("rsnr_db ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 8)) >= 100.0);
  CHECK(std::filesystem::exists(dir / "r.json"));

  const Run bad = cli("recon -k " + q(dir / "k.cplx") + " --mask " + q(dir / "m.cplx") + " --maps " +
                      q(dir / "s.cplx") + " --solver admm-pnp -p nu=-1");
  CHECK(bad.code == 5);
}
