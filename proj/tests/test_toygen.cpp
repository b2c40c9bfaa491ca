#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rdlens/toy_process.hpp"

using namespace rdlens;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("build_toy_process limiting regimes") {
  // indistinguishable classes: MI ~ 0
  ToyProcess flat = build_toy_process(0.3, {-1.0, 1.0}, {14e6, 14e6}, 30, -7.0, 7.0);
  REQUIRE(mutual_information(flat.joint) == Approx(0.0).margin(1e-6));

  // separation of 20 sigma: MI approaches the latent entropy
  ToyProcess split = build_toy_process(0.3, {-3.5, 3.5}, {0.35, 0.35}, 30, -7.0, 7.0);
  REQUIRE(mutual_information(split.joint) == Approx(0.6108643020548935).margin(1e-3));
}

TEST_CASE("build_toy_process validation") {
  REQUIRE_THROWS_AS(build_toy_process(0.3, {-9.0, 1.0}, {1.0, 1.0}, 30, -7.0, 7.0),
                    InvalidGeometry);
  REQUIRE_THROWS_AS(build_toy_process(0.0, {-1.0, 1.0}, {1.0, 1.0}, 30, -7.0, 7.0),
                    InvalidConfig);
  REQUIRE_THROWS_AS(build_toy_process(0.3, {-1.0, 1.0}, {0.0, 1.0}, 30, -7.0, 7.0),
                    InvalidConfig);
  REQUIRE_THROWS_AS(build_toy_process(0.3, {-1.0, 1.0}, {1.0, 1.0}, 1, -7.0, 7.0),
                    InvalidConfig);
}

TEST_CASE("column sums equal the class prior; tails are absorbed") {
  ToyProcess tp = build_toy_process(0.3, {-1.0, 1.0}, {0.6, 0.6}, 30, -7.0, 7.0);
  FiniteDist pz = tp.class_marginal();
  REQUIRE(pz[0] == Approx(0.7).margin(1e-12));
  REQUIRE(pz[1] == Approx(0.3).margin(1e-12));
  // every bin keeps strictly positive mass thanks to tail-accurate erfc
  FiniteDist px = tp.data_marginal();
  for (std::size_t j = 0; j < px.size(); ++j) REQUIRE(px[j] > 0.0);
}

TEST_CASE("calibration hits the target and reports honestly") {
  auto [tp, rep] = calibrate_noise(0.5);
  REQUIRE(std::abs(rep.achieved_mi - 0.5) <= 1e-6);
  REQUIRE(mutual_information(tp.joint) == Approx(rep.achieved_mi).epsilon(1e-12));
  REQUIRE(rep.sigma > 0.0);
  REQUIRE(rep.iterations <= 200);
  REQUIRE(mutual_information(tp.joint) == Approx(0.5).margin(1e-3));
}

TEST_CASE("calibration bracket failure above the latent entropy") {
  REQUIRE_THROWS_AS(calibrate_noise(0.65), BracketFailure);
  try {
    calibrate_noise(0.65);
  } catch (const BracketFailure& e) {
    REQUIRE(e.bracket_lo_mi < 0.65);  // even the sharpest bracket cannot reach it
  }
}

TEST_CASE("calibrated sigma shrinks as the target grows") {
  auto [tp50, rep50] = calibrate_noise(0.5);
  auto [tp25, rep25] = calibrate_noise(0.25);
  REQUIRE(rep25.sigma > rep50.sigma);
}

TEST_CASE("MI is monotone decreasing in sigma on a grid") {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    double s = 0.1 + 0.45 * i;
    double mi = mutual_information(
        build_toy_process(0.3, {-1.0, 1.0}, {s, s}, 30, -7.0, 7.0).joint);
    REQUIRE(mi < prev);
    prev = mi;
  }
}

TEST_CASE("affine shift of means and span leaves the joint unchanged") {
  ToyProcess a = build_toy_process(0.3, {-1.0, 1.0}, {0.6, 0.6}, 30, -7.0, 7.0);
  ToyProcess b = build_toy_process(0.3, {1.5, 3.5}, {0.6, 0.6}, 30, -4.5, 9.5);
  for (std::size_t j = 0; j < 30; ++j)
    for (std::size_t z = 0; z < 2; ++z)
      REQUIRE(b.joint(j, z) == Approx(a.joint(j, z)).margin(1e-12));
}

TEST_CASE("true posteriors") {
  // perfect separation: one-hot class posteriors
  ToyProcess split = build_toy_process(0.3, {-3.5, 3.5}, {0.2, 0.2}, 30, -7.0, 7.0);
  TruePosteriors post = true_posteriors(split);
  FiniteDist px = split.data_marginal();
  for (std::size_t j = 0; j < 30; ++j) {
    if (px[j] < 1e-12) continue;
    double top = std::max(post.z_given_x(j, 0), post.z_given_x(j, 1));
    REQUIRE(top > 1.0 - 1e-9);
  }

  // infinite noise: every posterior row equals the prior
  ToyProcess flat = build_toy_process(0.3, {-1.0, 1.0}, {14e6, 14e6}, 30, -7.0, 7.0);
  TruePosteriors fpost = true_posteriors(flat);
  for (std::size_t j = 0; j < 30; ++j) {
    REQUIRE(fpost.z_given_x(j, 0) == Approx(0.7).margin(1e-6));
    REQUIRE(fpost.z_given_x(j, 1) == Approx(0.3).margin(1e-6));
  }

  // calibrated: z-marginal is exactly the prior
  auto [tp, rep] = calibrate_noise(0.5);
  FiniteDist pz = tp.class_marginal();
  REQUIRE(pz[0] == Approx(0.7).margin(1e-12));
  REQUIRE(pz[1] == Approx(0.3).margin(1e-12));
}

TEST_CASE("bin edges are uniformly spaced and strictly ascending") {
  ToyProcess tp = build_toy_process(0.3, {-1.0, 1.0}, {0.6, 0.6}, 30, -7.0, 7.0);
  REQUIRE(tp.bin_edges.size() == 31);
  const double width = tp.bin_edges[1] - tp.bin_edges[0];
  for (std::size_t k = 1; k < tp.bin_edges.size(); ++k) {
    REQUIRE(tp.bin_edges[k] > tp.bin_edges[k - 1]);
    REQUIRE(tp.bin_edges[k] - tp.bin_edges[k - 1] == Approx(width).margin(1e-12));
  }
}

TEST_CASE("toyprocess-v1 round-trip is exact") {
  auto [tp, rep] = calibrate_noise(0.5);
  auto path = temp_file("rdlens_test_tp.json");
  save_toy_process(tp, path, &rep);
  ToyProcess back = load_toy_process(path);
  REQUIRE(back.joint.table() == tp.joint.table());
  REQUIRE(back.bin_edges == tp.bin_edges);
  REQUIRE(back.sigma == tp.sigma);
  std::filesystem::remove(path);
}

TEST_CASE("schema mismatch rejected") {
  nlohmann::json j = to_json(build_toy_process(0.3, {-1.0, 1.0}, {0.6, 0.6}, 30, -7.0, 7.0));
  j["schema"] = "toyprocess-v0";
  REQUIRE_THROWS_AS(toy_process_from_json(j), SchemaError);
}

TEST_CASE("demonstration sampler is deterministic and in-range") {
  ToyProcess tp = build_toy_process(0.3, {-1.0, 1.0}, {0.6, 0.6}, 30, -7.0, 7.0);
  auto a = sample(tp, 100, 7);
  auto b = sample(tp, 100, 7);
  REQUIRE(a == b);
  for (auto [x, z] : a) {
    REQUIRE(x < 30);
    REQUIRE(z < 2);
  }
}
