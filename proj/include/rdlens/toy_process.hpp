#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rdlens/errors.hpp"
#include "rdlens/io.hpp"
#include "rdlens/prob.hpp"
#include "rdlens/rng.hpp"

namespace rdlens {

inline constexpr const char* kToyProcessSchema = "toyprocess-v1";

// The calibrated data-generating process: Bernoulli latent, per-class
// Gaussians, 30 equally spaced bins, and the induced exact joint p(x, z*).
// Rows of `joint` index the observed bin x, columns the true class z*.
struct ToyProcess {
  double p1;                      // probability of latent class 1 (class 0 carries 1 - p1)
  std::array<double, 2> mu;       // per-class Gaussian means
  std::array<double, 2> sigma;    // per-class Gaussian standard deviations
  std::vector<double> bin_edges;  // bin_count + 1 ascending, uniformly spaced
  JointDist joint;

  std::size_t bin_count() const { return bin_edges.size() - 1; }

  std::vector<double> bin_centers() const {
    std::vector<double> c(bin_count());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (bin_edges[j] + bin_edges[j + 1]);
    return c;
  }

  FiniteDist data_marginal() const { return marginalize(joint, Axis::Row); }
  FiniteDist class_marginal() const { return marginalize(joint, Axis::Col); }
};

struct CalibrationReport {
  double target_mi = 0.0;
  double achieved_mi = 0.0;
  double sigma = 0.0;
  std::size_t iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

namespace detail {

// N(mu, s) mass of [a, b], evaluated from the nearer tail via erfc so that
// far-tail bins keep full relative precision instead of cancelling to 0.
inline double normal_bin_mass(double a, double b, double mu, double s) {
  const double inv = 1.0 / (s * std::sqrt(2.0));
  const double za = (a - mu) * inv;
  const double zb = (b - mu) * inv;
  if (za + zb > 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  return 0.5 * (std::erfc(-zb) - std::erfc(-za));
}

}  // namespace detail

// joint[x][z] = p(z) * N(mu_z, sigma_z) mass of bin x, with the two outer
// bins absorbing the Gaussian tails.
inline ToyProcess build_toy_process(double p1, std::array<double, 2> mu,
                                    std::array<double, 2> sigma, std::size_t bin_count,
                                    double span_lo, double span_hi) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw InvalidConfig("build_toy_process: need 0 < p1 < 1");
  if (!(sigma[0] > 0.0 && sigma[1] > 0.0))
    throw InvalidConfig("build_toy_process: need sigma > 0");
  if (bin_count < 2) throw InvalidConfig("build_toy_process: need bin_count >= 2");
  if (!(span_lo < span_hi) || mu[0] < span_lo || mu[0] > span_hi || mu[1] < span_lo ||
      mu[1] > span_hi)
    throw InvalidGeometry("build_toy_process: bin span must cover both means");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> edges(bin_count + 1);
  const double width = (span_hi - span_lo) / static_cast<double>(bin_count);
  for (std::size_t k = 0; k <= bin_count; ++k)
    edges[k] = span_lo + width * static_cast<double>(k);

  const std::array<double, 2> pz = {1.0 - p1, p1};
  std::vector<double> table(bin_count * 2);
  for (std::size_t j = 0; j < bin_count; ++j) {
    const double a = j == 0 ? -inf : edges[j];
    const double b = j == bin_count - 1 ? inf : edges[j + 1];
    for (std::size_t z = 0; z < 2; ++z)
      table[j * 2 + z] = pz[z] * detail::normal_bin_mass(a, b, mu[z], sigma[z]);
  }
  return ToyProcess{p1, mu, sigma, std::move(edges),
                    JointDist(std::move(table), bin_count, 2)};
}

struct ToyGeometry {
  double p1 = 0.3;
  std::array<double, 2> mu = {-1.0, 1.0};
  std::size_t bin_count = 30;
  double span_lo = -7.0;
  double span_hi = 7.0;
};

// Bisection on a shared sigma: I(x; z*) is continuous and strictly
// decreasing in sigma under fixed geometry.
inline std::pair<ToyProcess, CalibrationReport> calibrate_noise(
    double target_mi, const ToyGeometry& geom = {}, double bracket_lo = 0.02,
    double bracket_hi = 20.0, double tol = 1e-6, std::size_t max_iter = 200) {
  auto mi_at = [&](double s) {
    return mutual_information(
        build_toy_process(geom.p1, geom.mu, {s, s}, geom.bin_count, geom.span_lo, geom.span_hi)
            .joint);
  };
  const double mi_lo = mi_at(bracket_lo);
  const double mi_hi = mi_at(bracket_hi);
  if (!(mi_lo > target_mi && target_mi > mi_hi))
    throw BracketFailure("calibrate_noise: bracket MI [" + fmt_double(mi_hi) + ", " +
                             fmt_double(mi_lo) + "] does not straddle target " +
                             fmt_double(target_mi),
                         mi_lo, mi_hi);

  double lo = bracket_lo, hi = bracket_hi;
  double mid = 0.5 * (lo + hi);
  double achieved = mi_at(mid);
  std::size_t it = 0;
  while (it < max_iter && std::abs(achieved - target_mi) > tol) {
    ++it;
    if (achieved > target_mi)
      lo = mid;
    else
      hi = mid;
    mid = 0.5 * (lo + hi);
    achieved = mi_at(mid);
  }
  ToyProcess tp =
      build_toy_process(geom.p1, geom.mu, {mid, mid}, geom.bin_count, geom.span_lo, geom.span_hi);
  return {std::move(tp),
          CalibrationReport{target_mi, achieved, mid, it, bracket_lo, bracket_hi}};
}

struct TruePosteriors {
  CondDist z_given_x;  // p(z*|x), bin_count x 2
  CondDist x_given_z;  // p(x|z*), 2 x bin_count
  FiniteDist px;       // p*(x)
};

// Exact Bayes inversion of tp.joint; the ingredients of the hand-constructed
// optimal reference model.
inline TruePosteriors true_posteriors(const ToyProcess& tp) {
  return TruePosteriors{posterior(tp.joint, Axis::Row), posterior(tp.joint, Axis::Col),
                        tp.data_marginal()};
}

// Demonstration-only sampler; training consumes the exact p*(x) directly.
inline std::vector<std::pair<std::size_t, std::size_t>> sample(const ToyProcess& tp,
                                                               std::size_t n,
                                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double u = rng.next_double();
    double acc = 0.0;
    std::size_t x = tp.joint.n_rows() - 1, z = 1;
    bool found = false;
    for (std::size_t j = 0; j < tp.joint.n_rows() && !found; ++j) {
      for (std::size_t c = 0; c < 2 && !found; ++c) {
        acc += tp.joint(j, c);
        if (u < acc) {
          x = j;
          z = c;
          found = true;
        }
      }
    }
    out.emplace_back(x, z);
  }
  return out;
}

inline nlohmann::json to_json(const ToyProcess& tp) {
  return nlohmann::json{{"schema", kToyProcessSchema},
                        {"p1", tp.p1},
                        {"mu", tp.mu},
                        {"sigma", tp.sigma},
                        {"bin_edges", tp.bin_edges}};
}

inline nlohmann::json to_json(const CalibrationReport& r) {
  return nlohmann::json{{"target_mi", r.target_mi},   {"achieved_mi", r.achieved_mi},
                        {"sigma", r.sigma},           {"iterations", r.iterations},
                        {"bracket_lo", r.bracket_lo}, {"bracket_hi", r.bracket_hi}};
}

// Rebuilds the joint from the stored fields; the construction is
// deterministic, so a reloaded process is bit-identical to the saved one.
inline ToyProcess toy_process_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j["schema"] != kToyProcessSchema)
    throw SchemaError("toy process: expected schema " + std::string(kToyProcessSchema));
  const auto edges = j.at("bin_edges").get<std::vector<double>>();
  if (edges.size() < 3) throw SchemaError("toy process: bad bin_edges");
  ToyProcess tp = build_toy_process(j.at("p1").get<double>(),
                                    j.at("mu").get<std::array<double, 2>>(),
                                    j.at("sigma").get<std::array<double, 2>>(),
                                    edges.size() - 1, edges.front(), edges.back());
  return tp;
}

inline void save_toy_process(const ToyProcess& tp, const std::filesystem::path& path,
                             const CalibrationReport* calib = nullptr) {
  nlohmann::json j = to_json(tp);
  if (calib) j["calibration"] = to_json(*calib);
  atomic_write_file(path, j.dump(2) + "\n");
}

inline ToyProcess load_toy_process(const std::filesystem::path& path) {
  return toy_process_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace rdlens
