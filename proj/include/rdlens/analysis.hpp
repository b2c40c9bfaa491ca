#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rdlens/io.hpp"
#include "rdlens/model.hpp"
#include "rdlens/objectives.hpp"
#include "rdlens/prob.hpp"
#include "rdlens/toy_process.hpp"

namespace rdlens {

inline constexpr const char* kFig2Schema = "fig2-v1";

// Latent clustering against the true classes: per-symbol argmax assignment,
// per-class mass, and the fraction of induced latent mass whose symbol's
// majority class matches its source class.
struct ClusterReport {
  std::vector<int> assignment;          // latent symbol -> class {0, 1}, ties to 0
  std::array<double, 2> mass_per_class = {0.0, 0.0};
  double purity = 0.0;
};

// Two sub-normalized latent profiles (one per true class) in, report out.
// Invariant under any relabeling of the latent symbols.
inline ClusterReport cluster_match(const std::vector<std::array<double, 2>>& e_z_class) {
  ClusterReport rep;
  rep.assignment.resize(e_z_class.size());
  for (std::size_t i = 0; i < e_z_class.size(); ++i) {
    const int cls = e_z_class[i][1] > e_z_class[i][0] ? 1 : 0;
    rep.assignment[i] = cls;
    rep.mass_per_class[cls] += e_z_class[i][0] + e_z_class[i][1];
    rep.purity += std::max(e_z_class[i][0], e_z_class[i][1]);
  }
  return rep;
}

// The derived distributions of the toy-model diagnostic figure.
struct Fig2Report {
  FiniteDist g_x;       // generative data marginal  sum_z m(z) d(x|z)
  FiniteDist d_x;       // reconstruction distribution
  FiniteDist e_z;       // induced latent marginal   sum_x p*(x) e(z|x)
  std::vector<std::array<double, 2>> e_z_class;  // per-class latent profiles
  CondDist xfer;        // p(x'|x) = sum_z e(z|x) d(x'|z)
  double kl_p_g = 0.0;  // KL(p*(x) || g(x))
  ClusterReport cluster;

  Fig2Report(FiniteDist g, FiniteDist dd, FiniteDist ez,
             std::vector<std::array<double, 2>> ezc, CondDist xf)
      : g_x(std::move(g)), d_x(std::move(dd)), e_z(std::move(ez)),
        e_z_class(std::move(ezc)), xfer(std::move(xf)) {}
};

inline Fig2Report fig2(const ToyProcess& tp, const Model& m) {
  const FiniteDist px = tp.data_marginal();
  const std::size_t nb = px.size();
  const std::size_t k = m.encoder.n_cols();
  if (m.encoder.n_rows() != nb || m.decoder.n_rows() != k || m.decoder.n_cols() != nb)
    throw DimensionMismatch("fig2: alphabets inconsistent with the process");

  FiniteDist g_x = generative_marginal(m);

  // d(x) = sum_{x'} sum_z p*(x') e(z|x') d(x|z), written out directly
  std::vector<double> d_x(nb, 0.0);
  for (std::size_t xp = 0; xp < nb; ++xp)
    for (std::size_t i = 0; i < k; ++i) {
      const double w = px[xp] * m.encoder(xp, i);
      if (w == 0.0) continue;
      for (std::size_t x = 0; x < nb; ++x) d_x[x] += w * m.decoder(i, x);
    }

  std::vector<double> e_z(k, 0.0);
  std::vector<std::array<double, 2>> e_z_class(k, {0.0, 0.0});
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      const double e = m.encoder(j, i);
      e_z[i] += px[j] * e;
      e_z_class[i][0] += tp.joint(j, 0) * e;
      e_z_class[i][1] += tp.joint(j, 1) * e;
    }

  std::vector<FiniteDist> xfer_rows;
  xfer_rows.reserve(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    std::vector<double> row(nb, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double e = m.encoder(j, i);
      if (e == 0.0) continue;
      for (std::size_t x = 0; x < nb; ++x) row[x] += e * m.decoder(i, x);
    }
    xfer_rows.emplace_back(std::move(row));
  }

  Fig2Report rep(std::move(g_x), FiniteDist(std::move(d_x)), FiniteDist(std::move(e_z)),
                 std::move(e_z_class), CondDist(std::move(xfer_rows)));

  rep.kl_p_g = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    if (px[j] == 0.0) continue;
    if (rep.g_x[j] == 0.0) {
      rep.kl_p_g = std::numeric_limits<double>::infinity();
      break;
    }
    rep.kl_p_g += px[j] * std::log(px[j] / rep.g_x[j]);
  }

  rep.cluster = cluster_match(rep.e_z_class);
  return rep;
}

inline nlohmann::json to_json(const Fig2Report& r) {
  std::vector<std::vector<double>> ezc(2);
  for (const auto& pair : r.e_z_class) {
    ezc[0].push_back(pair[0]);
    ezc[1].push_back(pair[1]);
  }
  return nlohmann::json{
      {"schema", kFig2Schema},
      {"g_x", r.g_x.probs()},
      {"d_x", r.d_x.probs()},
      {"e_z", r.e_z.probs()},
      {"e_z_class", ezc},
      {"kl_p_g", r.kl_p_g},
      {"cluster",
       {{"assignment", r.cluster.assignment},
        {"mass_per_class", r.cluster.mass_per_class},
        {"purity", r.cluster.purity}}}};
}

// Plain numeric rows, one line per conditioning symbol.
inline std::string matrix_csv(const CondDist& c) {
  std::string out;
  for (std::size_t i = 0; i < c.n_rows(); ++i) {
    std::vector<std::string> fields;
    fields.reserve(c.n_cols());
    for (std::size_t j = 0; j < c.n_cols(); ++j) fields.push_back(fmt_double(c(i, j)));
    out += csv_row(fields);
  }
  return out;
}

}  // namespace rdlens
