#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rdlens/io.hpp"
#include "rdlens/model.hpp"
#include "rdlens/prob.hpp"

namespace rdlens {

inline constexpr double kEdgeTol = 1e-6;  // phase-diagram edge tolerance, nats

// D = -sum_x p*(x) sum_z e(z|x) ln d(x|z), the reconstruction negative log
// likelihood. +inf (not an error) encodes a support failure: the decoder has
// no mass where the encoder routes some.
inline double distortion(const FiniteDist& px, const Model& m) {
  double d = 0.0;
  for (std::size_t j = 0; j < px.size(); ++j) {
    if (px[j] == 0.0) continue;
    for (std::size_t i = 0; i < m.encoder.n_cols(); ++i) {
      const double e = m.encoder(j, i);
      if (e == 0.0) continue;
      const double dec = m.decoder(i, j);
      if (dec == 0.0) return std::numeric_limits<double>::infinity();
      d -= px[j] * e * std::log(dec);
    }
  }
  return d;
}

// R = sum_x p*(x) KL(e(.|x) || m(z)): the average relative KL divergence
// between the encoding distribution and the learned marginal approximation.
inline double rate(const FiniteDist& px, const Model& m) {
  double r = 0.0;
  for (std::size_t j = 0; j < px.size(); ++j) {
    if (px[j] == 0.0) continue;
    for (std::size_t i = 0; i < m.encoder.n_cols(); ++i) {
      const double e = m.encoder(j, i);
      if (e == 0.0) continue;
      if (m.marginal[i] == 0.0) return std::numeric_limits<double>::infinity();
      r += px[j] * e * std::log(e / m.marginal[i]);
    }
  }
  return r;
}

inline double beta_loss(double d, double r, double beta) { return d + beta * r; }

// D + |sigma - R|: pins the solution to a chosen rate among equal-ELBO optima.
inline double target_rate_loss(double d, double r, double sigma) {
  return d + std::abs(sigma - r);
}

// Generative-path marginal over the data alphabet: g(x) = sum_z m(z) d(x|z).
inline FiniteDist generative_marginal(const Model& m) {
  std::vector<double> g(m.decoder.n_cols(), 0.0);
  for (std::size_t i = 0; i < m.marginal.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += m.marginal[i] * m.decoder(i, j);
  return FiniteDist(std::move(g));
}

struct GenerativeBounds {
  double e_bound;      // E <= I_gen: distortion as measured through the encoder
  double g_bound;      // G >= I_gen: rate in the generative model
  double i_gen_exact;  // brute-force MI of the joint m(z) d(x|z)
};

// E = sum_z m(z) sum_x d(x|z) ln[e(z|x)/m(z)],
// G = sum_z m(z) sum_x d(x|z) ln[d(x|z)/q(x)].
inline GenerativeBounds generative_bounds(const Model& m, const FiniteDist& q_x) {
  const double inf = std::numeric_limits<double>::infinity();
  double e_bound = 0.0, g_bound = 0.0;
  for (std::size_t i = 0; i < m.marginal.size(); ++i) {
    const double mz = m.marginal[i];
    if (mz == 0.0) continue;
    for (std::size_t j = 0; j < m.decoder.n_cols(); ++j) {
      const double d = m.decoder(i, j);
      if (d == 0.0) continue;
      const double enc = m.encoder(j, i);
      e_bound += mz * d * (enc == 0.0 ? -inf : std::log(enc / mz));
      if (q_x[j] == 0.0)
        g_bound = inf;
      else if (g_bound != inf)
        g_bound += mz * d * std::log(d / q_x[j]);
    }
  }
  const double i_gen = mutual_information(compose_joint(m.marginal, m.decoder));
  return GenerativeBounds{e_bound, g_bound, i_gen};
}

struct ReparamBounds {
  double u;  // U = sum_x p*(x) sum_z e(z|x) ln[d(x|z)/q(x)]
  double s;  // S = KL(p* || q)
};

// The identity U - S = H - D couples these to the representational bounds.
inline ReparamBounds reparam_bounds(const FiniteDist& px, const Model& m,
                                    const FiniteDist& q_x) {
  const double inf = std::numeric_limits<double>::infinity();
  double u = 0.0, s = 0.0;
  for (std::size_t j = 0; j < px.size(); ++j) {
    if (px[j] == 0.0) continue;
    if (q_x[j] == 0.0) return ReparamBounds{-inf, inf};
    s += px[j] * std::log(px[j] / q_x[j]);
    for (std::size_t i = 0; i < m.encoder.n_cols(); ++i) {
      const double e = m.encoder(j, i);
      if (e == 0.0) continue;
      const double d = m.decoder(i, j);
      u += px[j] * e * (d == 0.0 ? -inf : std::log(d / q_x[j]));
    }
  }
  return ReparamBounds{u, s};
}

enum class Feasibility {
  FeasibleInterior,
  AutoEncodingEdge,
  AutoDecodingEdge,
  Diagonal,
  Infeasible
};

inline std::string to_string(Feasibility f) {
  switch (f) {
    case Feasibility::FeasibleInterior: return "feasible-interior";
    case Feasibility::AutoEncodingEdge: return "auto-encoding-edge";
    case Feasibility::AutoDecodingEdge: return "auto-decoding-edge";
    case Feasibility::Diagonal: return "diagonal";
    default: return "infeasible";
  }
}

// Classifies a point in the RD plane. Infeasible signals a bug: exact
// computation cannot produce R + D < H.
inline Feasibility feasibility(double h, double d, double r, double tol = kEdgeTol) {
  if (r < -tol || d < -tol || r + d < h - tol) return Feasibility::Infeasible;
  if (r <= tol) return Feasibility::AutoDecodingEdge;
  if (d <= tol) return Feasibility::AutoEncodingEdge;
  if (r + d <= h + tol) return Feasibility::Diagonal;
  return Feasibility::FeasibleInterior;
}

// How the variational data marginal q(x) is chosen for the E/G/U/S bounds.
// The free-softmax q of the framework has closed-form optima at toy scale:
// the exact generative marginal minimizes G, the data marginal minimizes S.
enum class QxChoice { GenerativeMarginal, DataMarginal, Uniform };

inline std::string to_string(QxChoice q) {
  switch (q) {
    case QxChoice::GenerativeMarginal: return "generative";
    case QxChoice::DataMarginal: return "data";
    default: return "uniform";
  }
}

inline QxChoice parse_qx_choice(const std::string& s) {
  if (s == "generative") return QxChoice::GenerativeMarginal;
  if (s == "data") return QxChoice::DataMarginal;
  if (s == "uniform") return QxChoice::Uniform;
  throw InvalidConfig("qx: expected generative|data|uniform, got '" + s + "'");
}

inline FiniteDist resolve_qx(QxChoice choice, const FiniteDist& px, const Model& m) {
  switch (choice) {
    case QxChoice::GenerativeMarginal: return generative_marginal(m);
    case QxChoice::DataMarginal: return px;
    default: return FiniteDist::uniform(px.size());
  }
}

// Every information functional of one evaluated model, all in nats.
struct BoundsReport {
  double h = 0.0;       // data entropy, fixed by the dataset
  double d = 0.0;       // distortion
  double r = 0.0;       // rate
  double i_rep = 0.0;   // exact encoder-path mutual information
  double e = 0.0;       // lower bound on I_gen
  double g = 0.0;       // upper bound on I_gen
  double i_gen = 0.0;   // exact generative-path mutual information
  double u = 0.0;
  double s = 0.0;
  double elbo = 0.0;    // -(D + R)
  Feasibility feas = Feasibility::FeasibleInterior;
};

inline BoundsReport evaluate_bounds(const FiniteDist& px, const Model& m,
                                    const FiniteDist& q_x) {
  BoundsReport rep;
  rep.h = entropy(px);
  rep.d = distortion(px, m);
  rep.r = rate(px, m);
  rep.i_rep = mutual_information(compose_joint(px, m.encoder));
  const GenerativeBounds gb = generative_bounds(m, q_x);
  rep.e = gb.e_bound;
  rep.g = gb.g_bound;
  rep.i_gen = gb.i_gen_exact;
  const ReparamBounds rb = reparam_bounds(px, m, q_x);
  rep.u = rb.u;
  rep.s = rb.s;
  rep.elbo = -(rep.d + rep.r);
  rep.feas = feasibility(rep.h, rep.d, rep.r);
  return rep;
}

inline BoundsReport evaluate_bounds(const FiniteDist& px, const Model& m,
                                    QxChoice qx = QxChoice::GenerativeMarginal) {
  return evaluate_bounds(px, m, resolve_qx(qx, px, m));
}

// The plot-data contract for phase-diagram and RD-curve figures.
inline std::string bounds_csv_header() {
  return "objective,beta_or_sigma,seed,H,D,R,elbo,I_rep,E,G,I_gen,U,S,feasibility\n";
}

inline std::string bounds_csv_row(const Objective& obj, std::uint64_t seed,
                                  const BoundsReport& rep) {
  return csv_row({to_string(obj.kind), fmt_double(obj.value), std::to_string(seed),
                  fmt_double(rep.h), fmt_double(rep.d), fmt_double(rep.r),
                  fmt_double(rep.elbo), fmt_double(rep.i_rep), fmt_double(rep.e),
                  fmt_double(rep.g), fmt_double(rep.i_gen), fmt_double(rep.u),
                  fmt_double(rep.s), to_string(rep.feas)});
}

}  // namespace rdlens
