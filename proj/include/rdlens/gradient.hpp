#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rdlens/errors.hpp"
#include "rdlens/model.hpp"
#include "rdlens/objectives.hpp"
#include "rdlens/prob.hpp"

namespace rdlens {

inline constexpr double kKinkTol = 1e-12;  // |R - sigma| below this: zero subgradient

// Same shape as ModelParams, entries in nats per parameter-unit.
struct GradVector {
  std::vector<double> enc_w, enc_b, dec_w, dec_b, marg_logits;

  static GradVector zeros_like(const ModelParams& p) {
    GradVector g;
    g.enc_w.assign(p.enc_w.size(), 0.0);
    g.enc_b.assign(p.enc_b.size(), 0.0);
    g.dec_w.assign(p.dec_w.size(), 0.0);
    g.dec_b.assign(p.dec_b.size(), 0.0);
    g.marg_logits.assign(p.marg_logits.size(), 0.0);
    return g;
  }
};

namespace detail {

// Forward pass kept in log space: probabilities are exponentials of
// log-softmax rows, so ln e and ln d stay finite even where the realized
// probability underflows to zero.
struct Forward {
  std::size_t nb = 0, k = 0;
  std::vector<double> e, lne;  // nb x k, row-major by bin
  std::vector<double> d, lnd;  // k x nb, row-major by latent
  std::vector<double> m, lnm;  // k
  double big_d = 0.0, big_r = 0.0;
};

inline void log_softmax_into(const std::vector<double>& logits, std::size_t off,
                             std::size_t n, std::vector<double>& ln_out,
                             std::vector<double>& p_out) {
  double mx = logits[off];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[off + i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(logits[off + i] - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < n; ++i) {
    ln_out[off + i] = logits[off + i] - lse;
    p_out[off + i] = std::exp(ln_out[off + i]);
  }
}

inline Forward forward(const ModelParams& params, const FiniteDist& px,
                       const std::vector<double>& xvals,
                       const std::vector<double>& latent_vals) {
  Forward f;
  f.nb = xvals.size();
  f.k = params.latent_size();
  std::vector<double> logits(f.nb * f.k);

  for (std::size_t j = 0; j < f.nb; ++j)
    for (std::size_t i = 0; i < f.k; ++i) {
      const double u = params.enc_w[i] * xvals[j] - params.enc_b[i];
      logits[j * f.k + i] = -u * u;
    }
  f.e.resize(f.nb * f.k);
  f.lne.resize(f.nb * f.k);
  for (std::size_t j = 0; j < f.nb; ++j) log_softmax_into(logits, j * f.k, f.k, f.lne, f.e);

  logits.assign(f.k * f.nb, 0.0);
  for (std::size_t i = 0; i < f.k; ++i)
    for (std::size_t j = 0; j < f.nb; ++j) {
      const double u = params.dec_w[j] * latent_vals[i] - params.dec_b[j];
      logits[i * f.nb + j] = -u * u;
    }
  f.d.resize(f.k * f.nb);
  f.lnd.resize(f.k * f.nb);
  for (std::size_t i = 0; i < f.k; ++i) log_softmax_into(logits, i * f.nb, f.nb, f.lnd, f.d);

  f.m.resize(f.k);
  f.lnm.resize(f.k);
  log_softmax_into(params.marg_logits, 0, f.k, f.lnm, f.m);

  // D = -sum_jx p_j sum_i e_ji ln d_ij ; R = sum_j p_j sum_i e_ji (ln e_ji - ln m_i)
  for (std::size_t j = 0; j < f.nb; ++j) {
    for (std::size_t i = 0; i < f.k; ++i) {
      const double w = px[j] * f.e[j * f.k + i];
      if (w == 0.0) continue;
      f.big_d -= w * f.lnd[i * f.nb + j];
      f.big_r += w * (f.lne[j * f.k + i] - f.lnm[i]);
    }
  }
  return f;
}

// Rate-term multiplier in the total derivative dL = dD + lambda dR.
inline double rate_multiplier(const Objective& obj, double big_r, double rate_weight) {
  if (obj.kind == Objective::Kind::Beta) return rate_weight * obj.value;
  const double gap = big_r - obj.value;
  if (std::abs(gap) < kKinkTol) return 0.0;
  return rate_weight * (gap > 0.0 ? 1.0 : -1.0);
}

inline double objective_loss(const Objective& obj, double big_d, double big_r,
                             double rate_weight) {
  if (obj.kind == Objective::Kind::Beta) return big_d + rate_weight * obj.value * big_r;
  return big_d + rate_weight * std::abs(obj.value - big_r);
}

}  // namespace detail

struct LossParts {
  double loss = 0.0;
  double d = 0.0;
  double r = 0.0;
};

// rate_weight scales the objective's rate term; the trainer drives it from
// the anneal schedule and it defaults to 1 (the plain objective).
inline LossParts loss_value(const Objective& obj, const ModelParams& params,
                            const FiniteDist& px, const std::vector<double>& xvals,
                            const std::vector<double>& latent_vals, double rate_weight = 1.0) {
  detail::Forward f = detail::forward(params, px, xvals, latent_vals);
  return LossParts{detail::objective_loss(obj, f.big_d, f.big_r, rate_weight), f.big_d,
                   f.big_r};
}

inline LossParts loss_value(const Objective& obj, const ModelParams& params,
                            const FiniteDist& px, const std::vector<double>& xvals,
                            double rate_weight = 1.0) {
  return loss_value(obj, params, px, xvals, latent_grid(xvals, params.latent_size()),
                    rate_weight);
}

struct LossGrad {
  double loss = 0.0;
  double d = 0.0;
  double r = 0.0;
  GradVector grad;
};

// Reverse-mode differentiation through the two softmax realizations and the
// D/R sums. The computation graph is static, so the backward pass is written
// out term by term:
//   dL/de_ji = -p_j ln d_ij + lambda p_j (ln e_ji + 1 - ln m_i)
//   softmax pullback row j: dL/dA_ji = t_ji - e_ji sum_i' t_ji', t = e dL/de
//   dL/dd_ij pulled back as d * dL/dd = -p_j e_ji, avoiding any division
//   dL/d marg_logit_i = -lambda (ez_i - m_i), ez the induced marginal.
inline LossGrad gradient(const Objective& obj, const ModelParams& params,
                         const FiniteDist& px, const std::vector<double>& xvals,
                         const std::vector<double>& latent_vals, double rate_weight = 1.0) {
  params.validate();
  if (px.size() != xvals.size()) throw DimensionMismatch("gradient: px vs xvals");
  const detail::Forward f = detail::forward(params, px, xvals, latent_vals);
  const double lam = detail::rate_multiplier(obj, f.big_r, rate_weight);
  const double loss = detail::objective_loss(obj, f.big_d, f.big_r, rate_weight);
  if (!std::isfinite(loss))
    throw NonFiniteLoss("gradient: objective is not finite at these parameters");

  LossGrad out;
  out.loss = loss;
  out.d = f.big_d;
  out.r = f.big_r;
  out.grad = GradVector::zeros_like(params);
  const std::size_t nb = f.nb, k = f.k;

  // induced latent marginal ez_i = sum_j p_j e_ji
  std::vector<double> ez(k, 0.0);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t i = 0; i < k; ++i) ez[i] += px[j] * f.e[j * k + i];

  // encoder backward
  std::vector<double> t(k);
  for (std::size_t j = 0; j < nb; ++j) {
    double tsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double e = f.e[j * k + i];
      if (e == 0.0) {
        t[i] = 0.0;
        continue;
      }
      const double ge = -px[j] * f.lnd[i * nb + j] +
                        lam * px[j] * (f.lne[j * k + i] + 1.0 - f.lnm[i]);
      t[i] = e * ge;
      tsum += t[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double ga = t[i] - f.e[j * k + i] * tsum;
      const double u = params.enc_w[i] * xvals[j] - params.enc_b[i];
      out.grad.enc_w[i] += ga * (-2.0 * u * xvals[j]);
      out.grad.enc_b[i] += ga * (2.0 * u);
    }
  }

  // decoder backward: row i over bins j, d * dL/dd = -p_j e_ji
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double gb = -px[j] * f.e[j * k + i] + f.d[i * nb + j] * ez[i];
      const double v = params.dec_w[j] * latent_vals[i] - params.dec_b[j];
      out.grad.dec_w[j] += gb * (-2.0 * v * latent_vals[i]);
      out.grad.dec_b[j] += gb * (2.0 * v);
    }
  }

  // marginal backward
  for (std::size_t i = 0; i < k; ++i) out.grad.marg_logits[i] = -lam * (ez[i] - f.m[i]);

  return out;
}

inline LossGrad gradient(const Objective& obj, const ModelParams& params,
                         const FiniteDist& px, const std::vector<double>& xvals,
                         double rate_weight = 1.0) {
  return gradient(obj, params, px, xvals, latent_grid(xvals, params.latent_size()),
                  rate_weight);
}

// Central finite differences over every coordinate; reports the worst
// relative deviation against the analytic gradient (1e-8 absolute floor).
inline double fd_check(const Objective& obj, const ModelParams& params, const FiniteDist& px,
                       const std::vector<double>& xvals, double h) {
  if (!(h > 0.0)) throw InvalidConfig("fd_check: need h > 0");
  const std::vector<double> tvals = latent_grid(xvals, params.latent_size());
  const LossGrad an = gradient(obj, params, px, xvals, tvals);

  double worst = 0.0;
  auto probe = [&](std::vector<double> ModelParams::* field, const std::vector<double>& gvec) {
    for (std::size_t i = 0; i < gvec.size(); ++i) {
      ModelParams plus = params, minus = params;
      (plus.*field)[i] += h;
      (minus.*field)[i] -= h;
      const double fp = loss_value(obj, plus, px, xvals, tvals).loss;
      const double fm = loss_value(obj, minus, px, xvals, tvals).loss;
      const double fd = (fp - fm) / (2.0 * h);
      const double denom = std::max({1e-8, std::abs(fd), std::abs(gvec[i])});
      worst = std::max(worst, std::abs(fd - gvec[i]) / denom);
    }
  };
  probe(&ModelParams::enc_w, an.grad.enc_w);
  probe(&ModelParams::enc_b, an.grad.enc_b);
  probe(&ModelParams::dec_w, an.grad.dec_w);
  probe(&ModelParams::dec_b, an.grad.dec_b);
  probe(&ModelParams::marg_logits, an.grad.marg_logits);
  return worst;
}

}  // namespace rdlens
