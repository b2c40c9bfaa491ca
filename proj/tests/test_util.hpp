#pragma once

#include <vector>

#include "rdlens/model.hpp"
#include "rdlens/prob.hpp"
#include "rdlens/rng.hpp"

namespace rdlens::test {

inline FiniteDist random_dist(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = rng.next_double() + 1e-3;
    sum += x;
  }
  for (double& x : v) x /= sum;
  return FiniteDist(std::move(v));
}

inline JointDist random_joint(Rng& rng, std::size_t nr, std::size_t nc) {
  std::vector<double> t(nr * nc);
  double sum = 0.0;
  for (double& x : t) {
    x = rng.next_double() + 1e-4;
    sum += x;
  }
  for (double& x : t) x /= sum;
  return JointDist(std::move(t), nr, nc);
}

inline CondDist random_cond(Rng& rng, std::size_t nr, std::size_t nc) {
  std::vector<FiniteDist> rows;
  rows.reserve(nr);
  for (std::size_t i = 0; i < nr; ++i) rows.push_back(random_dist(rng, nc));
  return CondDist(std::move(rows));
}

inline ModelParams random_params(Rng& rng, std::size_t k, std::size_t nb, double scale) {
  ModelParams p;
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
  };
  fill(p.enc_w, k);
  fill(p.enc_b, k);
  fill(p.dec_w, nb);
  fill(p.dec_b, nb);
  fill(p.marg_logits, k);
  return p;
}

// convex mix toward a random distribution: a valid perturbation that is null
// only when alpha is zero
inline FiniteDist perturb_dist(Rng& rng, const FiniteDist& p, double alpha) {
  FiniteDist noise = random_dist(rng, p.size());
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = (1.0 - alpha) * p[i] + alpha * noise[i];
  return FiniteDist(std::move(v));
}

}  // namespace rdlens::test
