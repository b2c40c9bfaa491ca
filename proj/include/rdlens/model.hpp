#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rdlens/errors.hpp"
#include "rdlens/io.hpp"
#include "rdlens/prob.hpp"
#include "rdlens/rng.hpp"
#include "rdlens/toy_process.hpp"

namespace rdlens {

inline constexpr const char* kModelParamsSchema = "modelparams-v1";

// Trainable parameters of the tabular toy family.
//
// Encoder parameters are indexed by latent symbol, decoder parameters by
// output bin; both conditionals share the quadratic-logit form
// softmax(-(w * input - b)^2) with the conditioning variable entering as its
// scalar grid value. With that orientation a single decoder row can match an
// arbitrary data distribution (w = 0 reduces every row to softmax(-b^2)),
// which is what lets maximum-ELBO training reach the autodecoding corner.
struct ModelParams {
  std::vector<double> enc_w, enc_b;    // one pair per latent symbol
  std::vector<double> dec_w, dec_b;    // one pair per output bin
  std::vector<double> marg_logits;     // unnormalized log pi over latent symbols

  std::size_t latent_size() const { return enc_w.size(); }
  std::size_t bin_size() const { return dec_w.size(); }

  void validate() const {
    if (enc_w.size() != enc_b.size() || dec_w.size() != dec_b.size() ||
        marg_logits.size() != enc_w.size() || enc_w.empty() || dec_w.empty())
      throw InvalidConfig("ModelParams: inconsistent shapes");
    auto all_finite = [](const std::vector<double>& v) {
      for (double x : v)
        if (!std::isfinite(x)) return false;
      return true;
    };
    if (!all_finite(enc_w) || !all_finite(enc_b) || !all_finite(dec_w) || !all_finite(dec_b) ||
        !all_finite(marg_logits))
      throw InvalidConfig("ModelParams: non-finite entry");
  }
};

enum class Provenance { Trained, OptimalReference, Explicit };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Trained: return "trained";
    case Provenance::OptimalReference: return "optimal-reference";
    default: return "explicit";
  }
}

// A realized model: exact conditionals and marginal over finite alphabets.
struct Model {
  CondDist encoder;     // e(z|x), bins x latents
  CondDist decoder;     // d(x|z), latents x bins
  FiniteDist marginal;  // m(z)
  Provenance provenance = Provenance::Explicit;
};

inline std::vector<double> softmax(const std::vector<double>& logits) {
  double mx = logits.front();
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Evenly spaced scalar values for the latent symbols, spanning the data range.
inline std::vector<double> latent_grid(const std::vector<double>& xvals, std::size_t k) {
  if (k == 1) return {xvals.front()};
  std::vector<double> t(k);
  const double lo = xvals.front(), hi = xvals.back();
  for (std::size_t i = 0; i < k; ++i)
    t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return t;
}

// Deterministic, differentiable map from parameters to distributions.
// Encoder row for bin j: softmax_i of -(enc_w[i] x_j - enc_b[i])^2.
// Decoder row for latent i: softmax_j of -(dec_w[j] t_i - dec_b[j])^2.
inline Model realize(const ModelParams& params, const std::vector<double>& xvals,
                     const std::vector<double>& latent_vals) {
  params.validate();
  if (params.bin_size() != xvals.size())
    throw DimensionMismatch("realize: decoder parameters must match bin count");
  if (latent_vals.size() != params.latent_size())
    throw DimensionMismatch("realize: latent grid must match latent count");
  const std::size_t nb = xvals.size(), k = params.latent_size();

  std::vector<FiniteDist> enc_rows;
  enc_rows.reserve(nb);
  std::vector<double> logits(k);
  for (std::size_t j = 0; j < nb; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      const double u = params.enc_w[i] * xvals[j] - params.enc_b[i];
      logits[i] = -u * u;
    }
    enc_rows.emplace_back(softmax(logits));
  }

  std::vector<FiniteDist> dec_rows;
  dec_rows.reserve(k);
  std::vector<double> dlogits(nb);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double u = params.dec_w[j] * latent_vals[i] - params.dec_b[j];
      dlogits[j] = -u * u;
    }
    dec_rows.emplace_back(softmax(dlogits));
  }

  return Model{CondDist(std::move(enc_rows)), CondDist(std::move(dec_rows)),
               FiniteDist(softmax(params.marg_logits)), Provenance::Trained};
}

inline Model realize(const ModelParams& params, const std::vector<double>& xvals) {
  return realize(params, xvals, latent_grid(xvals, params.latent_size()));
}

// Embeds the 2-class true posteriors into a K-symbol latent space: symbols 0
// and 1 carry the classes, the rest get exactly zero marginal mass. Sits on
// the D = H - R diagonal by construction.
inline Model optimal_reference(const ToyProcess& tp, std::size_t k) {
  if (k < 2) throw InvalidConfig("optimal_reference: need K >= 2");
  TruePosteriors post = true_posteriors(tp);
  const std::size_t nb = tp.bin_count();

  std::vector<FiniteDist> enc_rows;
  enc_rows.reserve(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    std::vector<double> row(k, 0.0);
    row[0] = post.z_given_x(j, 0);
    row[1] = post.z_given_x(j, 1);
    enc_rows.emplace_back(std::move(row));
  }

  std::vector<FiniteDist> dec_rows;
  dec_rows.reserve(k);
  dec_rows.push_back(post.x_given_z.row(0));
  dec_rows.push_back(post.x_given_z.row(1));
  for (std::size_t i = 2; i < k; ++i) dec_rows.push_back(FiniteDist::uniform(nb));

  std::vector<double> marg(k, 0.0);
  marg[0] = 1.0 - tp.p1;
  marg[1] = tp.p1;

  return Model{CondDist(std::move(enc_rows)), CondDist(std::move(dec_rows)),
               FiniteDist(std::move(marg)), Provenance::OptimalReference};
}

// Reproducible pseudo-random initialization. Weights are uniform in
// (-scale, scale); each symbol's preferred center b/w is spread uniformly
// across the data range, so rows are diverse yet flatten to uniform as
// scale -> 0.
inline ModelParams init_params(std::uint64_t seed, double scale, double xmin, double xmax,
                               std::size_t latent_k, std::size_t n_bins) {
  if (!(scale > 0.0)) throw InvalidConfig("init_params: need scale > 0");
  Rng rng(seed);
  auto draw_pair = [&](std::size_t n, std::vector<double>& w, std::vector<double>& b) {
    w.resize(n);
    b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double center = rng.uniform(xmin, xmax);
      w[i] = rng.uniform(-scale, scale);
      b[i] = w[i] * center;
    }
  };
  ModelParams p;
  draw_pair(latent_k, p.enc_w, p.enc_b);
  draw_pair(n_bins, p.dec_w, p.dec_b);
  p.marg_logits.resize(latent_k);
  for (std::size_t i = 0; i < latent_k; ++i) p.marg_logits[i] = rng.uniform(-scale, scale);
  return p;
}

// Objective tag carried in checkpoints and reports.
struct Objective {
  enum class Kind { Beta, TargetRate };
  Kind kind = Kind::Beta;
  double value = 1.0;  // beta, or the target rate sigma
};

inline std::string to_string(Objective::Kind k) {
  return k == Objective::Kind::Beta ? "beta" : "target-rate";
}

inline std::string to_string(const Objective& o) {
  return to_string(o.kind) + ":" + fmt_double(o.value);
}

inline Objective parse_objective(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw InvalidConfig("objective: expected <kind>:<value>, got '" + s + "'");
  const std::string kind = s.substr(0, colon);
  Objective o;
  if (kind == "beta")
    o.kind = Objective::Kind::Beta;
  else if (kind == "target-rate")
    o.kind = Objective::Kind::TargetRate;
  else
    throw InvalidConfig("objective: unknown kind '" + kind + "'");
  try {
    o.value = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidConfig("objective: bad value in '" + s + "'");
  }
  if (o.value < 0.0) throw InvalidConfig("objective: value must be >= 0");
  return o;
}

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  Objective objective;
};

inline nlohmann::json to_json(const Checkpoint& ck) {
  return nlohmann::json{{"schema", kModelParamsSchema},
                        {"enc_w", ck.params.enc_w},
                        {"enc_b", ck.params.enc_b},
                        {"dec_w", ck.params.dec_w},
                        {"dec_b", ck.params.dec_b},
                        {"marg_logits", ck.params.marg_logits},
                        {"seed", ck.seed},
                        {"objective", to_string(ck.objective)}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j["schema"] != kModelParamsSchema)
    throw SchemaError("checkpoint: expected schema " + std::string(kModelParamsSchema));
  Checkpoint ck;
  ck.params.enc_w = j.at("enc_w").get<std::vector<double>>();
  ck.params.enc_b = j.at("enc_b").get<std::vector<double>>();
  ck.params.dec_w = j.at("dec_w").get<std::vector<double>>();
  ck.params.dec_b = j.at("dec_b").get<std::vector<double>>();
  ck.params.marg_logits = j.at("marg_logits").get<std::vector<double>>();
  ck.seed = j.at("seed").get<std::uint64_t>();
  ck.objective = parse_objective(j.at("objective").get<std::string>());
  ck.params.validate();
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  atomic_write_file(path, to_json(ck).dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace rdlens
