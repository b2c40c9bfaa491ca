#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rdlens/errors.hpp"

namespace rdlens {

// Tolerances for exact probability objects: constructors renormalize a sum
// within kRenormTol of 1 and reject anything further out; post-construction
// sums hold to kSumTol.
inline constexpr double kSumTol = 1e-12;
inline constexpr double kRenormTol = 1e-9;

namespace detail {

inline void check_mass_vector(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw InvalidDistribution(std::string(what) + ": empty");
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidDistribution(std::string(what) + ": negative or non-finite entry");
  }
}

inline double normalized_total(std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (std::abs(sum - 1.0) > kRenormTol)
    throw InvalidDistribution(std::string(what) + ": mass sums to " + std::to_string(sum));
  for (double& x : v) x /= sum;
  return sum;
}

}  // namespace detail

// An exact probability vector over a finite alphabet.
class FiniteDist {
 public:
  explicit FiniteDist(std::vector<double> probs) : p_(std::move(probs)) {
    detail::check_mass_vector(p_, "FiniteDist");
    detail::normalized_total(p_, "FiniteDist");
  }

  static FiniteDist uniform(std::size_t n) {
    return FiniteDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static FiniteDist point_mass(std::size_t n, std::size_t at) {
    std::vector<double> v(n, 0.0);
    v.at(at) = 1.0;
    return FiniteDist(std::move(v));
  }

  // Ber(p): mass 1-p on symbol 0, p on symbol 1.
  static FiniteDist bernoulli(double p) {
    return FiniteDist({1.0 - p, p});
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }

 private:
  std::vector<double> p_;
};

// A row-stochastic matrix: rows[i] is a distribution over the output
// alphabet given input symbol i.
class CondDist {
 public:
  explicit CondDist(std::vector<FiniteDist> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw InvalidDistribution("CondDist: no rows");
    for (const auto& r : rows_) {
      if (r.size() != rows_.front().size())
        throw DimensionMismatch("CondDist: ragged rows");
    }
  }

  static CondDist from_matrix(const std::vector<std::vector<double>>& m) {
    std::vector<FiniteDist> rows;
    rows.reserve(m.size());
    for (const auto& r : m) rows.emplace_back(r);
    return CondDist(std::move(rows));
  }

  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return rows_.front().size(); }
  const FiniteDist& row(std::size_t i) const { return rows_[i]; }
  double operator()(std::size_t i, std::size_t k) const { return rows_[i][k]; }

 private:
  std::vector<FiniteDist> rows_;
};

// A joint distribution over (row symbol, column symbol) pairs.
class JointDist {
 public:
  JointDist(std::vector<double> table, std::size_t n_rows, std::size_t n_cols)
      : t_(std::move(table)), nr_(n_rows), nc_(n_cols) {
    if (nr_ == 0 || nc_ == 0 || t_.size() != nr_ * nc_)
      throw DimensionMismatch("JointDist: table size mismatch");
    detail::check_mass_vector(t_, "JointDist");
    detail::normalized_total(t_, "JointDist");
  }

  std::size_t n_rows() const { return nr_; }
  std::size_t n_cols() const { return nc_; }
  double operator()(std::size_t i, std::size_t k) const { return t_[i * nc_ + k]; }
  const std::vector<double>& table() const { return t_; }

 private:
  std::vector<double> t_;
  std::size_t nr_, nc_;
};

enum class Axis { Row, Col };

// H(p) = -sum_i p_i ln p_i in nats, with 0 ln 0 = 0.
inline double entropy(const FiniteDist& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

// KL(p || q) = sum_i p_i ln(p_i / q_i); requires absolute continuity.
inline double kl(const FiniteDist& p, const FiniteDist& q) {
  if (p.size() != q.size()) throw DimensionMismatch("kl: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw AbsoluteContinuityViolation("kl: p has mass at symbol " + std::to_string(i) +
                                        " where q has none");
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

inline FiniteDist marginalize(const JointDist& j, Axis axis) {
  std::size_t n = axis == Axis::Row ? j.n_rows() : j.n_cols();
  std::vector<double> m(n, 0.0);
  for (std::size_t r = 0; r < j.n_rows(); ++r)
    for (std::size_t c = 0; c < j.n_cols(); ++c)
      m[axis == Axis::Row ? r : c] += j(r, c);
  return FiniteDist(std::move(m));
}

// Exact I(X;Z) of a joint table: the brute-force oracle every variational
// bound in this library is sandwiched against.
inline double mutual_information(const JointDist& j) {
  FiniteDist mr = marginalize(j, Axis::Row);
  FiniteDist mc = marginalize(j, Axis::Col);
  double info = 0.0;
  for (std::size_t r = 0; r < j.n_rows(); ++r) {
    for (std::size_t c = 0; c < j.n_cols(); ++c) {
      double p = j(r, c);
      if (p > 0.0) info += p * std::log(p / (mr[r] * mc[c]));
    }
  }
  return info;
}

// table[i][k] = px_i * cond[i][k]
inline JointDist compose_joint(const FiniteDist& px, const CondDist& cond) {
  if (px.size() != cond.n_rows())
    throw DimensionMismatch("compose_joint: cond needs one row per symbol of px");
  std::vector<double> t(px.size() * cond.n_cols());
  for (std::size_t i = 0; i < px.size(); ++i)
    for (std::size_t k = 0; k < cond.n_cols(); ++k)
      t[i * cond.n_cols() + k] = px[i] * cond(i, k);
  return JointDist(std::move(t), px.size(), cond.n_cols());
}

// Conditional of the other variable given the axis variable; rows are
// renormalized slices. A zero-mass conditioning slice yields a uniform row
// and its index is appended to *zero_mass_slices (it is never an error:
// downstream optimal-decoder construction must be total).
inline CondDist posterior(const JointDist& j, Axis given,
                          std::vector<std::size_t>* zero_mass_slices = nullptr) {
  std::size_t n_given = given == Axis::Row ? j.n_rows() : j.n_cols();
  std::size_t n_out = given == Axis::Row ? j.n_cols() : j.n_rows();
  std::vector<FiniteDist> rows;
  rows.reserve(n_given);
  for (std::size_t g = 0; g < n_given; ++g) {
    std::vector<double> slice(n_out);
    double mass = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) {
      double v = given == Axis::Row ? j(g, o) : j(o, g);
      slice[o] = v;
      mass += v;
    }
    if (mass == 0.0) {
      if (zero_mass_slices) zero_mass_slices->push_back(g);
      rows.push_back(FiniteDist::uniform(n_out));
    } else {
      for (double& v : slice) v /= mass;
      rows.emplace_back(std::move(slice));
    }
  }
  return CondDist(std::move(rows));
}

}  // namespace rdlens
