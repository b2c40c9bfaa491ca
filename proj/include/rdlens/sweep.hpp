#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rdlens/errors.hpp"
#include "rdlens/objectives.hpp"
#include "rdlens/trainer.hpp"

namespace rdlens {

inline constexpr double kDominanceTol = 1e-9;  // nats

// One evaluated model in the RD plane.
struct RDPoint {
  Objective objective;
  double grid_value = 0.0;
  std::uint64_t seed = 0;
  bool converged = true;
  BoundsReport report;
};

struct SweepSpec {
  Objective::Kind family = Objective::Kind::Beta;
  std::vector<double> grid;  // beta or sigma values, strictly ascending
  std::size_t seeds = 1;     // fan width per grid value
  TrainConfig base;          // objective value and seed are overridden per cell
  std::size_t jobs = 1;

  void validate() const {
    if (grid.empty()) throw InvalidConfig("SweepSpec: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw InvalidConfig("SweepSpec: grid must be strictly ascending");
    if (seeds < 1) throw InvalidConfig("SweepSpec: seeds >= 1 required");
    if (jobs < 1) throw InvalidConfig("SweepSpec: jobs >= 1 required");
    base.validate();
  }
};

// One trained point per (grid value, seed); cells are independent and
// deterministic, so results are identical regardless of worker count.
// Per-cell divergence is recorded, not propagated.
inline std::vector<RDPoint> run_sweep(const SweepSpec& spec, const ToyProcess& tp) {
  spec.validate();
  const std::size_t n_cells = spec.grid.size() * spec.seeds;
  std::vector<RDPoint> points(n_cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= n_cells) return;
      const std::size_t gi = cell / spec.seeds;
      const std::size_t si = cell % spec.seeds;

      TrainConfig cfg = spec.base;
      cfg.objective = Objective{spec.family, spec.grid[gi]};
      cfg.seed = spec.base.seed + si;

      RDPoint& pt = points[cell];
      pt.objective = cfg.objective;
      pt.grid_value = spec.grid[gi];
      pt.seed = cfg.seed;
      try {
        pt.report = train(cfg, tp).final_report;
        pt.converged = true;
      } catch (const DivergedLoss&) {
        pt.converged = false;
        pt.report = BoundsReport{};
        pt.report.d = std::numeric_limits<double>::quiet_NaN();
        pt.report.r = std::numeric_limits<double>::quiet_NaN();
        pt.report.elbo = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  const std::size_t width = std::min(spec.jobs, n_cells);
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return points;
}

struct Frontier {
  std::vector<RDPoint> points;                    // finite, converged inputs
  std::vector<RDPoint> pareto;                    // stepwise Pareto frontier
  std::vector<std::pair<double, double>> hull;    // lower convex hull vertices (R, D)
};

namespace detail {

inline bool finite_rd(const RDPoint& p) {
  return p.converged && std::isfinite(p.report.r) && std::isfinite(p.report.d);
}

}  // namespace detail

// Sorts by R ascending and keeps points strictly decreasing the running
// minimum D; ties within kDominanceTol keep the lower-R representative.
// The hull is the lower-left convex hull of the kept set.
inline Frontier pareto_frontier(const std::vector<RDPoint>& input) {
  Frontier f;
  for (const RDPoint& p : input)
    if (detail::finite_rd(p)) f.points.push_back(p);
  if (f.points.empty()) throw InvalidConfig("pareto_frontier: no finite points");

  std::vector<RDPoint> sorted = f.points;
  std::sort(sorted.begin(), sorted.end(), [](const RDPoint& a, const RDPoint& b) {
    if (a.report.r != b.report.r) return a.report.r < b.report.r;
    if (a.report.d != b.report.d) return a.report.d < b.report.d;
    return a.seed < b.seed;
  });

  double min_d = std::numeric_limits<double>::infinity();
  for (const RDPoint& p : sorted) {
    if (p.report.d < min_d - kDominanceTol) {
      f.pareto.push_back(p);
      min_d = p.report.d;
    }
  }

  // Andrew's monotone chain, lower hull only; collinear vertices dropped.
  auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                  const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  for (const RDPoint& p : f.pareto) {
    const std::pair<double, double> pt{p.report.r, p.report.d};
    while (f.hull.size() >= 2 &&
           cross(f.hull[f.hull.size() - 2], f.hull[f.hull.size() - 1], pt) <= 0.0)
      f.hull.pop_back();
    f.hull.push_back(pt);
  }
  return f;
}

// Piecewise-linear height of the lower hull at rate r, extended flat beyond
// its endpoints.
inline double hull_height(const std::vector<std::pair<double, double>>& hull, double r) {
  if (hull.empty()) throw InvalidConfig("hull_height: empty hull");
  if (r <= hull.front().first) return hull.front().second;
  if (r >= hull.back().first) return hull.back().second;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    if (r <= hull[i].first) {
      const auto& [r0, d0] = hull[i - 1];
      const auto& [r1, d1] = hull[i];
      const double t = (r - r0) / (r1 - r0);
      return d0 + t * (d1 - d0);
    }
  }
  return hull.back().second;
}

// The D = H - R segment: endpoints for overlaying the feasibility diagonal.
struct DiagonalSegment {
  std::pair<double, double> from;  // (0, H)
  std::pair<double, double> to;    // (H, 0)
};

inline DiagonalSegment diagonal_reference(double h) {
  if (!(h > 0.0)) throw InvalidConfig("diagonal_reference: need H > 0");
  return DiagonalSegment{{0.0, h}, {h, 0.0}};
}

inline std::string points_csv_header() {
  std::string h = bounds_csv_header();
  h.pop_back();  // trailing newline
  return h + ",grid_value,converged\n";
}

inline std::string points_csv_row(const RDPoint& p) {
  std::string row = bounds_csv_row(p.objective, p.seed, p.report);
  row.pop_back();
  return row + "," + fmt_double(p.grid_value) + "," + (p.converged ? "1" : "0") + "\n";
}

inline std::string frontier_csv_header() { return "kind,grid_value,seed,R,D\n"; }

inline std::string frontier_csv(const Frontier& f) {
  std::string out = frontier_csv_header();
  for (const RDPoint& p : f.pareto)
    out += csv_row({"pareto", fmt_double(p.grid_value), std::to_string(p.seed),
                    fmt_double(p.report.r), fmt_double(p.report.d)});
  for (const auto& [r, d] : f.hull)
    out += csv_row({"hull", "", "", fmt_double(r), fmt_double(d)});
  return out;
}

}  // namespace rdlens
