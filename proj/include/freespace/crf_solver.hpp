#ifndef FREESPACE_CRF_SOLVER_HPP
#define FREESPACE_CRF_SOLVER_HPP

// Binary road / non-road labeling energy
//   E(L) = sum_p unary(p, L_p) + sum_{(p,q) 4-neighbors, L_p != L_q} V(p,q)
// minimized exactly with one s-t min cut (source side = road).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#include "freespace/color_lines.hpp"
#include "freespace/errors.hpp"
#include "freespace/maxflow.hpp"
#include "freespace/prior_maps.hpp"
#include "freespace/raster.hpp"

namespace freespace {

struct CostField {
  UnaryField unary;
  EdgeField pairwise;

  int width() const { return unary.width; }
  int height() const { return unary.height; }
};

struct SolveResult {
  LabelMask mask;
  double min_energy = 0.0;
  // Max-flow value of the reparameterized graph and the constant that was
  // moved out of the terminal links; min_energy == flow + offset.
  double flow = 0.0;
  double offset = 0.0;
};

inline void require_consistent(const CostField& costs) {
  const int w = costs.width();
  const int h = costs.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (costs.unary.cost_road.size() != n || costs.unary.cost_nonroad.size() != n ||
      costs.pairwise.width != w || costs.pairwise.height != h ||
      costs.pairwise.horizontal.size() != static_cast<std::size_t>(std::max(w - 1, 0)) * h ||
      costs.pairwise.vertical.size() != static_cast<std::size_t>(w) * std::max(h - 1, 0)) {
    throw DimensionMismatch("cost field components disagree in size");
  }
}

inline void require_finite_nonnegative(const CostField& costs) {
  const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  for (double v : costs.unary.cost_road) if (!ok(v)) throw InvariantViolation("bad unary cost");
  for (double v : costs.unary.cost_nonroad) if (!ok(v)) throw InvariantViolation("bad unary cost");
  for (double v : costs.pairwise.horizontal) if (!ok(v)) throw InvariantViolation("bad edge capacity");
  for (double v : costs.pairwise.vertical) if (!ok(v)) throw InvariantViolation("bad edge capacity");
}

inline double energy(const LabelMask& mask, const CostField& costs) {
  require_consistent(costs);
  if (mask.width != costs.width() || mask.height != costs.height()) {
    throw DimensionMismatch("mask and cost field differ in size");
  }
  const int w = mask.width;
  const int h = mask.height;
  double e = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    e += mask.data[i] == Label::kRoad ? costs.unary.cost_road[i]
                                      : costs.unary.cost_nonroad[i];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w && mask.at(x, y) != mask.at(x + 1, y)) e += costs.pairwise.right(x, y);
      if (y + 1 < h && mask.at(x, y) != mask.at(x, y + 1)) e += costs.pairwise.down(x, y);
    }
  }
  return e;
}

inline SolveResult solve(const CostField& costs) {
  require_consistent(costs);
  require_finite_nonnegative(costs);
  const int w = costs.width();
  const int h = costs.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;

  BkMaxflow<double> graph(n, costs.pairwise.horizontal.size() + costs.pairwise.vertical.size());
  graph.add_nodes(n);
  SolveResult result;
  for (std::size_t i = 0; i < n; ++i) {
    const double road = costs.unary.cost_road[i];
    const double nonroad = costs.unary.cost_nonroad[i];
    const double common = std::min(road, nonroad);
    result.offset += common;
    // Cutting source->p labels p non-road; cutting p->sink labels it road.
    graph.add_tweights(static_cast<int>(i), nonroad - common, road - common);
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      if (x + 1 < w) {
        const double v = costs.pairwise.right(x, y);
        if (v > 0.0) graph.add_edge(p, p + 1, v, v);
      }
      if (y + 1 < h) {
        const double v = costs.pairwise.down(x, y);
        if (v > 0.0) graph.add_edge(p, p + w, v, v);
      }
    }
  }
  result.flow = graph.maxflow();

  result.mask = LabelMask(w, h, Label::kNotRoad);
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.what_segment(static_cast<int>(i)) == BkMaxflow<double>::Segment::kSource) {
      result.mask.data[i] = Label::kRoad;
    }
  }
  result.min_energy = energy(result.mask, costs);
  return result;
}

inline constexpr std::size_t kBruteForceMaxPixels = 20;

/// Exhaustive minimum over all 2^(w*h) labelings; first minimizer in
/// enumeration order wins.
inline SolveResult brute_force_solve(const CostField& costs) {
  require_consistent(costs);
  const int w = costs.width();
  const int h = costs.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (n > kBruteForceMaxPixels) {
    throw DomainError("brute force limited to 20 pixels");
  }
  SolveResult best;
  best.min_energy = std::numeric_limits<double>::infinity();
  LabelMask mask(w, h, Label::kNotRoad);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) {
      mask.data[i] = (bits >> i) & 1U ? Label::kRoad : Label::kNotRoad;
    }
    const double e = energy(mask, costs);
    if (e < best.min_energy) {
      best.min_energy = e;
      best.mask = mask;
    }
  }
  best.flow = best.min_energy;
  return best;
}

}  // namespace freespace

#endif  // FREESPACE_CRF_SOLVER_HPP
