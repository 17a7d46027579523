#ifndef FREESPACE_EVAL_HPP
#define FREESPACE_EVAL_HPP

#include <cstdint>
#include <optional>

#include "freespace/errors.hpp"
#include "freespace/raster.hpp"

namespace freespace {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Metrics whose denominator vanishes are left empty rather than reported as 0.
struct Metrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fval;
};

inline ConfusionCounts compare_masks(const LabelMask& pred, const LabelMask& gt) {
  require_same_shape(pred, gt, "mask comparison");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.data[i] == Label::kRoad;
    const bool g = gt.data[i] == Label::kRoad;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

inline Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) m.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = tp / static_cast<double>(c.tp + c.fn);
  // Harmonic mean of precision and recall, in the single-division form.
  if (c.tp > 0) {
    m.fval = 2.0 * tp / static_cast<double>(2 * c.tp + c.fp + c.fn);
  }
  return m;
}

}  // namespace freespace

#endif  // FREESPACE_EVAL_HPP
