#ifndef FREESPACE_RASTER_HPP
#define FREESPACE_RASTER_HPP

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "freespace/errors.hpp"

namespace freespace {

/// Dense row-major image of T.
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, const T& fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  T& at(int x, int y) { return data[index(x, y)]; }
  const T& at(int x, int y) const { return data[index(x, y)]; }

  template <typename U>
  bool same_shape(const Raster<U>& other) const {
    return width == other.width && height == other.height;
  }

  bool operator==(const Raster&) const = default;
};

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << what << ": " << a.width << "x" << a.height << " vs " << b.width
        << "x" << b.height;
    throw DimensionMismatch(msg.str());
  }
}

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

using RgbImage = Raster<Rgb>;

enum class Label : std::uint8_t { kNotRoad = 0, kRoad = 1 };

using LabelMask = Raster<Label>;

}  // namespace freespace

#endif  // FREESPACE_RASTER_HPP
