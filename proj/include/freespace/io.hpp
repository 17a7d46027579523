#ifndef FREESPACE_IO_HPP
#define FREESPACE_IO_HPP

// File formats:
//   ASCII PLY   vertex element with float x, y, z
//   PGM (P5)    8-bit masks, 255 = road
//   PPM (P6)    8-bit RGB images
//   PFM2        "PFM2\n", "width height\n", then width*height pairs of
//               little-endian float32 (s_road, s_nonroad_max), row-major

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/prior_maps.hpp"
#include "freespace/raster.hpp"

namespace freespace::io {

namespace fs = std::filesystem;

namespace detail {

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Next whitespace-delimited token of a netpbm header, skipping comments.
inline std::string netpbm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  for (;;) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw IoError("truncated header in " + path.string());
  return tok;
}

inline int positive_int(const std::string& tok, const fs::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad number '" + tok + "' in " + path.string());
  }
}

struct NetpbmHeader {
  int width;
  int height;
};

inline NetpbmHeader read_netpbm_header(std::istream& in, const char* magic,
                                       const fs::path& path) {
  if (netpbm_token(in, path) != magic) {
    throw IoError(path.string() + " is not a " + magic + " file");
  }
  NetpbmHeader h{positive_int(netpbm_token(in, path), path),
                 positive_int(netpbm_token(in, path), path)};
  if (positive_int(netpbm_token(in, path), path) != 255) {
    throw IoError("only 8-bit maxval supported in " + path.string());
  }
  return h;
}

}  // namespace detail

inline void write_ply(const fs::path& path, std::span<const Vec3> points) {
  auto out = detail::open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  for (const Vec3& p : points) {
    out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
        << static_cast<float>(p.z()) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

/// Reads the x, y, z properties of the vertex element of an ASCII PLY file.
/// Elements other than "vertex" are skipped.
inline std::vector<Vec3> read_ply(const fs::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::getline(in, line);
  if (line != "ply" && line != "ply\r") throw IoError(path.string() + " is not a PLY file");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    std::vector<bool> single;  // stored as 32-bit float
  };
  std::vector<Element> elements;
  bool ascii = false;
  for (;;) {
    if (!std::getline(in, line)) throw IoError("unterminated PLY header in " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      Element e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw IoError("property before element in " + path.string());
      std::string type, name;
      ss >> type;
      if (type == "list") throw IoError("list properties unsupported in " + path.string());
      ss >> name;
      elements.back().props.push_back(name);
      elements.back().single.push_back(type == "float" || type == "float32");
    }
  }
  if (!ascii) throw IoError("only ASCII PLY is supported: " + path.string());

  std::vector<Vec3> points;
  for (const Element& e : elements) {
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < e.props.size(); ++k) {
      if (e.props[k] == "x") ix = static_cast<int>(k);
      if (e.props[k] == "y") iy = static_cast<int>(k);
      if (e.props[k] == "z") iz = static_cast<int>(k);
    }
    const bool is_vertex = e.name == "vertex";
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw IoError("vertex element lacks x/y/z in " + path.string());
    }
    std::vector<double> values(e.props.size());
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!std::getline(in, line)) throw IoError("truncated PLY body in " + path.string());
      if (!is_vertex) continue;
      std::istringstream ss(line);
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(ss >> values[k])) throw IoError("malformed vertex line in " + path.string());
        if (e.single[k]) values[k] = static_cast<float>(values[k]);
      }
      points.emplace_back(values[ix], values[iy], values[iz]);
    }
  }
  return points;
}

inline void write_pgm(const fs::path& path, const Raster<std::uint8_t>& img) {
  auto out = detail::open_out(path);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline Raster<std::uint8_t> read_pgm(const fs::path& path) {
  auto in = detail::open_in(path);
  const auto h = detail::read_netpbm_header(in, "P5", path);
  Raster<std::uint8_t> img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size())) {
    throw IoError("truncated pixel data in " + path.string());
  }
  return img;
}

inline Raster<std::uint8_t> mask_to_gray(const LabelMask& mask) {
  Raster<std::uint8_t> g(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    g.data[i] = mask.data[i] == Label::kRoad ? 255 : 0;
  }
  return g;
}

/// Gray values of 128 and above count as road.
inline LabelMask gray_to_mask(const Raster<std::uint8_t>& gray) {
  LabelMask m(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    m.data[i] = gray.data[i] >= 128 ? Label::kRoad : Label::kNotRoad;
  }
  return m;
}

inline void write_mask(const fs::path& path, const LabelMask& mask) {
  write_pgm(path, mask_to_gray(mask));
}

inline LabelMask read_mask(const fs::path& path) { return gray_to_mask(read_pgm(path)); }

inline void write_ppm(const fs::path& path, const RgbImage& img) {
  auto out = detail::open_out(path);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  static_assert(sizeof(Rgb) == 3);
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(3 * img.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline RgbImage read_ppm(const fs::path& path) {
  auto in = detail::open_in(path);
  const auto h = detail::read_netpbm_header(in, "P6", path);
  RgbImage img(h.width, h.height);
  const auto bytes = static_cast<std::streamsize>(3 * img.size());
  in.read(reinterpret_cast<char*>(img.data.data()), bytes);
  if (in.gcount() != bytes) throw IoError("truncated pixel data in " + path.string());
  return img;
}

namespace detail {

inline void put_le_float(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                         static_cast<char>((bits >> 16) & 0xFF),
                         static_cast<char>((bits >> 24) & 0xFF)};
  out.write(bytes, 4);
}

inline float le_float(const unsigned char* b) {
  const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                             (static_cast<std::uint32_t>(b[1]) << 8) |
                             (static_cast<std::uint32_t>(b[2]) << 16) |
                             (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

inline void write_pfm2(const fs::path& path, const ProbMap& probs) {
  auto out = detail::open_out(path);
  out << "PFM2\n" << probs.width << ' ' << probs.height << '\n';
  for (std::size_t i = 0; i < probs.size(); ++i) {
    detail::put_le_float(out, probs.s_road[i]);
    detail::put_le_float(out, probs.s_nonroad_max[i]);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

inline ProbMap read_pfm2(const fs::path& path) {
  auto in = detail::open_in(path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "PFM2") throw IoError(path.string() + " is not a PFM2 file");
  std::string dims;
  std::getline(in, dims);
  std::istringstream ss(dims);
  std::string ws, hs, extra;
  ss >> ws >> hs;
  if (ss >> extra) throw IoError("malformed PFM2 size line in " + path.string());
  ProbMap probs(detail::positive_int(ws, path), detail::positive_int(hs, path));
  std::vector<unsigned char> raw(8 * probs.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError("truncated PFM2 payload in " + path.string());
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs.s_road[i] = detail::le_float(&raw[8 * i]);
    probs.s_nonroad_max[i] = detail::le_float(&raw[8 * i + 4]);
    for (float v : {probs.s_road[i], probs.s_nonroad_max[i]}) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw IoError("probability outside [0, 1] in " + path.string());
      }
    }
  }
  return probs;
}

}  // namespace freespace::io

#endif  // FREESPACE_IO_HPP
