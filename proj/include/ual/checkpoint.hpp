#ifndef UAL_CHECKPOINT_HPP
#define UAL_CHECKPOINT_HPP

// Flat binary model file, all integers and reals little-endian:
//
//   "UALNET01"                         8 bytes
//   layer count                        u64
//   per layer:
//     input_width, output_width        u64, u64
//     activation code                  u32  (see Activation)
//     activation parameter             f64  (leaky slope; 0 otherwise)
//     dropout rate                     f64
//   per layer: weights (out x in, row-major) then biases (out), f64 each
//
// Optimizer state is not stored.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ual/error.hpp"
#include "ual/nn.hpp"

namespace ual {

inline constexpr std::array<char, 8> kCheckpointMagic{'U', 'A', 'L', 'N', 'E', 'T', '0', '1'};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), sizeof(T))) throw ParseError("truncated checkpoint", 0);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace detail

inline void save_checkpoint(const Network& net, std::ostream& os) {
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::write_le<std::uint64_t>(os, net.depth());
  for (const auto& l : net.layers()) {
    detail::write_le<std::uint64_t>(os, l.input_width);
    detail::write_le<std::uint64_t>(os, l.output_width);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.activation));
    detail::write_le<double>(os, l.activation == Activation::leaky_relu ? l.leaky_slope : 0.0);
    detail::write_le<double>(os, l.dropout_rate);
  }
  for (std::size_t i = 0; i < net.depth(); ++i) {
    for (double v : net.parameters().weights[i].data()) detail::write_le<double>(os, v);
    for (double v : net.parameters().biases[i].data()) detail::write_le<double>(os, v);
  }
}

inline void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  save_checkpoint(net, os);
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline Network load_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw ParseError("not a UALNET01 checkpoint", 0);
  }
  const auto depth = detail::read_le<std::uint64_t>(is);
  if (depth == 0 || depth > 4096) throw ParseError("implausible layer count " + std::to_string(depth), 0);
  std::vector<LayerSpec> layers(depth);
  for (auto& l : layers) {
    l.input_width = detail::read_le<std::uint64_t>(is);
    l.output_width = detail::read_le<std::uint64_t>(is);
    const auto code = detail::read_le<std::uint32_t>(is);
    if (code > static_cast<std::uint32_t>(Activation::softmax)) {
      throw ParseError("unknown activation code " + std::to_string(code), 0);
    }
    l.activation = static_cast<Activation>(code);
    const double param = detail::read_le<double>(is);
    l.leaky_slope = l.activation == Activation::leaky_relu ? param : kDefaultLeakySlope;
    l.dropout_rate = detail::read_le<double>(is);
    if (l.input_width == 0 || l.output_width == 0 || l.input_width * l.output_width > (std::uint64_t{1} << 32)) {
      throw ParseError("implausible layer widths", 0);
    }
  }
  Parameters params;
  for (const auto& l : layers) {
    RealMatrix w(l.output_width, l.input_width);
    for (double& v : w.data()) v = detail::read_le<double>(is);
    RealMatrix b(1, l.output_width);
    for (double& v : b.data()) v = detail::read_le<double>(is);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after checkpoint", 0);
  try {
    return Network(std::move(layers), std::move(params));
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid checkpoint: ") + e.what(), 0);
  }
}

inline Network load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(is);
}

}  // namespace ual

#endif  // UAL_CHECKPOINT_HPP
