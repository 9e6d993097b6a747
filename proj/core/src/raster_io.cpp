#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "ghosttrack/error.hpp"
#include "ghosttrack/io.hpp"

namespace ghosttrack {

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Netpbm-style header tokens; '#' starts a comment. pos ends on the single whitespace
// byte that separates the header from the payload.
std::string token(const std::string& data, std::size_t& pos, const fs::path& path) {
  while (pos < data.size()) {
    if (is_space(data[pos])) {
      ++pos;
    } else if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t b = pos;
  while (pos < data.size() && !is_space(data[pos])) ++pos;
  if (b == pos) throw ParseError(path.string(), 1, "truncated header");
  return data.substr(b, pos - b);
}

int dimension(const std::string& tok, const fs::path& path) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > (1L << 20)) throw std::invalid_argument(tok);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError(path.string(), 1, "invalid image dimension '" + tok + "'");
  }
}

void write_all(const fs::path& path, const std::string& header, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header;
  out.write(data, static_cast<std::streamsize>(n));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

DepthField read_pfm(const fs::path& path, int frame_id) {
  const std::string data = slurp(path);
  std::size_t pos = 0;
  const std::string magic = token(data, pos, path);
  if (magic != "Pf") throw ParseError(path.string(), 1, "expected single-channel PFM ('Pf'), got '" + magic + "'");
  const int w = dimension(token(data, pos, path), path);
  const int h = dimension(token(data, pos, path), path);
  const std::string scale_tok = token(data, pos, path);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw ParseError(path.string(), 3, "invalid scale '" + scale_tok + "'");
  }
  if (scale == 0.0) throw ParseError(path.string(), 3, "scale must be nonzero");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() < pos + 4 * n) throw ParseError(path.string(), 4, "truncated pixel data");
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  std::vector<float> values(n);
  for (int r = 0; r < h; ++r) {
    const int dst_row = h - 1 - r;
    for (int c = 0; c < w; ++c) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, data.data() + pos + 4 * (static_cast<std::size_t>(r) * w + c), 4);
      if (swap) bits = __builtin_bswap32(bits);
      values[static_cast<std::size_t>(dst_row) * w + c] = std::bit_cast<float>(bits);
    }
  }
  try {
    return DepthField(w, h, std::move(values), frame_id);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string(), 4, e.what());
  }
}

void write_pfm(const DepthField& depth, const fs::path& path) {
  const int w = depth.width();
  const int h = depth.height();
  std::vector<std::uint32_t> payload(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(depth.at(h - 1 - r, c));
      if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
      payload[static_cast<std::size_t>(r) * w + c] = bits;
    }
  const std::string header = "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
  write_all(path, header, reinterpret_cast<const char*>(payload.data()), payload.size() * 4);
}

BinaryMask read_pgm(const fs::path& path) {
  const std::string data = slurp(path);
  std::size_t pos = 0;
  const std::string magic = token(data, pos, path);
  if (magic != "P5") throw ParseError(path.string(), 1, "expected binary PGM ('P5'), got '" + magic + "'");
  const int w = dimension(token(data, pos, path), path);
  const int h = dimension(token(data, pos, path), path);
  const int maxval = dimension(token(data, pos, path), path);
  if (maxval > 255) throw ParseError(path.string(), 1, "only 8-bit PGM is supported");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() < pos + n) throw ParseError(path.string(), 1, "truncated pixel data");
  std::vector<std::uint8_t> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<std::uint8_t>(data[pos + i]) != 0 ? 1 : 0;
  return BinaryMask(w, h, std::move(values));
}

void write_pgm(const BinaryMask& mask, const fs::path& path) {
  const std::size_t n = static_cast<std::size_t>(mask.width()) * mask.height();
  std::string payload(n, '\0');
  const auto v = mask.values();
  for (std::size_t i = 0; i < n; ++i) payload[i] = v[i] != 0 ? static_cast<char>(255) : '\0';
  const std::string header = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  write_all(path, header, payload.data(), n);
}

}  // namespace ghosttrack
