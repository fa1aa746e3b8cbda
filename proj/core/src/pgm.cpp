#include "kpnp/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "kpnp/errors.hpp"

namespace kpnp {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  // Next whitespace-delimited token, skipping '#' comments.
  std::string token() {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    return bytes_.substr(start, pos_ - start);
  }

  long number(const char* field) {
    const std::string t = token();
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw FormatError(field, "expected a non-negative integer, got '" + t + "'");
    }
    try {
      return std::stol(t);
    } catch (const std::exception&) {
      throw FormatError(field, "value out of range");
    }
  }

  // After maxval exactly one whitespace byte precedes the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P2") throw FormatError("magic", "expected P5 or P2, got '" + magic + "'");
  const long width = header.number("width");
  const long height = header.number("height");
  const long maxval = header.number("maxval");
  if (width <= 0) throw FormatError("width", "must be positive");
  if (height <= 0) throw FormatError("height", "must be positive");
  if (maxval != 255) throw FormatError("maxval", "only 255 is supported, got " + std::to_string(maxval));

  const auto rows = static_cast<std::size_t>(height);
  const auto cols = static_cast<std::size_t>(width);
  Vec data(rows * cols);
  if (magic == "P5") {
    const std::size_t offset = header.raster_offset();
    if (offset > bytes.size() || bytes.size() - offset < data.size()) {
      throw FormatError("payload", "truncated: expected " + std::to_string(data.size()) + " bytes");
    }
    for (std::size_t i = 0; i < data.size(); ++i)
      data[i] = static_cast<unsigned char>(bytes[offset + i]) / 255.0;
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::string t = header.token();
      if (t.empty()) throw FormatError("payload", "truncated: expected " + std::to_string(data.size()) + " values");
      long v = 0;
      try {
        v = std::stol(t);
      } catch (const std::exception&) {
        throw FormatError("payload", "bad sample '" + t + "'");
      }
      if (v < 0 || v > 255) throw FormatError("payload", "sample " + t + " exceeds maxval");
      data[i] = static_cast<double>(v) / 255.0;
    }
  }
  return Image(rows, cols, std::move(data));
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string raster(img.size(), '\0');
  const auto px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::clamp(px[i], 0.0, 1.0);
    raster[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kpnp
