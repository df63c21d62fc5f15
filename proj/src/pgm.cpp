#include "lcr/pgm.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lcr {

namespace {

class HeaderReader {
 public:
  HeaderReader(std::string_view bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int read_uint(const char* field) {
    skip_space_and_comments();
    std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail(std::string(field) + " out of range");
      ++pos_;
    }
    if (pos_ == start) fail(std::string("missing ") + field);
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      fail("missing separator before pixel data");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError(origin_ + ": " + why);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_pgm(const Raster& raster) {
  std::ostringstream out;
  out << "P5\n" << raster.width() << ' ' << raster.height() << "\n255\n";
  std::string header = out.str();
  header.append(reinterpret_cast<const char*>(raster.pixels().data()),
                raster.pixels().size());
  return header;
}

Raster decode_pgm(std::string_view bytes, const std::string& origin) {
  HeaderReader reader(bytes, origin);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    reader.fail("not a binary PGM (expected magic P5)");
  reader.advance(2);
  int width = reader.read_uint("width");
  int height = reader.read_uint("height");
  int maxval = reader.read_uint("maxval");
  if (width <= 0 || height <= 0) reader.fail("non-positive extents");
  if (maxval != 255) reader.fail("unsupported maxval " + std::to_string(maxval));
  reader.expect_single_space();
  std::size_t need = static_cast<std::size_t>(width) * height;
  if (bytes.size() - reader.pos() < need)
    reader.fail("truncated pixel data (" +
                std::to_string(bytes.size() - reader.pos()) + " of " +
                std::to_string(need) + " bytes)");
  std::vector<std::uint8_t> pixels(need);
  std::memcpy(pixels.data(), bytes.data() + reader.pos(), need);
  return Raster(width, height, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  std::string bytes = encode_pgm(raster);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes, path.string());
  } catch (const ParseError& e) {
    throw DataError(e.what());
  }
}

}  // namespace lcr
