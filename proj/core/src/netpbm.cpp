#include "multishape/netpbm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "multishape/error.hpp"

namespace multishape {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    int value = 0;
    const char* first = bytes_.data() + pos_;
    const char* last = bytes_.data() + bytes_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) {
      throw Error(ErrorCode::kIoError, "malformed PGM: expected integer");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_pgm(const BinaryMask& mask) {
  std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                       std::to_string(mask.height()) + "\n255\n";
  std::string out = header;
  out.reserve(header.size() + mask.bits().size());
  for (auto b : mask.bits()) out.push_back(b ? static_cast<char>(255) : '\0');
  return out;
}

BinaryMask decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw Error(ErrorCode::kIoError, "not a PGM file (expected P5 or P2 magic)");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader reader(bytes);
  reader.advance(2);
  const int width = reader.next_int();
  const int height = reader.next_int();
  const int maxval = reader.next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorCode::kIoError, "malformed PGM header");
  }
  BinaryMask mask(width, height);
  auto bits = mask.bits();
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    reader.advance(1);
    const std::size_t sample = maxval > 255 ? 2 : 1;
    if (bytes.size() < reader.pos() + bits.size() * sample) {
      throw Error(ErrorCode::kIoError, "truncated PGM raster");
    }
    const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + reader.pos());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const unsigned v = sample == 1 ? raster[i] : (raster[2 * i] << 8 | raster[2 * i + 1]);
      bits[i] = v != 0 ? 1 : 0;
    }
  } else {
    for (auto& b : bits) b = reader.next_int() != 0 ? 1 : 0;
  }
  return mask;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::kIoError, "short write to " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename into " + path.string());
  }
}

BinaryMask read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError &&
        std::string_view(e.what()).find(path.string()) == std::string_view::npos) {
      throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
    }
    throw;
  }
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  write_file_atomic(path, encode_pgm(mask));
}

std::string encode_ppm(const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.dims.width) + " " +
                    std::to_string(image.dims.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size() * 3);
  for (const auto& px : image.pixels) {
    for (auto c : px) out.push_back(static_cast<char>(c));
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  write_file_atomic(path, encode_ppm(image));
}

}  // namespace multishape
