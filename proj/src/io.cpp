#include "stagetv/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "stagetv/errors.hpp"
#include "stagetv/metrics.hpp"

namespace stagetv {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Header fields of a netpbm file: whitespace separated, '#' starts a comment.
class PnmHeader {
public:
  PnmHeader(const std::vector<unsigned char>& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  std::size_t next_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw FormatError(path_, "header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw FormatError(path_, "malformed PGM header");
    return value;
  }

  // Exactly one whitespace byte separates the maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError(path_, "malformed PGM header");
    }
    return pos_ + 1;
  }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string path_;
  std::size_t pos_ = 2;
};

ImageGrid load_pgm(const std::vector<unsigned char>& bytes, const std::string& path) {
  PnmHeader header(bytes, path);
  const std::size_t width = header.next_number();
  const std::size_t height = header.next_number();
  const std::size_t maxval = header.next_number();
  if (width == 0 || height == 0) throw FormatError(path, "zero image dimension");
  if (maxval == 0) throw FormatError(path, "maxval must be positive");
  if (maxval > 255) throw FormatError(path, "16-bit PGM is not supported");
  const std::size_t offset = header.raster_offset();
  if (bytes.size() - offset < width * height) throw FormatError(path, "truncated P5 body");

  std::vector<double> values(width * height);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = bytes[offset + k];
  return ImageGrid(height, width, std::move(values));
}

struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

ImageGrid load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw FormatError(path, std::string("PNG decode failed: ") + png.image.message);
  }
  if (png.image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw FormatError(path, "16-bit PNG is not supported");
  }
  const bool colour = (png.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t width = png.image.width;
  const std::size_t height = png.image.height;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw FormatError(path, std::string("PNG decode failed: ") + png.image.message);
  }

  std::vector<double> values(width * height);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (colour) {
      const png_byte* p = &buffer[3 * k];
      values[k] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    } else {
      values[k] = buffer[k];
    }
  }
  return ImageGrid(height, width, std::move(values));
}

std::vector<unsigned char> to_bytes(const ImageGrid& grid) {
  const ImageGrid q = quantize_8bit(grid);
  std::vector<unsigned char> bytes(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) bytes[k] = static_cast<unsigned char>(q[k]);
  return bytes;
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

} // namespace

ImageGrid load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return load_pgm(bytes, name);
  static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(png_magic, png_magic + 8, bytes.begin())) {
    return load_png(bytes, name);
  }
  throw FormatError(name, "unsupported format (expected binary PGM or PNG)");
}

void save_image(const ImageGrid& grid, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  const auto bytes = to_bytes(grid);
  if (ext == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string(), "cannot open for writing");
    out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(path.string(), "write failed");
  } else if (ext == ".png") {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(grid.cols());
    png.image.height = static_cast<png_uint_32>(grid.rows());
    png.image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png.image, path.string().c_str(), 0, bytes.data(), 0,
                                 nullptr)) {
      throw FormatError(path.string(), std::string("PNG write failed: ") + png.image.message);
    }
  } else {
    throw FormatError(path.string(), "unknown image extension (use .pgm or .png)");
  }
}

void write_trace(std::span<const TraceRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string(), "cannot open for writing");
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.stage << ',' << r.sigma << ',' << r.iter << ',' << format_real(r.rel_err) << ','
        << format_real(r.residual) << ',';
    if (r.psnr) out << format_real(*r.psnr);
    out << ',';
    if (r.ssim) out << format_real(*r.ssim);
    out << '\n';
  }
  if (!out) throw FormatError(path.string(), "write failed");
}

std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), "cannot open file");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw FormatError(path.string(), "missing trace header");
  }
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 7) throw FormatError(path.string(), "trace row needs 7 fields: " + line);
    try {
      TraceRow r;
      r.stage = std::stoul(f[0]);
      r.sigma = std::stoi(f[1]);
      r.iter = std::stoul(f[2]);
      r.rel_err = std::stod(f[3]);
      r.residual = std::stod(f[4]);
      if (!f[5].empty()) r.psnr = std::stod(f[5]);
      if (!f[6].empty()) r.ssim = std::stod(f[6]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError(path.string(), "bad number in trace row: " + line);
    }
  }
  return rows;
}

} // namespace stagetv
