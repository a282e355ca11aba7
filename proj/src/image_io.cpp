#include "aitv/image_io.hpp"

#include <png.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aitv/errors.hpp"

namespace aitv {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("read failure on '" + path + "'");
  return std::move(buf).str();
}

void atomic_write(const std::string& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." +
                          std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw DataError("write failure on '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot rename temp file into '" + path + "'");
  }
}

struct PngCursor {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
};

extern "C" void png_mem_read(png_structp p, png_bytep out, png_size_t n) {
  auto* c = static_cast<PngCursor*>(png_get_io_ptr(p));
  if (c->pos + n > c->size) png_error(p, "truncated PNG stream");
  std::memcpy(out, c->data + c->pos, n);
  c->pos += n;
}

extern "C" void png_mem_write(png_structp p, png_bytep data, png_size_t n) {
  auto* s = static_cast<std::string*>(png_get_io_ptr(p));
  s->append(reinterpret_cast<const char*>(data), n);
}

extern "C" void png_mem_flush(png_structp) {}

MultiChannelImage decode_png(const std::string& bytes, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG file '" + path + "'");
  }
  PngCursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
  png_set_read_fn(png, &cur, png_mem_read);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  (void)png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int rows = static_cast<int>(png_get_image_height(png, info));
  const int cols = static_cast<int>(png_get_image_width(png, info));
  const int nchan = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  if ((nchan != 1 && nchan != 3) || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported PNG layout in '" + path + "' (need 8/16-bit gray or RGB)");
  }

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> raw(rowbytes * rows);
  std::vector<png_bytep> rowptr(rows);
  for (int i = 0; i < rows; ++i) rowptr[i] = raw.data() + rowbytes * i;
  png_read_image(png, rowptr.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  MultiChannelImage img(nchan, rows, cols);
  for (int i = 0; i < rows; ++i) {
    const unsigned char* r = raw.data() + rowbytes * i;
    for (int j = 0; j < cols; ++j) {
      for (int c = 0; c < nchan; ++c) {
        double v;
        if (depth == 8) {
          v = r[j * nchan + c];
        } else {
          const int o = 2 * (j * nchan + c);
          v = (static_cast<unsigned>(r[o]) << 8) | r[o + 1];  // network byte order
        }
        img.channels[c](i, j) = v;
      }
    }
  }
  return img;
}

unsigned quantize(double x, double maxv, unsigned full) {
  const double q = std::nearbyint(x / maxv * full);
  if (!(q > 0.0)) return 0;
  if (q >= static_cast<double>(full)) return full;
  return static_cast<unsigned>(q);
}

std::string encode_png(const MultiChannelImage& img, double maxv) {
  if (maxv <= 0.0 || !std::isfinite(maxv))
    throw ParamError("PNG quantization range must be positive");
  const int nchan = img.nchannels();
  if (nchan != 1 && nchan != 3)
    throw ParamError("PNG writer handles 1 or 3 channels");
  const int rows = img.rows(), cols = img.cols();
  if (rows <= 0 || cols <= 0) throw ParamError("cannot write empty image");
  const bool gray = nchan == 1;
  const int depth = gray ? 16 : 8;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encoding failed");
  }
  std::string out;
  png_set_write_fn(png, &out, png_mem_write, png_mem_flush);
  png_set_IHDR(png, info, cols, rows, depth,
               gray ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t rowbytes = static_cast<std::size_t>(cols) * nchan * (depth / 8);
  std::vector<unsigned char> row(rowbytes);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int c = 0; c < nchan; ++c) {
        if (gray) {
          const unsigned q = quantize(img.channels[c](i, j), maxv, 65535);
          row[2 * j] = static_cast<unsigned char>(q >> 8);
          row[2 * j + 1] = static_cast<unsigned char>(q & 0xff);
        } else {
          row[j * 3 + c] =
              static_cast<unsigned char>(quantize(img.channels[c](i, j), maxv, 255));
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return out;
}

int next_pnm_int(const std::string& s, std::size_t& pos, const std::string& path) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    throw DataError("malformed PNM header in '" + path + "'");
  long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1'000'000'000L) throw DataError("PNM header value out of range in '" + path + "'");
    ++pos;
  }
  return static_cast<int>(v);
}

MultiChannelImage decode_pnm(const std::string& bytes, const std::string& path) {
  const int nchan = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const int cols = next_pnm_int(bytes, pos, path);
  const int rows = next_pnm_int(bytes, pos, path);
  const int maxval = next_pnm_int(bytes, pos, path);
  if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 65535)
    throw DataError("malformed PNM header in '" + path + "'");
  ++pos;  // single whitespace after maxval
  const int bpc = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(rows) * cols * nchan * bpc;
  if (bytes.size() - pos < need) throw DataError("truncated PNM data in '" + path + "'");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  MultiChannelImage img(nchan, rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      for (int c = 0; c < nchan; ++c) {
        double v;
        if (bpc == 1) {
          v = *p++;
        } else {
          v = (static_cast<unsigned>(p[0]) << 8) | p[1];
          p += 2;
        }
        img.channels[c](i, j) = v;
      }
  return img;
}

std::string format_matrix(const ImageGrid& g) {
  std::string out;
  out.reserve(g.size() * 20 + 16);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%d %d\n", g.rows(), g.cols());
  out += buf;
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", g(i, j));
      if (j) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace

MultiChannelImage read_image(const std::string& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) == 0)
    return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(bytes, path);
  // Fall back to the text matrix format.
  return MultiChannelImage(read_text_matrix(path));
}

void write_png(const std::string& path, const ImageGrid& g, double max_value) {
  atomic_write(path, encode_png(MultiChannelImage(g), max_value));
}

void write_png(const std::string& path, const MultiChannelImage& img, double max_value) {
  atomic_write(path, encode_png(img, max_value));
}

void write_text_matrix(const std::string& path, const ImageGrid& g) {
  atomic_write(path, format_matrix(g));
}

ImageGrid read_text_matrix(const std::string& path) {
  std::istringstream in(slurp(path));
  int rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw DataError("bad matrix header in '" + path + "'");
  ImageGrid g(rows, cols);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(in >> g[n]))
      throw DataError("bad matrix data in '" + path + "' at value " + std::to_string(n));
  }
  return g;
}

void write_label_matrix(const std::string& path, const Segmentation& seg) {
  std::string out;
  out.reserve(seg.labels.size() * 3 + 16);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%d %d\n", seg.rows, seg.cols);
  out += buf;
  for (int i = 0; i < seg.rows; ++i) {
    for (int j = 0; j < seg.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%d",
                    seg.labels[static_cast<std::size_t>(i) * seg.cols + j]);
      if (j) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  atomic_write(path, out);
}

Segmentation read_label_matrix(const std::string& path) {
  std::istringstream in(slurp(path));
  int rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw DataError("bad label matrix header in '" + path + "'");
  Segmentation seg;
  seg.rows = rows;
  seg.cols = cols;
  seg.labels.resize(static_cast<std::size_t>(rows) * cols);
  int maxlab = 0;
  for (std::size_t n = 0; n < seg.labels.size(); ++n) {
    if (!(in >> seg.labels[n]) || seg.labels[n] < 1)
      throw DataError("bad label in '" + path + "' at value " + std::to_string(n));
    maxlab = std::max(maxlab, seg.labels[n]);
  }
  seg.K = maxlab;
  return seg;
}

void write_label_png(const std::string& path, const Segmentation& seg) {
  static const unsigned char palette[20][3] = {
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240},  {240, 50, 230},
      {210, 245, 60},  {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
      {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195},
      {128, 128, 0},   {255, 215, 180}, {0, 0, 128},     {128, 128, 128}};
  MultiChannelImage img(3, seg.rows, seg.cols);
  for (int i = 0; i < seg.rows; ++i)
    for (int j = 0; j < seg.cols; ++j) {
      const int lab = seg.labels[static_cast<std::size_t>(i) * seg.cols + j];
      const unsigned char* rgb = palette[(lab - 1) % 20];
      for (int c = 0; c < 3; ++c) img.channels[c](i, j) = rgb[c];
    }
  atomic_write(path, encode_png(img, 255.0));
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in '" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  atomic_write(path, content);
}

}  // namespace aitv
