#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/grid.hpp"
#include "aitv/image_io.hpp"
#include "aitv/rng.hpp"
#include "oracles.hpp"

using namespace aitv;
namespace fs = std::filesystem;

namespace {

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

bool no_temp_leftovers(const fs::path& dir) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().find(".tmp.") != std::string::npos)
      return false;
  return true;
}

}  // namespace

TEST_CASE("text matrices round-trip exactly") {
  testo::ScratchDir dir("io_text");
  ImageGrid g(3, 4);
  Xoshiro256pp rng(1);
  for (std::size_t n = 0; n < g.size(); ++n)
    g[n] = (rng.uniform01() - 0.5) * std::pow(10.0, 6.0 * rng.uniform01() - 3.0);
  g(0, 0) = 0.1;  // not representable in binary; %.17g must still round-trip
  g(1, 1) = 1e-300;
  const std::string path = dir.file("m.txt");
  write_text_matrix(path, g);
  ImageGrid r = read_text_matrix(path);
  REQUIRE(r.rows() == 3);
  REQUIRE(r.cols() == 4);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(r[n] == g[n]);
  CHECK(no_temp_leftovers(dir.path));
}

TEST_CASE("a read image of a text matrix matches the direct reader") {
  testo::ScratchDir dir("io_dispatch");
  ImageGrid g(2, 2);
  g(0, 0) = 0.25;
  g(0, 1) = 123.5;
  g(1, 0) = -2.0;
  g(1, 1) = 7.0;
  const std::string path = dir.file("m.txt");
  write_text_matrix(path, g);
  MultiChannelImage img = read_image(path);
  REQUIRE(img.nchannels() == 1);
  for (std::size_t n = 0; n < g.size(); ++n)
    CHECK(img.channels[0][n] == g[n]);
}

TEST_CASE("label matrices round-trip and reject bad labels") {
  testo::ScratchDir dir("io_label");
  Segmentation seg;
  seg.rows = 2;
  seg.cols = 3;
  seg.K = 3;
  seg.labels = {1, 2, 3, 3, 2, 1};
  const std::string path = dir.file("seg.txt");
  write_label_matrix(path, seg);
  Segmentation r = read_label_matrix(path);
  CHECK(r.rows == 2);
  CHECK(r.cols == 3);
  CHECK(r.K == 3);
  CHECK(r.labels == seg.labels);

  std::ofstream bad(dir.file("bad.txt"));
  bad << "1 2\n0 5\n";  // label 0 is outside 1..K
  bad.close();
  CHECK_THROWS_AS(read_label_matrix(dir.file("bad.txt")), DataError);
}

TEST_CASE("16-bit grayscale png round-trips integer data exactly") {
  testo::ScratchDir dir("io_png16");
  ImageGrid g(5, 7);
  Xoshiro256pp rng(2);
  for (std::size_t n = 0; n < g.size(); ++n)
    g[n] = static_cast<double>(rng.below(65536));
  g[0] = 0.0;
  g[1] = 65535.0;
  const std::string path = dir.file("g.png");
  write_png(path, g, 65535.0);
  MultiChannelImage r = read_image(path);
  REQUIRE(r.nchannels() == 1);
  REQUIRE(r.rows() == 5);
  REQUIRE(r.cols() == 7);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(r.channels[0][n] == g[n]);
  CHECK(no_temp_leftovers(dir.path));
}

TEST_CASE("8-bit rgb png round-trips integer data exactly") {
  testo::ScratchDir dir("io_png8");
  MultiChannelImage img(3, 4, 6);
  Xoshiro256pp rng(3);
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < img.channels[c].size(); ++n)
      img.channels[c][n] = static_cast<double>(rng.below(256));
  const std::string path = dir.file("rgb.png");
  write_png(path, img, 255.0);
  MultiChannelImage r = read_image(path);
  REQUIRE(r.nchannels() == 3);
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < img.channels[c].size(); ++n)
      CHECK(r.channels[c][n] == img.channels[c][n]);
}

TEST_CASE("png writing clamps out-of-range values") {
  testo::ScratchDir dir("io_clamp");
  ImageGrid g(1, 3);
  g(0, 0) = -10.0;
  g(0, 1) = 0.5;
  g(0, 2) = 99.0;
  write_png(dir.file("c.png"), g, 1.0);
  MultiChannelImage r = read_image(dir.file("c.png"));
  CHECK(r.channels[0](0, 0) == 0.0);
  CHECK(r.channels[0](0, 1) == doctest::Approx(32768.0).epsilon(0.001));
  CHECK(r.channels[0](0, 2) == 65535.0);
}

TEST_CASE("binary pgm with one and two byte samples") {
  testo::ScratchDir dir("io_pgm");
  // P5, 3x2, maxval 255, with a comment line.
  std::vector<std::uint8_t> p5 = {'P', '5', '\n', '#', ' ', 'c', '\n',
                                  '3', ' ', '2', '\n', '2', '5', '5', '\n',
                                  0, 128, 255, 1, 2, 3};
  write_bytes(dir.file("a.pgm"), p5);
  MultiChannelImage a = read_image(dir.file("a.pgm"));
  REQUIRE(a.nchannels() == 1);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 3);
  CHECK(a.channels[0](0, 1) == 128.0);
  CHECK(a.channels[0](1, 2) == 3.0);

  // Two-byte samples are big-endian.
  std::vector<std::uint8_t> p5w = {'P', '5', '\n', '2', ' ', '1', '\n',
                                   '6', '5', '5', '3', '5', '\n',
                                   0x01, 0x00, 0xFF, 0xFE};
  write_bytes(dir.file("w.pgm"), p5w);
  MultiChannelImage w = read_image(dir.file("w.pgm"));
  CHECK(w.channels[0](0, 0) == 256.0);
  CHECK(w.channels[0](0, 1) == 65534.0);
}

TEST_CASE("binary ppm reads interleaved rgb") {
  testo::ScratchDir dir("io_ppm");
  std::vector<std::uint8_t> p6 = {'P', '6', '\n', '2', ' ', '1', '\n',
                                  '2', '5', '5', '\n',
                                  10, 20, 30, 40, 50, 60};
  write_bytes(dir.file("a.ppm"), p6);
  MultiChannelImage img = read_image(dir.file("a.ppm"));
  REQUIRE(img.nchannels() == 3);
  CHECK(img.channels[0](0, 0) == 10.0);
  CHECK(img.channels[1](0, 0) == 20.0);
  CHECK(img.channels[2](0, 0) == 30.0);
  CHECK(img.channels[0](0, 1) == 40.0);
  CHECK(img.channels[2](0, 1) == 60.0);
}

TEST_CASE("malformed inputs raise data errors") {
  testo::ScratchDir dir("io_bad");
  CHECK_THROWS_AS(read_image(dir.file("missing.png")), DataError);

  write_bytes(dir.file("trunc.pgm"), {'P', '5', '\n', '4', ' ', '4', '\n',
                                      '2', '5', '5', '\n', 1, 2, 3});
  CHECK_THROWS_AS(read_image(dir.file("trunc.pgm")), DataError);

  write_bytes(dir.file("junk.bin"), {'X', 'Y', 0, 1, 2});
  CHECK_THROWS_AS(read_image(dir.file("junk.bin")), DataError);

  std::ofstream m(dir.file("ragged.txt"));
  m << "2 3\n1 2 3\n4 5\n";
  m.close();
  CHECK_THROWS_AS(read_text_matrix(dir.file("ragged.txt")), DataError);
}

TEST_CASE("json round-trips through disk") {
  testo::ScratchDir dir("io_json");
  nlohmann::json j;
  j["alpha"] = 0.5;
  j["name"] = "case";
  j["list"] = {1, 2, 3};
  write_json(dir.file("c.json"), j);
  nlohmann::json r = read_json(dir.file("c.json"));
  CHECK(r == j);
  CHECK_THROWS_AS(read_json(dir.file("nope.json")), DataError);

  std::ofstream bad(dir.file("bad.json"));
  bad << "{ not json";
  bad.close();
  CHECK_THROWS_AS(read_json(dir.file("bad.json")), DataError);
}

TEST_CASE("label visualization uses one distinct color per label") {
  testo::ScratchDir dir("io_labelpng");
  Segmentation seg;
  seg.rows = 1;
  seg.cols = 4;
  seg.K = 4;
  seg.labels = {1, 2, 3, 4};
  write_label_png(dir.file("l.png"), seg);
  MultiChannelImage img = read_image(dir.file("l.png"));
  REQUIRE(img.nchannels() == 3);
  std::set<std::vector<double>> colors;
  for (int j = 0; j < 4; ++j)
    colors.insert({img.channels[0](0, j), img.channels[1](0, j),
                   img.channels[2](0, j)});
  CHECK(colors.size() == 4);
}

TEST_CASE("plain text files are written atomically") {
  testo::ScratchDir dir("io_text_file");
  write_text_file(dir.file("note.txt"), "hello\nworld\n");
  std::ifstream in(dir.file("note.txt"));
  std::string all((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  CHECK(all == "hello\nworld\n");
  CHECK(no_temp_leftovers(dir.path));
}
