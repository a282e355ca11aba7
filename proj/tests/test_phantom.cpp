#include <doctest.h>

#include <set>

#include "aitv/errors.hpp"
#include "aitv/phantom.hpp"

using namespace aitv;

namespace {

std::set<double> value_set(const ImageGrid& g) {
  return std::set<double>(g.data(), g.data() + g.size());
}

void check_labels_cover(const Segmentation& gt) {
  std::set<int> seen(gt.labels.begin(), gt.labels.end());
  REQUIRE(!seen.empty());
  CHECK(*seen.begin() == 1);
  CHECK(*seen.rbegin() == gt.K);
  CHECK(static_cast<int>(seen.size()) == gt.K);
}

}  // namespace

TEST_CASE("vessel phantom: two exact levels aligned with its labels") {
  LabeledPhantom p = phantom_vessels();
  REQUIRE(p.image.nchannels() == 1);
  CHECK(p.image.rows() == 584);
  CHECK(p.image.cols() == 565);
  CHECK(p.gt.rows == 584);
  CHECK(p.gt.cols == 565);
  REQUIRE(p.gt.K == 2);
  REQUIRE(p.region_names == std::vector<std::string>{"background", "vessels"});
  check_labels_cover(p.gt);

  const std::set<double> vals = value_set(p.image.channels[0]);
  REQUIRE(vals == std::set<double>{200.0, 255.0});
  // Image and labels agree pixel for pixel.
  for (int i = 0; i < p.gt.rows; ++i)
    for (int j = 0; j < p.gt.cols; ++j)
      CHECK(p.image.channels[0](i, j) == (p.gt.label(i, j) == 1 ? 200.0 : 255.0));
}

TEST_CASE("brain phantom: four exact levels aligned with its labels") {
  LabeledPhantom p = phantom_brain();
  REQUIRE(p.image.nchannels() == 1);
  CHECK(p.image.rows() == 104);
  CHECK(p.image.cols() == 87);
  REQUIRE(p.gt.K == 4);
  REQUIRE(p.region_names ==
          std::vector<std::string>{"background", "CSF", "GM", "WM"});
  check_labels_cover(p.gt);

  const double values[4] = {10.0, 48.0, 106.0, 154.0};
  const std::set<double> vals = value_set(p.image.channels[0]);
  REQUIRE(vals == std::set<double>(values, values + 4));
  for (int i = 0; i < p.gt.rows; ++i)
    for (int j = 0; j < p.gt.cols; ++j)
      CHECK(p.image.channels[0](i, j) == values[p.gt.label(i, j) - 1]);
}

TEST_CASE("shapes phantom: six colored regions") {
  LabeledPhantom p = phantom_shapes();
  REQUIRE(p.image.nchannels() == 3);
  CHECK(p.image.rows() == 375);
  CHECK(p.image.cols() == 500);
  REQUIRE(p.gt.K == 6);
  REQUIRE(p.region_names.size() == 6);
  CHECK(p.region_names[0] == "background");
  check_labels_cover(p.gt);

  // RGB stays in [0,1]; edges are antialiased so only interior pixels (all
  // four neighbors share the label) must match their centroid color exactly.
  for (int c = 0; c < 3; ++c) {
    CHECK(p.image.channels[c].min_value() >= 0.0);
    CHECK(p.image.channels[c].max_value() <= 1.0);
  }
  REQUIRE(p.gt.centroids.size() == 6);
  std::size_t interior_checked = 0;
  for (int i = 2; i + 2 < p.gt.rows; ++i) {
    for (int j = 2; j + 2 < p.gt.cols; ++j) {
      const int lab = p.gt.label(i, j);
      bool interior = true;
      for (int di = -2; di <= 2 && interior; ++di)
        for (int dj = -2; dj <= 2; ++dj)
          if (p.gt.label(i + di, j + dj) != lab) {
            interior = false;
            break;
          }
      if (!interior) continue;
      for (int c = 0; c < 3; ++c)
        CHECK(p.image.channels[c](i, j) ==
              doctest::Approx(p.gt.centroids[lab - 1][c]).epsilon(1e-11));
      ++interior_checked;
      j += 3;  // thin out; the full scan is slow under doctest bookkeeping
    }
  }
  CHECK(interior_checked > 10000);
}

TEST_CASE("phantoms are deterministic") {
  LabeledPhantom a = phantom_vessels(128, 128);
  LabeledPhantom b = phantom_vessels(128, 128);
  CHECK(a.gt.labels == b.gt.labels);
  for (std::size_t n = 0; n < a.image.channels[0].size(); ++n)
    CHECK(a.image.channels[0][n] == b.image.channels[0][n]);
}

TEST_CASE("custom dimensions and dispatch") {
  LabeledPhantom p = make_phantom("brain", 64, 72);
  CHECK(p.image.rows() == 64);
  CHECK(p.image.cols() == 72);
  CHECK(p.gt.K == 4);
  check_labels_cover(p.gt);

  LabeledPhantom d = make_phantom("vessels");
  CHECK(d.image.rows() == 584);

  CHECK_THROWS_AS(make_phantom("cube"), ParamError);
  CHECK_THROWS_AS(make_phantom("brain", 8, 8), ParamError);
  CHECK_THROWS_AS(make_phantom("vessels", 16, 400), ParamError);
  CHECK_THROWS_AS(make_phantom("shapes", 16, 16), ParamError);
}
