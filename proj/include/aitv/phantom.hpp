#pragma once

#include <string>
#include <vector>

#include "aitv/grid.hpp"
#include "aitv/segment.hpp"

namespace aitv {

// Clean synthetic image with its exact segmentation.
struct LabeledPhantom {
  MultiChannelImage image;             // 1 channel (grayscale) or 3 (color)
  Segmentation gt;
  std::vector<std::string> region_names;  // size K, index = label-1
};

// Two-valued retinal-style vessel tree: background 200, vessels 255.
LabeledPhantom phantom_vessels(int rows = 584, int cols = 565);

// Four-valued brain slice: background 10, outer fluid band 48, gray ring
// 106, white interior 154, with two fluid ventricles inside.
LabeledPhantom phantom_brain(int rows = 104, int cols = 87);

// Six flat-colored shapes on a colored background, RGB in [0,1].
LabeledPhantom phantom_shapes(int rows = 375, int cols = 500);

// Dispatch by name: "vessels", "brain", "shapes".  Zero dims pick the
// defaults above.
LabeledPhantom make_phantom(const std::string& name, int rows = 0, int cols = 0);

}  // namespace aitv
