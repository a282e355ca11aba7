#pragma once

#include <cstdint>
#include <utility>

#include "aitv/grid.hpp"
#include "aitv/spectral.hpp"

namespace aitv {

// Rescales so the largest intensity equals `peak`.  For multi-channel input
// the joint maximum over all channels sets the single scale factor.
ImageGrid scale_to_peak(const ImageGrid& g, double peak);
MultiChannelImage scale_to_peak(const MultiChannelImage& g, double peak);

// Pixelwise Poisson draws with the image as the mean field.
ImageGrid poisson_sample(const ImageGrid& mean, std::uint64_t seed);

// Divides by the maximum and returns it, so reconstructions can be mapped
// back to the original scale.
std::pair<ImageGrid, double> normalize_01(const ImageGrid& f);
std::pair<MultiChannelImage, double> normalize_01(const MultiChannelImage& f);

// Full degradation: scale to the photon peak, blur, then Poisson-sample.
// Channel c of a multi-channel image uses seed + c.
ImageGrid degrade(const ImageGrid& clean, double peak, const ConvKernel& blur,
                  std::uint64_t seed);
MultiChannelImage degrade(const MultiChannelImage& clean, double peak,
                          const ConvKernel& blur, std::uint64_t seed);

}  // namespace aitv
