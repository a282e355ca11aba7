#include "aitv/degrade.hpp"

#include <cmath>

#include "aitv/errors.hpp"
#include "aitv/rng.hpp"

namespace aitv {

ImageGrid scale_to_peak(const ImageGrid& g, double peak) {
  if (!(peak > 0.0)) throw ParamError("peak must be positive");
  const double mx = g.max_value();
  if (!(mx > 0.0)) throw DataError("cannot scale an image with no positive values");
  ImageGrid out = g;
  const double s = peak / mx;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= s;
  return out;
}

MultiChannelImage scale_to_peak(const MultiChannelImage& g, double peak) {
  if (!(peak > 0.0)) throw ParamError("peak must be positive");
  if (g.channels.empty() || !g.consistent())
    throw DataError("empty or ragged multi-channel image");
  double mx = g.channels[0].max_value();
  for (const auto& c : g.channels) mx = std::max(mx, c.max_value());
  if (!(mx > 0.0)) throw DataError("cannot scale an image with no positive values");
  MultiChannelImage out = g;
  const double s = peak / mx;
  for (auto& c : out.channels)
    for (std::size_t n = 0; n < c.size(); ++n) c[n] *= s;
  return out;
}

ImageGrid poisson_sample(const ImageGrid& mean, std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  ImageGrid out(mean.rows(), mean.cols());
  for (std::size_t n = 0; n < mean.size(); ++n) {
    if (!(mean[n] >= 0.0)) throw DataError("negative mean in poisson sampling");
    out[n] = static_cast<double>(poisson_draw(mean[n], rng));
  }
  return out;
}

std::pair<ImageGrid, double> normalize_01(const ImageGrid& f) {
  const double mx = f.max_value();
  if (!(mx > 0.0)) throw DataError("cannot normalize an image with no positive values");
  ImageGrid out = f;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] /= mx;
  return {std::move(out), mx};
}

std::pair<MultiChannelImage, double> normalize_01(const MultiChannelImage& f) {
  if (f.channels.empty() || !f.consistent())
    throw DataError("empty or ragged multi-channel image");
  double mx = f.channels[0].max_value();
  for (const auto& c : f.channels) mx = std::max(mx, c.max_value());
  if (!(mx > 0.0)) throw DataError("cannot normalize an image with no positive values");
  MultiChannelImage out = f;
  for (auto& c : out.channels)
    for (std::size_t n = 0; n < c.size(); ++n) c[n] /= mx;
  return {std::move(out), mx};
}

ImageGrid degrade(const ImageGrid& clean, double peak, const ConvKernel& blur,
                  std::uint64_t seed) {
  const ImageGrid scaled = scale_to_peak(clean, peak);
  const SpectralKernel spec = kernel_spectrum(blur, clean.rows(), clean.cols());
  ImageGrid blurred = circular_convolve(scaled, spec);
  // Blurring nonnegative data with nonnegative taps can leave tiny negative
  // round-off; clip before sampling.
  for (std::size_t n = 0; n < blurred.size(); ++n)
    if (blurred[n] < 0.0) blurred[n] = 0.0;
  return poisson_sample(blurred, seed);
}

MultiChannelImage degrade(const MultiChannelImage& clean, double peak,
                          const ConvKernel& blur, std::uint64_t seed) {
  if (clean.channels.empty() || !clean.consistent())
    throw DataError("empty or ragged multi-channel image");
  const MultiChannelImage scaled = scale_to_peak(clean, peak);
  const SpectralKernel spec = kernel_spectrum(blur, clean.rows(), clean.cols());
  MultiChannelImage out;
  for (int c = 0; c < scaled.nchannels(); ++c) {
    ImageGrid blurred = circular_convolve(scaled.channels[c], spec);
    for (std::size_t n = 0; n < blurred.size(); ++n)
      if (blurred[n] < 0.0) blurred[n] = 0.0;
    out.channels.push_back(poisson_sample(blurred, seed + static_cast<std::uint64_t>(c)));
  }
  return out;
}

}  // namespace aitv
