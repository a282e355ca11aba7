#pragma once

#include <string>

#include <json.hpp>

#include "aitv/grid.hpp"
#include "aitv/segment.hpp"

namespace aitv {

// All writers are atomic: content is staged to a temporary file in the target
// directory and renamed into place.

// Reads PNG (8/16-bit, gray or RGB, alpha stripped), PGM/PPM, or the plain
// text matrix format, dispatching on magic bytes.  Values keep their native
// scale (0..255, 0..65535, or exact doubles for text).
MultiChannelImage read_image(const std::string& path);

// Quantized image writers.  Values are mapped from [0, max_value] to the full
// integer range and clamped; grayscale is written 16-bit, RGB 8-bit.
void write_png(const std::string& path, const ImageGrid& g, double max_value);
void write_png(const std::string& path, const MultiChannelImage& img, double max_value);

// Exact round-trip format: a "rows cols" header line followed by one line per
// row, values printed with %.17g.
void write_text_matrix(const std::string& path, const ImageGrid& g);
ImageGrid read_text_matrix(const std::string& path);

// Label map as a text matrix of integers (same header line).
void write_label_matrix(const std::string& path, const Segmentation& seg);
Segmentation read_label_matrix(const std::string& path);

// Label visualization with a fixed palette of distinct colors.
void write_label_png(const std::string& path, const Segmentation& seg);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace aitv
