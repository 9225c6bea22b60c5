#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "stagetv/grid.hpp"
#include "stagetv/stagewise.hpp"

namespace stagetv {

/// Reads an 8-bit binary PGM (P5) or an 8-bit PNG. Colour PNGs are reduced to
/// luminance 0.299 R + 0.587 G + 0.114 B. Throws FormatError.
ImageGrid load_image(const std::filesystem::path& path);

/// Writes quantize_8bit(grid) as P5 (.pgm) or PNG (.png), chosen by extension.
void save_image(const ImageGrid& grid, const std::filesystem::path& path);

inline constexpr const char* kTraceHeader = "stage,sigma,iter,rel_err,residual,psnr,ssim";

void write_trace(std::span<const TraceRow> rows, const std::filesystem::path& path);
std::vector<TraceRow> read_trace(const std::filesystem::path& path);

} // namespace stagetv
