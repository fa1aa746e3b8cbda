#pragma once

#include <filesystem>

#include "kpnp/image.hpp"

namespace kpnp {

/// Reads binary (P5) or ASCII (P2) PGM with maxval 255; value v maps to
/// v/255. Throws FormatError naming the bad field ("magic", "width",
/// "height", "maxval", "payload") and IoError if the file cannot be opened.
Image load_pgm(const std::filesystem::path& path);

/// Writes P5: clamps to [0, 1] and stores round(v*255).
void save_pgm(const Image& img, const std::filesystem::path& path);

}  // namespace kpnp
