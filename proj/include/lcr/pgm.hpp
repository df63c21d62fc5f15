#ifndef LCR_PGM_HPP_
#define LCR_PGM_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "lcr/raster.hpp"

namespace lcr {

// Binary PGM ("P5"), maxval 255. Header comments are accepted on read.
std::string encode_pgm(const Raster& raster);
Raster decode_pgm(std::string_view bytes, const std::string& origin = "<memory>");

void write_pgm(const std::filesystem::path& path, const Raster& raster);
Raster read_pgm(const std::filesystem::path& path);

}  // namespace lcr

#endif  // LCR_PGM_HPP_
