#pragma once

#include <filesystem>
#include <string_view>

#include "liftsim/grid.hpp"

namespace liftsim {

enum class FileFormat { binary, csv_long };

// "binary" | "csv-long"
FileFormat parse_file_format(std::string_view name);
std::string_view file_format_name(FileFormat format);

// Binary layout, little-endian throughout:
//   magic "GRDS", version byte (1),
//   nx, ny, m as uint32,
//   x0, y0, dx, dy as float64,
//   m*ny*nx float64 cell values, replicate-major, row-major inside a replicate.
// Doubles are moved as raw bit patterns, so save/load round-trips bit-exactly
// (NaN payloads included).
//
// CSV-long layout: header "replicate,row,col,value" followed by one row per
// cell. The grid geometry is not stored; loading infers nx/ny/m from the
// indices and uses unit cells at the origin.
void save_grid_stack(const GridStack& stack, const std::filesystem::path& path,
                     FileFormat format);
GridStack load_grid_stack(const std::filesystem::path& path, FileFormat format);

}  // namespace liftsim
