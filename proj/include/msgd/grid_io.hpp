#pragma once

// Grid import/export.
//
// CSV: first line is the axis sizes "m1,m2,...,md"; the values follow
// row-major (last axis fastest), one last-axis row per line. Doubles are
// written with shortest round-trip precision, so write/read is lossless.
//
// Binary: magic "MSGD", then u32 d, u32 dims[d], f64 values[count], all
// little-endian.

#include <string>

#include "msgd/grid.hpp"

namespace msgd {

GridField read_grid_csv(const std::string& path);
void write_grid_csv(const std::string& path, const GridField& grid);

GridField read_grid_binary(const std::string& path);
void write_grid_binary(const std::string& path, const GridField& grid);

// Dispatch on extension: ".csv" text, anything else binary.
GridField read_grid_auto(const std::string& path);

}  // namespace msgd
