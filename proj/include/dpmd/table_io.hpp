#pragma once

#include <string>
#include <vector>

#include "dpmd/table.hpp"

namespace dpmd {

// Binary table container, little-endian:
//   bytes 0..3   magic "DPTB"
//   u32          format version (1)
//   u32          table count (one per neighbor type)
//   u32          m, features per table
//   u32          block size B
//   u64          n, intervals per table
//   f64          x0
//   f64          h
// followed by each table's coefficient payload in storage order: per
// interval, per feature block, the six coefficient runs of B doubles each
// (the last block zero-padded past m). All tables must share m, n, x0, h.
void write_tables(const std::string& path, const std::vector<CompressionTable>& tabs);

std::vector<CompressionTable> read_tables(const std::string& path);

} // namespace dpmd
