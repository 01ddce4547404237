#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dpmd/geom.hpp"
#include "dpmd/md.hpp"

namespace dpmd {

// Extended xyz: count line, comment line with Lattice / Properties / pbc
// plus any extra key=value entries, then element and position per atom,
// full round-trip precision.
void write_xyz_frame(std::ostream& os, const AtomicConfig& cfg,
                     const std::vector<std::pair<std::string, std::string>>& extra = {});
void write_xyz(const std::string& path, const AtomicConfig& cfg,
               const std::vector<std::pair<std::string, std::string>>& extra = {});

// First frame of the file. Type ids index type_names in order of first
// appearance; callers matching against a model remap with assign_types.
AtomicConfig read_xyz(const std::string& path);

// Rewrite cfg.type / type_names to follow the given species order.
void assign_types(AtomicConfig& cfg, const std::vector<std::string>& species);

// Thermo table: comment lines with provenance, then a header row and one
// CSV row per record (step, ke, pe, temperature, pressure).
void write_thermo_csv(const std::string& path, const std::vector<ThermoRecord>& records,
                      const std::vector<std::string>& comments = {});

} // namespace dpmd
