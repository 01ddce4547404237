#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpmd/geom.hpp"
#include "dpmd/model.hpp"

namespace dpmd {

// Everything needed to generate a self-consistent model plus matching test
// configurations for one material family.
struct Preset {
  std::string name;
  std::vector<std::string> species;
  std::vector<double> masses;
  std::vector<int> max_nbr;
  double r_cut = 0.0;
  double r_smooth = 0.0;
  int d1 = 0;
  int m_lt = 0;
  int fit_width = 0;
  int fit_hidden = 0;
  double lattice_a = 0.0;          // fcc lattice constant for gen_config
  std::vector<int> site_pattern;   // type id per lattice site, cycled
  double fit_input_scale = 1.0;    // extra shrink on the first fitting layer
  double fit_out_scale = 1.0;      // overall energy scale, applied to the output layer
  double embed_w_sigma = 1.0;      // weight spread of the first embedding layer
  double embed_center_hi = 0.0;    // if > 0, spread tanh unit centers over [0, this]
};

const Preset& get_preset(const std::string& name);
std::vector<std::string> preset_names();

// Random model with layer-appropriate weight scales: weights N(0, 1/fan_in),
// biases N(0, 1) in the embedding nets. The fitting net sees the raw
// descriptor, whose entries are large, so its first layer is shrunk by the
// preset's fit_input_scale to keep the tanh units in their active range.
DPModel gen_model(const Preset& preset, std::uint64_t seed);

// Jittered fcc block: nx x ny x nz conventional cells, 4 sites each, types
// cycling through the preset's site pattern, every coordinate shifted by a
// uniform draw from [-jitter, jitter].
AtomicConfig gen_config(const Preset& preset, int nx, int ny, int nz, double jitter,
                        std::uint64_t seed);

struct ModelFile {
  DPModel model;
  std::string preset;
  std::uint64_t seed = 0;
};

void write_model(const std::string& path, const DPModel& model, const std::string& preset,
                 std::uint64_t seed);
ModelFile read_model(const std::string& path);

} // namespace dpmd
