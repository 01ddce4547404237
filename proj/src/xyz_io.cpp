#include "dpmd/xyz_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dpmd {

namespace {

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Minimal extxyz comment-line parser: key=value tokens, values optionally
// double-quoted with spaces inside.
std::vector<std::pair<std::string, std::string>> parse_comment(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t eq = line.find('=', i);
    if (eq == std::string::npos) break;
    std::string key = line.substr(i, eq - i);
    std::string val;
    i = eq + 1;
    if (i < line.size() && line[i] == '"') {
      std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) break;
      val = line.substr(i + 1, close - i - 1);
      i = close + 1;
    } else {
      std::size_t end = i;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      val = line.substr(i, end - i);
      i = end;
    }
    kv.emplace_back(std::move(key), std::move(val));
  }
  return kv;
}

} // namespace

void write_xyz_frame(std::ostream& os, const AtomicConfig& cfg,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  os << cfg.n_atoms << '\n';
  os << "Lattice=\"";
  for (int k = 0; k < 9; ++k) {
    if (k) os << ' ';
    os << fmt_g17(cfg.cell.h[k]);
  }
  os << "\" Properties=species:S:1:pos:R:3 pbc=\"";
  for (int k = 0; k < 3; ++k) {
    if (k) os << ' ';
    os << (cfg.cell.periodic[k] ? 'T' : 'F');
  }
  os << '"';
  for (const auto& [k, v] : extra) os << ' ' << k << '=' << v;
  os << '\n';
  for (int i = 0; i < cfg.n_atoms; ++i) {
    os << cfg.type_names[cfg.type[i]] << ' ' << fmt_g17(cfg.pos[3 * i]) << ' '
       << fmt_g17(cfg.pos[3 * i + 1]) << ' ' << fmt_g17(cfg.pos[3 * i + 2]) << '\n';
  }
}

void write_xyz(const std::string& path, const AtomicConfig& cfg,
               const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open xyz file for writing: " + path);
  write_xyz_frame(os, cfg, extra);
  if (!os) throw InputError("short write to xyz file: " + path);
}

AtomicConfig read_xyz(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open xyz file: " + path);

  std::string line;
  if (!std::getline(is, line)) throw InputError("xyz file is empty: " + path);
  int n = 0;
  try {
    n = std::stoi(line);
  } catch (...) {
    throw InputError("xyz count line is not a number: " + path);
  }
  if (n <= 0) throw InputError("xyz atom count must be positive: " + path);

  if (!std::getline(is, line)) throw InputError("xyz file missing comment line: " + path);
  auto kv = parse_comment(line);

  AtomicConfig cfg;
  cfg.n_atoms = n;
  std::array<double, 9> h{};
  bool have_lattice = false;
  std::array<bool, 3> pbc{true, true, true};
  for (const auto& [key, val] : kv) {
    if (key == "Lattice") {
      std::istringstream ss(val);
      for (int k = 0; k < 9; ++k) {
        if (!(ss >> h[k])) throw InputError("xyz Lattice needs nine numbers: " + path);
      }
      have_lattice = true;
    } else if (key == "pbc") {
      std::istringstream ss(val);
      std::string tok;
      for (int k = 0; k < 3 && ss >> tok; ++k) pbc[k] = (tok == "T" || tok == "true");
    }
  }
  if (!have_lattice) throw InputError("xyz file has no Lattice entry: " + path);
  cfg.cell = Cell(h, pbc);

  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw InputError("xyz file truncated: " + path);
    std::istringstream ss(line);
    std::string name;
    double x, y, z;
    if (!(ss >> name >> x >> y >> z)) throw InputError("bad xyz atom line: " + path);
    auto it = std::find(cfg.type_names.begin(), cfg.type_names.end(), name);
    int t;
    if (it == cfg.type_names.end()) {
      t = static_cast<int>(cfg.type_names.size());
      cfg.type_names.push_back(name);
    } else {
      t = static_cast<int>(it - cfg.type_names.begin());
    }
    cfg.type.push_back(t);
    cfg.pos.insert(cfg.pos.end(), {x, y, z});
  }
  return cfg;
}

void assign_types(AtomicConfig& cfg, const std::vector<std::string>& species) {
  std::vector<int> remap(cfg.type_names.size(), -1);
  for (std::size_t t = 0; t < cfg.type_names.size(); ++t) {
    auto it = std::find(species.begin(), species.end(), cfg.type_names[t]);
    if (it == species.end()) {
      throw InputError("configuration species " + cfg.type_names[t] + " not in model");
    }
    remap[t] = static_cast<int>(it - species.begin());
  }
  for (auto& t : cfg.type) t = remap[t];
  cfg.type_names = species;
}

void write_thermo_csv(const std::string& path, const std::vector<ThermoRecord>& records,
                      const std::vector<std::string>& comments) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open thermo file for writing: " + path);
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "step,ke,pe,temperature,pressure\n";
  for (const auto& r : records) {
    os << r.step << ',' << fmt_g17(r.ke) << ',' << fmt_g17(r.pe) << ','
       << fmt_g17(r.temperature) << ',' << fmt_g17(r.pressure) << '\n';
  }
  if (!os) throw InputError("short write to thermo file: " + path);
}

} // namespace dpmd
