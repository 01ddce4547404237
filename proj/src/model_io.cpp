#include "dpmd/model_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dpmd/rng.hpp"

namespace dpmd {

namespace {

using nlohmann::json;

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    std::vector<Preset> v;

    Preset cu;
    cu.name = "copper-like";
    cu.species = {"Cu"};
    cu.masses = {63.546};
    cu.max_nbr = {512};
    cu.r_cut = 8.0;
    cu.r_smooth = 7.5;
    cu.d1 = 32;
    cu.m_lt = 16;
    cu.fit_width = 240;
    cu.fit_hidden = 3;
    cu.lattice_a = 3.634;
    cu.site_pattern = {0};
    cu.fit_input_scale = 2.0e-3;
    cu.fit_out_scale = 0.1;
    cu.embed_w_sigma = 12.0;
    cu.embed_center_hi = 0.55;
    v.push_back(cu);

    Preset w;
    w.name = "water-like";
    w.species = {"O", "H"};
    w.masses = {15.999, 1.008};
    w.max_nbr = {46, 92};
    w.r_cut = 6.0;
    w.r_smooth = 5.5;
    w.d1 = 32;
    w.m_lt = 16;
    w.fit_width = 240;
    w.fit_hidden = 3;
    w.lattice_a = 4.6;
    w.site_pattern = {0, 1, 1};
    w.fit_input_scale = 2.0e-3;
    w.fit_out_scale = 0.1;
    w.embed_w_sigma = 12.0;
    w.embed_center_hi = 0.5;
    v.push_back(w);

    return v;
  }();
  return table;
}

void fill_gauss(Rng& rng, std::vector<double>& v, std::size_t n, double sigma) {
  v.resize(n);
  for (auto& x : v) x = sigma * rng.gaussian();
}

json net_to_json(const EmbeddingNet& e) {
  return json{{"d1", e.d1}, {"w0", e.w0}, {"b0", e.b0}, {"w1", e.w1},
              {"b1", e.b1}, {"w2", e.w2}, {"b2", e.b2}};
}

EmbeddingNet net_from_json(const json& j) {
  EmbeddingNet e;
  e.d1 = j.at("d1").get<int>();
  e.w0 = j.at("w0").get<std::vector<double>>();
  e.b0 = j.at("b0").get<std::vector<double>>();
  e.w1 = j.at("w1").get<std::vector<double>>();
  e.b1 = j.at("b1").get<std::vector<double>>();
  e.w2 = j.at("w2").get<std::vector<double>>();
  e.b2 = j.at("b2").get<std::vector<double>>();
  return e;
}

json fit_to_json(const FittingNet& f) {
  json layers = json::array();
  for (const auto& l : f.hidden) {
    layers.push_back(json{{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
  }
  return json{{"input_width", f.input_width},
              {"width", f.width},
              {"layers", layers},
              {"w_out", f.w_out},
              {"b_out", f.b_out}};
}

FittingNet fit_from_json(const json& j) {
  FittingNet f;
  f.input_width = j.at("input_width").get<int>();
  f.width = j.at("width").get<int>();
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.w = lj.at("w").get<std::vector<double>>();
    l.b = lj.at("b").get<std::vector<double>>();
    f.hidden.push_back(std::move(l));
  }
  f.w_out = j.at("w_out").get<std::vector<double>>();
  f.b_out = j.at("b_out").get<double>();
  return f;
}

} // namespace

const Preset& get_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw InputError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

DPModel gen_model(const Preset& preset, std::uint64_t seed) {
  DPModel m;
  m.species = preset.species;
  m.masses = preset.masses;
  m.max_nbr = preset.max_nbr;
  m.r_cut = preset.r_cut;
  m.r_smooth = preset.r_smooth;
  m.m_lt = preset.m_lt;

  Rng rng(seed);
  const int d1 = preset.d1;
  for (int t = 0; t < static_cast<int>(preset.species.size()); ++t) {
    EmbeddingNet e;
    e.d1 = d1;
    fill_gauss(rng, e.w0, d1, preset.embed_w_sigma);
    // Wide first-layer weights alone would park every unit's transition next
    // to the origin; placing the centers uniformly across the weighted radial
    // range keeps the net wiggly everywhere the data lives, which is what the
    // table accuracy sweep needs to resolve.
    if (preset.embed_center_hi > 0.0) {
      e.b0.resize(d1);
      for (int k = 0; k < d1; ++k) {
        e.b0[k] = -e.w0[k] * (preset.embed_center_hi * rng.uniform());
      }
    } else {
      fill_gauss(rng, e.b0, d1, 1.0);
    }
    fill_gauss(rng, e.w1, static_cast<std::size_t>(d1) * 2 * d1, 1.0 / std::sqrt(double(d1)));
    fill_gauss(rng, e.b1, 2 * d1, 1.0);
    fill_gauss(rng, e.w2, static_cast<std::size_t>(2 * d1) * 4 * d1,
               1.0 / std::sqrt(double(2 * d1)));
    fill_gauss(rng, e.b2, 4 * d1, 1.0);
    m.embedding.push_back(std::move(e));
  }

  const int din = preset.m_lt * 4 * d1;
  for (int t = 0; t < static_cast<int>(preset.species.size()); ++t) {
    FittingNet f;
    f.input_width = din;
    f.width = preset.fit_width;
    int cur = din;
    for (int k = 0; k < preset.fit_hidden; ++k) {
      DenseLayer l;
      l.in = cur;
      l.out = preset.fit_width;
      double sigma = 1.0 / std::sqrt(double(cur));
      if (k == 0) sigma *= preset.fit_input_scale;
      fill_gauss(rng, l.w, static_cast<std::size_t>(l.in) * l.out, sigma);
      fill_gauss(rng, l.b, l.out, 0.1);
      cur = l.out;
      f.hidden.push_back(std::move(l));
    }
    fill_gauss(rng, f.w_out, cur, preset.fit_out_scale / std::sqrt(double(cur)));
    f.b_out = 0.0;
    m.fitting.push_back(std::move(f));
  }

  m.validate();
  return m;
}

AtomicConfig gen_config(const Preset& preset, int nx, int ny, int nz, double jitter,
                        std::uint64_t seed) {
  if (nx < 1 || ny < 1 || nz < 1) throw InputError("cell repeat counts must be positive");
  if (jitter < 0.0) throw InputError("jitter must be non-negative");

  static const double basis[4][3] = {
      {0.0, 0.0, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};

  AtomicConfig cfg;
  const double a = preset.lattice_a;
  cfg.cell = Cell({a * nx, 0.0, 0.0, 0.0, a * ny, 0.0, 0.0, 0.0, a * nz},
                  {true, true, true});
  cfg.type_names = preset.species;

  Rng rng(seed);
  int site = 0;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int iz = 0; iz < nz; ++iz) {
        for (int b = 0; b < 4; ++b) {
          double base[3] = {a * (ix + basis[b][0]), a * (iy + basis[b][1]),
                            a * (iz + basis[b][2])};
          for (int x = 0; x < 3; ++x) {
            double off = jitter > 0.0 ? jitter * (2.0 * rng.uniform() - 1.0) : 0.0;
            cfg.pos.push_back(base[x] + off);
          }
          cfg.type.push_back(preset.site_pattern[site % preset.site_pattern.size()]);
          ++site;
        }
      }
    }
  }
  cfg.n_atoms = site;
  return cfg;
}

void write_model(const std::string& path, const DPModel& model, const std::string& preset,
                 std::uint64_t seed) {
  json j;
  j["format"] = "dpmd-model";
  j["version"] = 1;
  j["preset"] = preset;
  j["seed"] = seed;
  j["species"] = model.species;
  j["masses"] = model.masses;
  j["r_cut"] = model.r_cut;
  j["r_smooth"] = model.r_smooth;
  j["max_neighbors"] = model.max_nbr;
  j["m_lt"] = model.m_lt;
  json emb = json::array();
  for (const auto& e : model.embedding) emb.push_back(net_to_json(e));
  j["embedding"] = std::move(emb);
  json fits = json::array();
  for (const auto& f : model.fitting) fits.push_back(fit_to_json(f));
  j["fitting"] = std::move(fits);

  std::ofstream os(path);
  if (!os) throw InputError("cannot open model file for writing: " + path);
  os << j.dump() << '\n';
  if (!os) throw InputError("short write to model file: " + path);
}

ModelFile read_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open model file: " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw InputError("model file is not valid JSON: " + std::string(e.what()));
  }
  ModelFile mf;
  try {
    if (j.at("format").get<std::string>() != "dpmd-model") {
      throw InputError("not a model file: " + path);
    }
    if (j.at("version").get<int>() != 1) throw InputError("unsupported model file version");
    mf.preset = j.value("preset", std::string{});
    mf.seed = j.value("seed", std::uint64_t{0});
    DPModel& m = mf.model;
    m.species = j.at("species").get<std::vector<std::string>>();
    m.masses = j.at("masses").get<std::vector<double>>();
    m.r_cut = j.at("r_cut").get<double>();
    m.r_smooth = j.at("r_smooth").get<double>();
    m.max_nbr = j.at("max_neighbors").get<std::vector<int>>();
    m.m_lt = j.at("m_lt").get<int>();
    for (const auto& ej : j.at("embedding")) m.embedding.push_back(net_from_json(ej));
    for (const auto& fj : j.at("fitting")) m.fitting.push_back(fit_from_json(fj));
  } catch (const json::exception& e) {
    throw InputError("model file is missing fields: " + std::string(e.what()));
  }
  mf.model.validate();
  return mf;
}

} // namespace dpmd
