#include "lossbar/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lossbar/dataset.hpp"
#include "lossbar/error.hpp"

namespace lossbar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double to_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& s) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

const std::vector<std::string> kKeys = {
    // landscape
    "field", "field_seed", "field_dim",
    "dataset", "dataset_generate", "dataset_size", "dataset_noise", "dataset_seed",
    "mlp_layers", "mlp_activation", "train_batch",
    // minima
    "seed", "workers", "minima_count", "init_scale",
    "train_lr", "train_lr_max", "train_lr_min", "train_m1", "train_m2", "momentum", "max_steps", "tol",
    // paths and barcodes
    "path_points", "path_lr", "path_lr_max", "path_lr_min", "path_m1", "path_m2", "path_l2",
    "path_epochs", "refine_every", "criterion", "alpha_grid", "path_batch", "include_bank",
    "nearest_lower", "chain_paths", "tie_epsilon", "dedup_radius",
    // oracle
    "grid_resolution", "grid_box", "tolerance",
    // morse
    "r_max", "grid_depth",
    // depth study
    "depths", "width",
    // plumbing
    "out", "minima",
};

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() { return kKeys; }

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    if (c.has(key)) throw ConfigError(key, "given twice");
    c.set(key, trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("--config", "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), file.parent_path().empty() ? "." : file.parent_path());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
    throw ConfigError(key, "unknown key");
  if (value.empty()) throw ConfigError(key, "empty value");
  values_[key] = value;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_real(key, it->second);
}

std::int64_t RunConfig::integer(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_int(key, it->second);
}

std::size_t RunConfig::count(const std::string& key, std::size_t fallback) const {
  const auto v = integer(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError(key, "must not be negative");
  return static_cast<std::size_t>(v);
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError(key, "expected true or false");
}

std::vector<double> RunConfig::reals(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(it->second)) out.push_back(to_real(key, s));
  return out;
}

std::vector<std::size_t> RunConfig::counts(const std::string& key,
                                           std::vector<std::size_t> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::size_t> out;
  for (const auto& s : split_list(it->second)) {
    const auto v = to_int(key, s);
    if (v < 0) throw ConfigError(key, "must not be negative");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::filesystem::path RunConfig::path(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "required but not set");
  const std::filesystem::path p(it->second);
  return p.is_absolute() ? p : base_dir_ / p;
}

std::uint64_t RunConfig::seed() const {
  const auto v = integer("seed", 0);
  if (v < 0) throw ConfigError("seed", "must not be negative");
  return static_cast<std::uint64_t>(v);
}

std::shared_ptr<const Dataset> dataset_from_config(const RunConfig& c) {
  if (c.has("dataset")) {
    if (c.has("dataset_generate")) throw ConfigError("dataset", "conflicts with dataset_generate");
    try {
      return std::make_shared<const Dataset>(load_dataset(c.path("dataset")));
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ConfigError("dataset", e.what());
    }
  }
  if (c.has("dataset_generate")) {
    const auto kind = c.text("dataset_generate", "");
    if (kind != "two_moons") throw ConfigError("dataset_generate", "only two_moons is available");
    const auto n = c.count("dataset_size", 400);
    if (n == 0) throw ConfigError("dataset_size", "must be positive");
    const auto seed = static_cast<std::uint64_t>(c.integer("dataset_seed", 0));
    return std::make_shared<const Dataset>(make_two_moons(n, c.real("dataset_noise", 0.1), seed));
  }
  throw ConfigError("dataset", "an MLP field needs a dataset path (or dataset_generate)");
}

namespace {

SchedulerSpec scheduler(const RunConfig& c, const std::string& prefix, double default_lr) {
  const std::string lr = prefix + "_lr";
  SchedulerSpec s;
  if (c.has(lr)) {
    for (const char* k : {"_lr_max", "_lr_min", "_m1", "_m2"})
      if (c.has(prefix + k)) throw ConfigError(prefix + k, "conflicts with " + lr);
    s = SchedulerSpec::constant(c.real(lr, default_lr));
  } else {
    s.m1 = c.real(prefix + "_m1", 0.0);
    s.m2 = c.real(prefix + "_m2", 0.0);
    s.lr_max = c.real(prefix + "_lr_max", 0.0);
    s.lr_min = c.real(prefix + "_lr_min", default_lr);
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(lr, e.what());
  }
  return s;
}

}  // namespace

FieldPtr field_from_config(const RunConfig& c, Exec exec) {
  const auto name = c.text("field", "");
  if (name.empty()) throw ConfigError("field", "required but not set");
  if (name == "mlp") {
    MlpSpec spec;
    spec.layer_widths = c.counts("mlp_layers", {});
    if (spec.layer_widths.empty()) throw ConfigError("mlp_layers", "required for mlp fields");
    return mlp_field_from_config(c, spec, dataset_from_config(c), exec);
  }
  try {
    return make_builtin(name, static_cast<std::uint64_t>(c.integer("field_seed", 0)),
                        c.count("field_dim", 2));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError("field", e.what());
  }
}

FieldPtr mlp_field_from_config(const RunConfig& c, const MlpSpec& base,
                               std::shared_ptr<const Dataset> data, Exec exec) {
  MlpSpec spec = base;
  try {
    spec.activation = parse_activation(c.text("mlp_activation", "relu"));
  } catch (const ValidationError& e) {
    throw ConfigError("mlp_activation", e.what());
  }
  std::optional<std::vector<std::size_t>> batch;
  if (const auto b = c.count("train_batch", 0); b > 0) {
    std::vector<std::size_t> idx(std::min(b, data->n_samples));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    batch = std::move(idx);
  }
  try {
    return make_mlp_field(spec, std::move(data), batch, exec);
  } catch (const ValidationError& e) {
    throw ConfigError("mlp_layers", e.what());
  }
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.scheduler = scheduler(c, "train", 0.05);
  t.momentum = c.real("momentum", t.momentum);
  if (!(t.momentum >= 0.0 && t.momentum < 1.0)) throw ConfigError("momentum", "must lie in [0, 1)");
  t.max_steps = c.count("max_steps", t.max_steps);
  if (t.max_steps == 0) throw ConfigError("max_steps", "must be positive");
  t.tol = c.real("tol", t.tol);
  if (!(t.tol > 0.0)) throw ConfigError("tol", "must be positive");
  return t;
}

PathConfig path_config(const RunConfig& c) {
  PathConfig p;
  p.n_points = c.count("path_points", p.n_points);
  if (p.n_points < 2) throw ConfigError("path_points", "need at least 2 interior points");
  p.lr = scheduler(c, "path", 1e-2);
  p.l2 = c.real("path_l2", p.l2);
  if (!(p.l2 >= 0.0)) throw ConfigError("path_l2", "must not be negative");
  p.epochs = c.count("path_epochs", p.epochs);
  p.refine_every = c.count("refine_every", p.refine_every);
  try {
    p.criterion = parse_refine_criterion(c.text("criterion", to_string(p.criterion)));
  } catch (const ValidationError& e) {
    throw ConfigError("criterion", e.what());
  }
  p.alpha_grid = c.reals("alpha_grid", p.alpha_grid);
  for (double a : p.alpha_grid)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha_grid", "values must lie in (0, 1)");
  p.batch_size = c.count("path_batch", 0);
  p.seed = c.seed();
  p.include_bank = c.flag("include_bank", false);
  return p;
}

BarcodeConfig barcode_config(const RunConfig& c) {
  BarcodeConfig b;
  b.path = path_config(c);
  b.tie_epsilon = c.real("tie_epsilon", b.tie_epsilon);
  b.dedup_radius = c.real("dedup_radius", b.dedup_radius);
  if (!(b.tie_epsilon >= 0.0)) throw ConfigError("tie_epsilon", "must not be negative");
  if (!(b.dedup_radius >= 0.0)) throw ConfigError("dedup_radius", "must not be negative");
  b.nearest_lower = c.count("nearest_lower", 0);
  b.chain_paths = c.flag("chain_paths", true);
  return b;
}

MorseConfig morse_config(const RunConfig& c) {
  MorseConfig m;
  m.path = path_config(c);
  m.grid_depth = c.count("grid_depth", 0);
  if (m.grid_depth != 0 && m.grid_depth < 4) throw ConfigError("grid_depth", "must be at least 4");
  return m;
}

OracleSettings oracle_settings(const RunConfig& c, std::size_t dim) {
  if (dim != 1 && dim != 2) throw ConfigError("field", "the grid oracle handles 1D and 2D fields only");
  OracleSettings s;
  const auto box = c.reals("grid_box", dim == 1 ? std::vector<double>{-1.6, 1.6}
                                                : std::vector<double>{-3.5, 3.5});
  if (box.size() != 2 && box.size() != 2 * dim)
    throw ConfigError("grid_box", "expected lo,hi or one lo,hi pair per axis");
  for (std::size_t a = 0; a < dim; ++a) {
    const std::size_t o = box.size() == 2 ? 0 : 2 * a;
    if (!(box[o + 1] > box[o])) throw ConfigError("grid_box", "empty interval");
    s.box.push_back({box[o], box[o + 1]});
  }
  const auto res = c.count("grid_resolution", dim == 1 ? 4097 : 513);
  if (res < 512) throw ConfigError("grid_resolution", "must be at least 512 per axis");
  s.resolution.assign(dim, res);
  return s;
}

}  // namespace lossbar
