#include "lossbar/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lossbar/error.hpp"

namespace lossbar::io {

Json number(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return v;
}

double read_number(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError("expected a number for '" + what + "'");
}

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

Json minimum_to_json(const Minimum& m) {
  Json j;
  j["params"] = m.params.coords();
  j["loss"] = m.loss;
  j["grad_norm"] = m.grad_norm;
  j["seed"] = m.seed;
  j["converged"] = m.converged;
  j["steps"] = m.steps;
  j["tol"] = m.tol;
  return j;
}

Minimum minimum_from_json(const Json& j) {
  Minimum m;
  const Json& p = field(j, "params");
  if (!p.is_array() || p.empty()) throw ValidationError("'params' must be a non-empty array");
  std::vector<double> coords;
  for (const auto& c : p) coords.push_back(read_number(c, "params"));
  m.params = ParamVector(std::move(coords));
  if (!m.params.is_finite()) throw ValidationError("non-finite minimum parameters");
  m.loss = read_number(field(j, "loss"), "loss");
  m.grad_norm = read_number(field(j, "grad_norm"), "grad_norm");
  m.seed = field(j, "seed").get<std::uint64_t>();
  m.converged = field(j, "converged").get<bool>();
  if (j.contains("steps")) m.steps = j.at("steps").get<std::size_t>();
  if (j.contains("tol")) m.tol = read_number(j.at("tol"), "tol");
  return m;
}

Json minima_to_json(const std::vector<Minimum>& minima) {
  Json arr = Json::array();
  for (const auto& m : minima) arr.push_back(minimum_to_json(m));
  return arr;
}

std::vector<Minimum> minima_from_json(const Json& j) {
  const Json& arr = j.is_object() && j.contains("minima") ? j.at("minima") : j;
  if (!arr.is_array()) throw ValidationError("minima file must hold an array");
  std::vector<Minimum> out;
  try {
    for (const auto& m : arr) out.push_back(minimum_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed minimum: ") + e.what());
  }
  if (out.empty()) throw ValidationError("minima file is empty");
  for (const auto& m : out)
    if (m.params.dim() != out.front().params.dim())
      throw DimensionError(out.front().params.dim(), m.params.dim());
  return out;
}

Json path_config_to_json(const PathConfig& c) {
  Json j;
  j["n_points"] = c.n_points;
  j["lr"] = {{"m1", c.lr.m1}, {"m2", c.lr.m2}, {"lr_max", c.lr.lr_max}, {"lr_min", c.lr.lr_min}};
  j["l2"] = c.l2;
  j["epochs"] = c.epochs;
  j["refine_every"] = c.refine_every;
  j["criterion"] = to_string(c.criterion);
  j["alpha_grid"] = c.alpha_grid;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  return j;
}

Json barcode_to_json(const Barcode& b, const Json& meta) {
  Json j;
  j["essential"] = {{"birth", b.essential.birth}, {"minimum_id", b.essential.minimum_id}};
  Json segs = Json::array();
  for (const auto& s : b.segments)
    segs.push_back({{"birth", s.birth}, {"death", number(s.death)}, {"minimum_id", s.minimum_id}});
  j["segments"] = std::move(segs);
  j["meta"] = meta;
  return j;
}

Barcode barcode_from_json(const Json& j) {
  Barcode b;
  try {
    const Json& e = field(j, "essential");
    b.essential.birth = read_number(field(e, "birth"), "essential.birth");
    b.essential.death = kInf;
    if (e.contains("minimum_id")) b.essential.minimum_id = e.at("minimum_id").get<std::size_t>();
    const Json& segs = field(j, "segments");
    if (!segs.is_array()) throw ValidationError("'segments' must be an array");
    for (const auto& s : segs) {
      Segment seg;
      seg.birth = read_number(field(s, "birth"), "birth");
      seg.death = read_number(field(s, "death"), "death");
      if (s.contains("minimum_id")) seg.minimum_id = s.at("minimum_id").get<std::size_t>();
      b.segments.push_back(seg);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed barcode: ") + e.what());
  }
  b.validate();
  return b;
}

Json diagrams_to_json(const std::vector<PersistenceDiagram>& diagrams, const Json& meta) {
  Json out;
  Json sets = Json::array();
  for (std::size_t r = 0; r < diagrams.size(); ++r) {
    Json d;
    d["dimension"] = r;
    Json ess = Json::array();
    for (double e : diagrams[r].essential) ess.push_back({{"birth", e}, {"death", "inf"}});
    d["essential"] = std::move(ess);
    Json segs = Json::array();
    for (const auto& p : diagrams[r].finite) segs.push_back({{"birth", p.birth}, {"death", p.death}});
    d["segments"] = std::move(segs);
    sets.push_back(std::move(d));
  }
  out["diagrams"] = std::move(sets);
  out["meta"] = meta;
  return out;
}

Json path_to_json(const PathState& path) {
  Json arr = Json::array();
  for (const auto& p : path.points) arr.push_back(p.coords());
  return arr;
}

PathState path_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("path must be an array of points");
  PathState p;
  for (const auto& pt : j) {
    std::vector<double> c;
    for (const auto& x : pt) c.push_back(read_number(x, "path"));
    p.points.emplace_back(std::move(c));
  }
  p.validate();
  return p;
}

std::string trace_csv(const PathTrace& trace) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  std::string out = "epoch,max_loss,mean_orth_norm,mean_tang_norm\n";
  char line[160];
  for (std::size_t e = 0; e < trace.max_loss.size(); ++e) {
    // epoch 0 is the initial path, before any step
    const double orth = e == 0 || e > trace.orth_norm.size() ? 0.0 : mean(trace.orth_norm[e - 1]);
    const double tang = e == 0 || e > trace.tang_norm.size() ? 0.0 : mean(trace.tang_norm[e - 1]);
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", e, trace.max_loss[e], orth, tang);
    out += line;
  }
  return out;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace lossbar::io
