#include "lossbar/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "lossbar/error.hpp"

namespace lossbar {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

void Dataset::validate() const {
  if (n_samples == 0) throw ValidationError("empty dataset");
  if (labels.size() != n_samples) throw ValidationError("label count differs from sample count");
  if (features.size() != n_samples * n_features)
    throw ValidationError("feature matrix has the wrong size");
  for (std::size_t l : labels)
    if (l >= n_classes) throw ValidationError("label " + std::to_string(l) + " out of range");
}

Dataset load_dataset(const std::filesystem::path& path, std::size_t n_classes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 2 || header.back() != "label")
    throw ParseError("expected header 'f0,...,fk,label'", line_no);
  for (std::size_t i = 0; i + 1 < header.size(); ++i)
    if (header[i] != "f" + std::to_string(i))
      throw ParseError("header column " + std::to_string(i) + " should be 'f" +
                           std::to_string(i) + "'",
                       line_no);

  Dataset d;
  d.n_features = header.size() - 1;
  std::size_t max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    for (std::size_t i = 0; i < d.n_features; ++i) {
      double v;
      if (!parse_double(cells[i], v))
        throw ParseError("non-numeric feature '" + cells[i] + "' in column f" + std::to_string(i),
                         line_no);
      d.features.push_back(v);
    }
    double lv;
    if (!parse_double(cells.back(), lv) || lv < 0 || lv != std::floor(lv) || lv > 1e9)
      throw ParseError("label '" + cells.back() + "' is not a non-negative integer", line_no);
    const auto label = static_cast<std::size_t>(lv);
    if (n_classes != 0 && label >= n_classes)
      throw ParseError("label " + std::to_string(label) + " out of range [0, " +
                           std::to_string(n_classes) + ")",
                       line_no);
    d.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  d.n_samples = d.labels.size();
  if (d.n_samples == 0) throw ValidationError("empty dataset: '" + path.string() + "'");
  d.n_classes = n_classes != 0 ? n_classes : std::max<std::size_t>(2, max_label + 1);
  return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset '" + path.string() + "'");
  for (std::size_t j = 0; j < data.n_features; ++j) out << 'f' << j << ',';
  out << "label\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.n_samples; ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.labels[i] << '\n';
  }
}

Dataset make_two_moons(std::size_t n_samples, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise);
  Dataset d;
  d.n_samples = n_samples;
  d.n_features = 2;
  d.n_classes = 2;
  d.features.reserve(2 * n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = angle(rng);
    const std::size_t label = i % 2;
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (noise > 0) {
      x += jitter(rng);
      y += jitter(rng);
    }
    d.features.push_back(x);
    d.features.push_back(y);
    d.labels.push_back(label);
  }
  return d;
}

}  // namespace lossbar
