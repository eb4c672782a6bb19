#include "lossbar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "CLI11.hpp"
#include "lossbar/error.hpp"
#include "lossbar/io.hpp"
#include "lossbar/morse.hpp"
#include "lossbar/oracle.hpp"
#include "lossbar/svg.hpp"

namespace lossbar::cli {

namespace {

std::string fixed(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ostream& report(const Context& ctx) {
  static std::ostream null(nullptr);
  return ctx.out ? *ctx.out : null;
}

io::Json meta_for(const RunConfig& c, const ScalarField& field) {
  io::Json m;
  m["field"] = field.name();
  m["seed"] = c.seed();
  m["path_config"] = io::path_config_to_json(path_config(c));
  return m;
}

double default_init_scale(const RunConfig& c) {
  const auto f = c.text("field", "");
  return f == "mlp" ? 1.0 : f == "gaussian_mixture_2d" ? 2.5 : 1.5;
}

std::vector<Minimum> sample_from_config(const RunConfig& c, const ScalarField& field, Exec exec) {
  const auto count = c.count("minima_count", 10);
  if (count == 0) throw ConfigError("minima_count", "must be positive");
  const double scale = c.real("init_scale", default_init_scale(c));
  if (!(scale > 0.0)) throw ConfigError("init_scale", "must be positive");
  return sample_minima(field, count, c.seed(), scale, train_config(c), exec);
}

void print_barcode(std::ostream& os, const BarcodeResult& r) {
  os << "essential: [" << fixed(r.barcode.essential.birth) << ", inf)  minimum "
     << r.barcode.essential.minimum_id << "\n";
  for (const auto& s : r.barcode.segments)
    os << "segment:   [" << fixed(s.birth) << ", " << fixed(s.death) << "]  minimum "
       << s.minimum_id << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  if (!r.dropped_duplicates.empty())
    os << "merged " << r.dropped_duplicates.size() << " duplicate minima\n";
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Minimum> load_or_sample_minima(const Context& ctx, const ScalarField& field,
                                           const std::optional<std::filesystem::path>& file) {
  std::optional<std::filesystem::path> source = file;
  if (!source && ctx.config.has("minima")) source = ctx.config.path("minima");
  if (!source) return sample_from_config(ctx.config, field, ctx.exec);
  auto minima = io::minima_from_json(io::read_json(*source));
  if (minima.front().params.dim() != field.dim())
    throw DimensionError(field.dim(), minima.front().params.dim());
  return minima;
}

int cmd_minima(const Context& ctx) {
  const auto field = field_from_config(ctx.config, ctx.exec);
  const auto minima = sample_from_config(ctx.config, *field, ctx.exec);
  io::write_json(ctx.out_dir / "minima.json", io::minima_to_json(minima));
  double lo = kInf, hi = -kInf;
  std::size_t converged = 0;
  for (const auto& m : minima) {
    lo = std::min(lo, m.loss);
    hi = std::max(hi, m.loss);
    converged += m.converged;
  }
  report(ctx) << minima.size() << " minima of " << field->name() << ", loss range [" << fixed(lo)
              << ", " << fixed(hi) << "], " << converged << " converged\n";
  return kOk;
}

int cmd_path(const Context& ctx, std::size_t from, std::size_t to) {
  const auto field = field_from_config(ctx.config, ctx.exec);
  const auto minima = load_or_sample_minima(ctx, *field, std::nullopt);
  if (from >= minima.size() || to >= minima.size())
    throw ValidationError("minimum index out of range (have " + std::to_string(minima.size()) + ")");
  const auto r = optimize_path(*field, minima[from], minima[to], path_config(ctx.config), ctx.exec);
  io::write_json(ctx.out_dir / "path.json", io::path_to_json(r.best_path));
  io::write_text(ctx.out_dir / "path_trace.csv", io::trace_csv(r.trace));
  report(ctx) << "path " << from << " -> " << to << ": max loss " << fixed(r.best_max)
              << " (epoch " << r.best_epoch << "), " << r.best_path.points.size() << " points\n";
  return kOk;
}

int cmd_barcode(const Context& ctx, const std::optional<std::filesystem::path>& minima_file) {
  const auto field = field_from_config(ctx.config, ctx.exec);
  const auto minima = load_or_sample_minima(ctx, *field, minima_file);
  const auto r = compute_barcode(minima, *field, barcode_config(ctx.config), ctx.exec);
  io::write_json(ctx.out_dir / "barcode.json", io::barcode_to_json(r.barcode, meta_for(ctx.config, *field)));
  io::write_text(ctx.out_dir / "barcode.svg", svg::barcode(r.barcode, field->name()));
  print_barcode(report(ctx), r);
  report(ctx) << "TO-score " << fixed(to_score(r.barcode)) << "\n";
  return kOk;
}

int cmd_toscore(const Context& ctx, const std::filesystem::path& barcode_file) {
  const auto b = io::barcode_from_json(io::read_json(barcode_file));
  const double s = to_score(b);
  report(ctx) << fixed(s) << "\n";
  io::Json j;
  j["to_score"] = s;
  io::write_json(ctx.out_dir / "toscore.json", j);
  return kOk;
}

int cmd_morse(const Context& ctx, const std::optional<std::filesystem::path>& minima_file) {
  const auto field = field_from_config(ctx.config, ctx.exec);
  const auto all = load_or_sample_minima(ctx, *field, minima_file);
  const auto bc = barcode_config(ctx.config);
  std::vector<Minimum> minima;
  for (std::size_t id : distinct_minima(all, bc.dedup_radius, bc.tie_epsilon)) minima.push_back(all[id]);
  const auto r_max = static_cast<int>(ctx.config.integer("r_max", 1));
  if (r_max != 1 && r_max != 2) throw ConfigError("r_max", "must be 1 or 2");
  const auto cx = build_complex(minima, *field, r_max, morse_config(ctx.config), ctx.exec);
  const auto diagrams = reduce(cx, ctx.config.real("tie_epsilon", kTieEpsilon));
  auto meta = meta_for(ctx.config, *field);
  meta["r_max"] = r_max;
  meta["clamped"] = cx.clamp_count;
  io::write_json(ctx.out_dir / "diagrams.json", io::diagrams_to_json(diagrams, meta));
  auto& os = report(ctx);
  for (int r = 0; r < r_max; ++r)
    os << "index-" << r << " TO-score " << fixed(index_r_to_score(diagrams, r)) << "  ("
       << diagrams[r].finite.size() << " finite bars)\n";
  os << minima.size() << " distinct minima of " << all.size() << "\n";
  if (cx.clamp_count) os << "clamped " << cx.clamp_count << " simplex values to their faces\n";
  return kOk;
}

CompareReport run_compare(const RunConfig& c, Exec exec) {
  const auto field = field_from_config(c, exec);
  const auto settings = oracle_settings(c, field->dim());
  CompareReport rep;
  const auto minima = sample_from_config(c, *field, exec);
  rep.pipeline = compute_barcode(minima, *field, barcode_config(c), exec);
  rep.pipeline_diagram = to_diagram(rep.pipeline.barcode);
  const auto grid = oracle::grid_sample(*field, settings.box, settings.resolution, exec);
  rep.oracle_diagram = oracle::sublevel_persistence(grid, 0).front();
  rep.distance = bottleneck_distance(rep.pipeline_diagram, rep.oracle_diagram);
  return rep;
}

int cmd_compare(const Context& ctx, double tolerance) {
  const auto rep = run_compare(ctx.config, ctx.exec);
  const bool pass = rep.distance < tolerance;
  auto& os = report(ctx);
  print_barcode(os, rep.pipeline);
  os << "oracle: " << rep.oracle_diagram.finite.size() << " finite bars, "
     << rep.oracle_diagram.essential.size() << " essential\n";
  os << "bottleneck distance " << fixed(rep.distance) << " (tolerance " << fixed(tolerance) << ") "
     << (pass ? "PASS" : "FAIL") << "\n";
  io::Json j;
  j["distance"] = rep.distance;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  io::write_json(ctx.out_dir / "compare.json", j);
  return pass ? kOk : kToleranceFailure;
}

std::vector<DepthRow> run_depth_study(const RunConfig& c, Exec exec) {
  const auto depths = c.counts("depths", {2, 3, 4});
  const auto width = c.count("width", 16);
  if (depths.empty()) throw ConfigError("depths", "empty list");
  if (width == 0) throw ConfigError("width", "must be positive");
  const auto data = dataset_from_config(c);
  const auto bc = barcode_config(c);
  std::vector<DepthRow> rows;
  for (std::size_t depth : depths) {
    if (depth == 0) throw ConfigError("depths", "need at least one hidden layer");
    DepthRow row;
    row.depth = depth;
    row.spec.layer_widths.assign(depth + 2, width);
    row.spec.layer_widths.front() = data->n_features;
    row.spec.layer_widths.back() = data->n_classes;
    const auto field = mlp_field_from_config(c, row.spec, data, exec);
    row.spec = static_cast<const MlpField&>(*field).spec();
    row.minima = sample_from_config(c, *field, exec);
    row.result = compute_barcode(row.minima, *field, bc, exec);
    std::vector<double> deaths;
    for (const auto& s : row.result.barcode.segments) deaths.push_back(s.death);
    row.median_death = median(deaths);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DepthRow& a, const DepthRow& b) { return a.depth < b.depth; });
  return rows;
}

int cmd_depth_study(const Context& ctx) {
  const auto rows = run_depth_study(ctx.config, ctx.exec);
  std::string csv = "spec,minimum_id,birth,death\n";
  std::vector<std::pair<std::string, Barcode>> panels;
  auto& os = report(ctx);
  for (const auto& row : rows) {
    const auto name = row.spec.to_string();
    const auto& b = row.result.barcode;
    csv += name + "," + std::to_string(b.essential.minimum_id) + "," + fixed(b.essential.birth, 9) +
           ",inf\n";
    for (const auto& s : b.segments)
      csv += name + "," + std::to_string(s.minimum_id) + "," + fixed(s.birth, 9) + "," +
             fixed(s.death, 9) + "\n";
    panels.emplace_back(name, b);
    os << name << ": " << b.segments.size() << " finite segments, median death "
       << (std::isnan(row.median_death) ? std::string("n/a") : fixed(row.median_death)) << "\n";
  }
  io::write_text(ctx.out_dir / "depth_study.csv", csv);
  io::write_text(ctx.out_dir / "depth_study.svg", svg::stacked_barcodes(panels, "barcodes by depth"));
  return kOk;
}

int cmd_plot(const Context& ctx, const std::filesystem::path& barcode_file) {
  const auto b = io::barcode_from_json(io::read_json(barcode_file));
  const auto target = ctx.out_dir / (barcode_file.stem().string() + ".svg");
  io::write_text(target, svg::barcode(b, barcode_file.stem().string()));
  report(ctx) << "wrote " << target.string() << "\n";
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const NonFiniteError*>(&e) ||
      dynamic_cast<const DegenerateError*>(&e))
    return kDivergence;
  return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barcodes of minima and saddles for loss landscapes"};
  app.require_subcommand(1);
  std::string config_file, out_dir;
  std::optional<std::int64_t> seed;
  int workers = 0;
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory (default: config 'out', else ./out)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--workers", workers, "worker threads (default: config 'workers', else 1)");

  auto* minima = app.add_subcommand("minima", "train minima from seeded initialisations");
  auto* path = app.add_subcommand("path", "optimise one path between two minima");
  std::size_t from = 0, to = 1;
  path->add_option("--from", from, "index of the start minimum");
  path->add_option("--to", to, "index of the end minimum");
  auto* barcode = app.add_subcommand("barcode", "barcode of minima, JSON + SVG");
  std::string minima_file;
  barcode->add_option("--minima", minima_file, "minima JSON (default: train from config)");
  auto* toscore = app.add_subcommand("toscore", "TO-score of a barcode file");
  std::string barcode_file;
  toscore->add_option("barcode", barcode_file, "barcode JSON")->required();
  auto* morse = app.add_subcommand("morse", "index-r barcodes from optimised simplices");
  morse->add_option("--minima", minima_file, "minima JSON (default: train from config)");
  auto* compare = app.add_subcommand("compare", "pipeline against the grid oracle");
  double tolerance = 0.05;
  compare->add_option("--tolerance", tolerance, "bottleneck tolerance");
  auto* depth = app.add_subcommand("depth-study", "barcodes of MLPs of increasing depth");
  auto* plot = app.add_subcommand("plot", "SVG of a barcode file");
  plot->add_option("barcode", barcode_file, "barcode JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    Context ctx;
    if (!config_file.empty()) ctx.config = RunConfig::load(config_file);
    if (seed) ctx.config.set("seed", std::to_string(*seed));
    if (compare->parsed() && ctx.config.has("tolerance") && compare->count("--tolerance") == 0)
      tolerance = ctx.config.real("tolerance", tolerance);
    const int w = workers > 0 ? workers : static_cast<int>(ctx.config.count("workers", 1));
    ctx.exec = Exec{std::max(1, w)};
    ctx.out_dir = !out_dir.empty() ? std::filesystem::path(out_dir)
                  : ctx.config.has("out") ? ctx.config.path("out")
                                          : std::filesystem::path("out");
    ctx.out = &out;
    std::optional<std::filesystem::path> mf;
    if (!minima_file.empty()) mf = minima_file;
    if (minima->parsed()) return cmd_minima(ctx);
    if (path->parsed()) return cmd_path(ctx, from, to);
    if (barcode->parsed()) return cmd_barcode(ctx, mf);
    if (toscore->parsed()) return cmd_toscore(ctx, barcode_file);
    if (morse->parsed()) return cmd_morse(ctx, mf);
    if (compare->parsed()) return cmd_compare(ctx, tolerance);
    if (depth->parsed()) return cmd_depth_study(ctx);
    if (plot->parsed()) return cmd_plot(ctx, barcode_file);
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "error: " << e.what() << "\n";
    return code;
  }
  return kConfigError;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace lossbar::cli
