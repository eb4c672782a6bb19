#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lossbar/cli.hpp"
#include "lossbar/error.hpp"
#include "lossbar/io.hpp"

using namespace lossbar;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lossbar_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lossbar");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto dir = scratch("config");
  const auto c = RunConfig::parse("# comment\nfield = mlp  # trailing\ndataset = data/x.csv\nalpha_grid = 0.25, 0.75\n", dir);
  CHECK(c.text("field", "") == "mlp");
  CHECK(c.path("dataset") == dir / "data/x.csv");
  CHECK(c.reals("alpha_grid", {}) == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(RunConfig::parse("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("seed = x\n").seed(), ConfigError);
  CHECK_THROWS_AS(path_config(RunConfig::parse("alpha_grid = 0.5, 1.5\n")), ConfigError);
  CHECK_THROWS_AS(path_config(RunConfig::parse("path_lr = 0.1\npath_m1 = 3\n")), ConfigError);
  const auto p = path_config(RunConfig::parse("path_m1 = 2\npath_m2 = 8\npath_lr_max = 0.05\npath_lr_min = 0.001\n"));
  CHECK(p.lr.m2 == 8.0);
  CHECK(p.lr.lr_max == 0.05);
}

TEST_CASE("minima command") {
  const auto dir = scratch("minima");
  const auto cfg = write(dir / "gmm.cfg", "field = gaussian_mixture_2d\nfield_seed = 7\nseed = 7\nminima_count = 10\n");
  const auto a = run({"--config", cfg.string(), "--out", (dir / "a").string(), "minima"});
  const auto b = run({"--config", cfg.string(), "--out", (dir / "b").string(), "--workers", "3", "minima"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("10 minima") != std::string::npos);
  CHECK(slurp(dir / "a/minima.json") == slurp(dir / "b/minima.json"));
  CHECK(io::minima_from_json(io::read_json(dir / "a/minima.json")).size() == 10);

  const auto zero = write(dir / "zero.cfg", "field = double_well_1d\nminima_count = 0\n");
  CHECK(run({"--config", zero.string(), "--out", dir.string(), "minima"}).code == 2);

  const auto mlp = write(dir / "mlp.cfg", "field = mlp\nmlp_layers = 2,8,2\n");
  const auto r = run({"--config", mlp.string(), "--out", dir.string(), "minima"});
  CHECK(r.code == 2);
  CHECK(r.err.find("'dataset'") != std::string::npos);
}

TEST_CASE("barcode, toscore and plot") {
  const auto dir = scratch("barcode");
  const auto cfg = write(dir / "dw.cfg", "field = double_well_1d\nseed = 1\nminima_count = 6\nout = results\n");
  const auto r = run({"--config", cfg.string(), "barcode"});
  REQUIRE(r.code == 0);
  const auto json = io::read_json(dir / "results/barcode.json");
  REQUIRE(json["segments"].size() == 1);
  CHECK(std::abs(json["segments"][0]["birth"].get<double>() + 0.25) < 1e-3);
  CHECK(std::abs(json["segments"][0]["death"].get<double>()) < 1e-3);
  CHECK(json["essential"]["birth"].get<double>() == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(json["meta"]["field"] == "double_well_1d");

  const auto first = slurp(dir / "results/barcode.json");
  REQUIRE(run({"--config", cfg.string(), "--workers", "2", "barcode"}).code == 0);
  CHECK(slurp(dir / "results/barcode.json") == first);

  const auto svg = slurp(dir / "results/barcode.svg");
  CHECK(count(svg, "class=\"bar") == 2);
  CHECK(count(svg, "class=\"arrow\"") == 1);

  const auto score = run({"--out", dir.string(), "toscore", (dir / "results/barcode.json").string()});
  REQUIRE(score.code == 0);
  CHECK(std::abs(std::stod(score.out) - 0.125) < 1e-3);
  CHECK(io::read_json(dir / "toscore.json")["to_score"].get<double>() == doctest::Approx(0.125).epsilon(1e-2));

  CHECK(run({"--out", dir.string(), "plot", (dir / "results/barcode.json").string()}).code == 0);
  CHECK(fs::exists(dir / "barcode.svg"));
}

TEST_CASE("toscore on hand-written files") {
  const auto dir = scratch("toscore");
  const auto ideal = write(dir / "ideal.json", R"({"essential":{"birth":0.5},"segments":[]})");
  const auto r = run({"--out", dir.string(), "toscore", ideal.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "0.000000\n");

  const auto bad = write(dir / "bad.json", R"({"essential":{"birth":0},"segments":[{"birth":1,"death":0.5}]})");
  const auto b = run({"--out", dir.string(), "toscore", bad.string()});
  CHECK(b.code == 2);
  CHECK(b.err.find("death") != std::string::npos);

  const auto junk = write(dir / "junk.json", "{not json");
  CHECK(run({"--out", dir.string(), "toscore", junk.string()}).code == 2);
  CHECK(run({"--out", dir.string(), "toscore", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("single minimum draws one bar") {
  const auto dir = scratch("single");
  const auto cfg = write(dir / "bowl.cfg", "field = quadratic_bowl\nminima_count = 3\n");
  REQUIRE(run({"--config", cfg.string(), "--out", dir.string(), "barcode"}).code == 0);
  CHECK(count(slurp(dir / "barcode.svg"), "class=\"bar") == 1);
}

TEST_CASE("compare exit codes") {
  const auto dir = scratch("compare");
  const auto dw = write(dir / "dw.cfg", "field = double_well_1d\nseed = 1\n");
  const auto ok = run({"--config", dw.string(), "--out", dir.string(), "compare"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);

  const auto gmm = write(dir / "gmm.cfg", "field = gaussian_mixture_2d\nfield_seed = 7\nseed = 1\nminima_count = 20\n");
  CHECK(run({"--config", gmm.string(), "--out", dir.string(), "compare"}).code == 0);

  // too few starts to find every minimum, held to a tight tolerance
  const auto few = write(dir / "few.cfg", "field = gaussian_mixture_2d\nfield_seed = 7\nseed = 1\nminima_count = 2\n");
  const auto fail = run({"--config", few.string(), "--out", dir.string(), "compare"});
  CHECK(fail.code == 1);
  CHECK(fail.out.find("FAIL") != std::string::npos);

  const auto eta = write(dir / "eta.cfg", "field = gaussian_mixture_2d\nfield_seed = 7\nseed = 1\ntrain_lr = 10\n");
  CHECK(run({"--config", eta.string(), "--out", dir.string(), "compare"}).code == 3);

  const auto mlp = write(dir / "mlp.cfg", "field = mlp\nmlp_layers = 2,4,2\ndataset_generate = two_moons\n");
  CHECK(run({"--config", mlp.string(), "--out", dir.string(), "compare"}).code == 2);
}

TEST_CASE("path and morse commands") {
  const auto dir = scratch("morse");
  const auto cfg = write(dir / "gmm.cfg",
                         "field = gaussian_mixture_2d\nfield_seed = 7\nseed = 2\nminima_count = 12\n"
                         "path_epochs = 40\nr_max = 2\n");
  REQUIRE(run({"--config", cfg.string(), "--out", dir.string(), "minima"}).code == 0);
  const auto p = run({"--config", cfg.string(), "--out", dir.string(), "path", "--from", "0", "--to", "3"});
  CHECK(p.code == 0);
  CHECK(fs::exists(dir / "path.json"));
  const auto trace = slurp(dir / "path_trace.csv");
  CHECK(trace.rfind("epoch,max_loss,mean_orth_norm,mean_tang_norm\n", 0) == 0);
  CHECK(count(trace, "\n") == 42);

  const auto m = run({"--config", cfg.string(), "--out", dir.string(), "morse", "--minima",
                      (dir / "minima.json").string()});
  REQUIRE(m.code == 0);
  CHECK(m.out.find("index-1") != std::string::npos);
  const auto d = io::read_json(dir / "diagrams.json");
  REQUIRE(d["diagrams"].size() == 3);
  CHECK(d["diagrams"][1]["dimension"] == 1);
}

TEST_CASE("depth study") {
  const auto dir = scratch("depth");
  const auto cfg = write(dir / "depth.cfg",
                         "field = mlp\ndataset_generate = two_moons\ndataset_size = 60\nseed = 3\n"
                         "depths = 1, 2\nwidth = 4\nminima_count = 3\nmax_steps = 300\n"
                         "path_epochs = 10\npath_points = 5\n");
  REQUIRE(run({"--config", cfg.string(), "--out", dir.string(), "depth-study"}).code == 0);
  const auto csv = slurp(dir / "depth_study.csv");
  CHECK(csv.rfind("spec,minimum_id,birth,death\n", 0) == 0);
  CHECK(count(csv, "2-4-2/relu,") >= 1);
  CHECK(count(csv, "2-4-2/relu,") <= 3);
  CHECK(count(csv, "2-4-4-2/relu,") <= 3);
  const auto svg = slurp(dir / "depth_study.svg");
  CHECK(svg.find("2-4-2/relu") < svg.find("2-4-4-2/relu"));
  REQUIRE(run({"--config", cfg.string(), "--out", (dir / "again").string(), "depth-study"}).code == 0);
  CHECK(slurp(dir / "again/depth_study.csv") == csv);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--config", "/nonexistent/x.cfg", "minima"}).code == 2);
}
