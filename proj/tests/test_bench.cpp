#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "orchestra/bench.hpp"

using namespace orchestra;

namespace {

BenchConfig small_completion_config() {
  BenchConfig c;
  c.repeats = 2;
  c.seed = 3;
  c.gplvm_iters = 20;
  c.latent_dim = 2;
  c.sim_iters = 5;
  c.gmm_dim = 4;
  c.gmm_components = 2;
  c.max_test_items = 4;
  return c;
}

std::vector<PaletteSet> planted(int n, int k, std::uint64_t seed) {
  PlantedOptions o;
  o.n_palettes = n;
  o.k = k;
  o.seed = seed;
  return {planted_dataset(o).palettes};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = bench_config_from_json({{"synthetic", {{{"n", 30}, {"k", 6}, {"seed", 4}, {"replicates", 3}}}},
                                         {"palette_sizes", {6}},
                                         {"repeats", 2},
                                         {"train_ratio", 0.5}});
  REQUIRE(c.synthetic.size() == 3);
  CHECK(c.synthetic[0].seed == 4);
  CHECK(c.synthetic[1].seed != 4);
  CHECK(c.synthetic[1].seed != c.synthetic[2].seed);
  CHECK(c.synthetic[2].n_palettes == 30);
  CHECK(c.synthetic[2].k == 6);
  CHECK(c.repeats == 2);
  CHECK(c.train_ratio == 0.5);
  CHECK(bench_datasets(c).size() == 3);

  CHECK_THROWS_AS(bench_config_from_json({{"train_ratio", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(bench_config_from_json({{"repeats", 0}}), std::invalid_argument);
  CHECK_THROWS_AS(bench_config_from_json({{"synthetic", {{{"replicates", 0}}}}}), std::invalid_argument);
}

TEST_CASE("ordering of identical palettes costs nothing") {
  std::mt19937_64 rng(1);
  const auto p = testing::random_palette(rng, 5);
  BenchConfig c;
  c.repeats = 2;
  const auto r = ordering_benchmark(c, {PaletteSet(5, std::vector<Palette>(25, p))});
  CHECK(r.kind == "ordering");
  CHECK(r.conditions == std::vector<std::string>{"K=5"});
  for (const auto& m : default_ordering_methods()) {
    CHECK(r.cell(m, "K=5").count == 2);
    CHECK(r.cell(m, "K=5").mean == 0.0);
  }
}

TEST_CASE("ordering report shape and warnings") {
  BenchConfig c;
  c.repeats = 3;
  c.palette_sizes = {4, 5};
  auto data = planted(30, 4, 1);
  data.push_back(planted(10, 5, 2)[0]);
  const auto r = ordering_benchmark(c, data);
  CHECK(r.records.size() == 3 * 3);
  CHECK(r.cell("hue", "K=4").count == 3);
  CHECK(r.cell("hue", "K=5").count == 0);
  CHECK_THROWS_AS(r.cell("hue", "K=6"), std::out_of_range);
  CHECK(r.warnings.size() == 2);

  const auto again = ordering_benchmark(c, data);
  for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].error == again.records[i].error);
}

TEST_CASE("completion covers every method and condition") {
  auto c = small_completion_config();
  const auto data = planted(40, 5, 5);
  const auto r = completion_benchmark(c, data);
  CHECK(r.kind == "completion");
  CHECK(r.methods == default_completion_methods());
  CHECK(r.conditions == std::vector<std::string>{"observed=4", "observed=3", "observed=2", "observed=1"});
  CHECK(r.warnings.empty());
  for (const auto& m : r.methods) {
    for (const auto& cond : r.conditions) {
      const auto& cell = r.cell(m, cond);
      CHECK(cell.count == 2 * 4);
      CHECK(cell.mean >= 0.0);
      CHECK(cell.mean < 1.0);
    }
  }
  CHECK(r.records.size() == r.methods.size() * 4 * 2 * 4);

  const auto again = completion_benchmark(c, data);
  REQUIRE(again.records.size() == r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].error == again.records[i].error);
}

TEST_CASE("completion of a set of identical palettes") {
  // One repeated color: every method must reproduce it.
  const LabColor c{0.4, 0.6, 0.3};
  auto cfg = small_completion_config();
  cfg.methods = {"mean", "retrieval+spf", "retrieval+none", "gplvm+spf"};
  const auto r = completion_benchmark(cfg, {PaletteSet(5, std::vector<Palette>(20, Palette(std::vector<LabColor>(5, c))))});
  for (const auto& m : cfg.methods) {
    for (const auto& cond : r.conditions) CHECK(r.cell(m, cond).mean == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("summary statistics") {
  BenchReport r;
  r.kind = "ordering";
  r.methods = {"a"};
  r.conditions = {"x"};
  for (double e : {1.0, 2.0, 4.0}) r.records.push_back({"a", "x", 0, 0, 0, e, 2.0});
  summarize(r);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cell("a", "x").mean == doctest::Approx(7.0 / 3.0));
  CHECK(r.cell("a", "x").stddev == doctest::Approx(std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0)));
  CHECK(r.cell("a", "x").mean_runtime_ms == 2.0);
  CHECK(r.overall_mean("a") == doctest::Approx(7.0 / 3.0));
}

TEST_CASE("report serialisation") {
  BenchConfig c;
  c.repeats = 2;
  const auto r = ordering_benchmark(c, planted(25, 5, 9));
  const auto j = report_to_json(r);
  CHECK(j.at("kind") == "ordering");
  CHECK(j.at("cells").size() == 3);
  CHECK(j.at("records").size() == 6);
  CHECK(j.at("cells")[0].contains("mean_error"));
  CHECK(j.at("cells")[0].contains("std_error"));

  const auto csv = report_to_csv(r);
  std::istringstream in(csv);
  std::string line;
  int lines = 0;
  std::getline(in, line);
  CHECK(line.find("method") != std::string::npos);
  while (std::getline(in, line)) lines += !line.empty();
  CHECK(lines == 3);

  const auto svg = report_to_svg(r);
  CHECK(svg.rfind("<svg", 0) == 0);
  for (const auto& m : default_ordering_methods()) CHECK(svg.find(m) != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
