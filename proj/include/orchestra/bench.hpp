#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orchestra/color.hpp"
#include "orchestra/io.hpp"
#include "orchestra/synth.hpp"

namespace orchestra {

struct BenchConfig {
  std::vector<std::string> datasets;
  /// Generated in-process, in addition to `datasets`. A JSON entry with "replicates": R expands
  /// into R datasets with derived seeds.
  std::vector<PlantedOptions> synthetic;
  std::vector<int> palette_sizes;
  double train_ratio = 0.6;
  int repeats = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;

  // ordering
  int subset_size = 20;

  // completion
  std::vector<int> observed_counts{4, 3, 2, 1};
  int gplvm_iters = 200;
  int latent_dim = 4;
  int sim_iters = 50;
  int gmm_dim = 8;
  int gmm_components = 10;
  /// Test palettes per split; <= 0 uses all.
  int max_test_items = 0;

  void validate() const;
};

BenchConfig bench_config_from_json(const json& j);

std::vector<std::string> default_ordering_methods();
std::vector<std::string> default_completion_methods();

/// One prediction or one ordering run.
struct BenchRecord {
  std::string method;
  std::string condition;
  int dataset = 0;
  int split = 0;
  int item = 0;
  double error = 0.0;
  double runtime_ms = 0.0;
};

struct BenchCell {
  std::string method;
  std::string condition;
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
  double mean_runtime_ms = 0.0;
};

struct BenchReport {
  std::string kind;
  std::vector<std::string> methods;
  std::vector<std::string> conditions;
  std::vector<BenchCell> cells;
  std::vector<BenchRecord> records;
  std::vector<std::string> warnings;

  /// Cell lookup; throws std::out_of_range when absent.
  const BenchCell& cell(const std::string& method, const std::string& condition) const;
  /// Mean over all records of `method` (all conditions pooled).
  double overall_mean(const std::string& method) const;
};

/// Loads file datasets and generates the synthetic ones, in config order.
std::vector<PaletteSet> bench_datasets(const BenchConfig& cfg);

/// For each K and method in {bps, brightness, hue}: random subset of subset_size palettes,
/// KPCA pre-order, sort, consecutive distance; repeated `repeats` times per dataset.
BenchReport ordering_benchmark(const BenchConfig& cfg, const std::vector<PaletteSet>& datasets);

/// Palette completion from 4..1 observed colors over the method matrix, `repeats` random
/// train/test splits; error is MHD(prediction, ground truth). Observed slots are kept in every
/// method's prediction.
BenchReport completion_benchmark(const BenchConfig& cfg, const std::vector<PaletteSet>& datasets);

/// Cells are recomputed from records (sample standard deviation).
void summarize(BenchReport& report);

json report_to_json(const BenchReport& report);
std::string report_to_csv(const BenchReport& report);
/// Line chart of mean error per method across conditions.
std::string report_to_svg(const BenchReport& report);

}  // namespace orchestra
