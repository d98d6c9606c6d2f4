#include "orchestra/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "orchestra/bps.hpp"
#include "orchestra/completion.hpp"
#include "orchestra/gmm.hpp"
#include "orchestra/gplvm.hpp"
#include "orchestra/random.hpp"

namespace orchestra {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
  return idx;
}

struct MethodSpec {
  std::string learner;         // gplvm | gmm | retrieval | mean
  std::string representation;  // spf | brightness | none
};

MethodSpec parse_completion_method(const std::string& name) {
  if (name == "mean") return {"mean", "none"};
  const auto plus = name.find('+');
  if (plus == std::string::npos) throw std::invalid_argument("unknown completion method: " + name);
  MethodSpec m{name.substr(0, plus), name.substr(plus + 1)};
  const bool learner_ok = m.learner == "gplvm" || m.learner == "gmm" || m.learner == "retrieval";
  const bool repr_ok = m.representation == "spf" || m.representation == "brightness" || m.representation == "none";
  if (!learner_ok || !repr_ok) throw std::invalid_argument("unknown completion method: " + name);
  return m;
}

PaletteSet represent(const PaletteSet& train, const std::string& representation) {
  if (representation == "spf") return bps_sort(train).palettes;
  if (representation == "brightness") return brightness_sort(train).palettes;
  return train;
}

PlantedOptions planted_from_json(const json& j) {
  PlantedOptions p;
  p.n_palettes = j.value("n", j.value("n_palettes", p.n_palettes));
  p.k = j.value("k", p.k);
  p.n_scenes = j.value("scenes", j.value("n_scenes", p.n_scenes));
  p.noise = j.value("noise", p.noise);
  p.drift = j.value("drift", p.drift);
  p.shuffle = j.value("shuffle", p.shuffle);
  p.seed = j.value("seed", p.seed);
  return p;
}

}  // namespace

void BenchConfig::validate() const {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw std::invalid_argument("train_ratio must be in (0,1)");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (subset_size < 2) throw std::invalid_argument("subset_size must be >= 2");
}

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig c;
  c.datasets = j.value("datasets", c.datasets);
  if (j.contains("synthetic")) {
    for (const auto& s : j.at("synthetic")) {
      const auto base = planted_from_json(s);
      const int replicates = s.value("replicates", 1);
      if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
      for (int r = 0; r < replicates; ++r) {
        auto p = base;
        if (r > 0) p.seed = mix_seed(base.seed, static_cast<std::uint64_t>(r));
        c.synthetic.push_back(p);
      }
    }
  }
  c.palette_sizes = j.value("palette_sizes", c.palette_sizes);
  c.train_ratio = j.value("train_ratio", c.train_ratio);
  c.repeats = j.value("repeats", c.repeats);
  c.seed = j.value("seed", c.seed);
  c.methods = j.value("methods", c.methods);
  c.subset_size = j.value("subset_size", c.subset_size);
  c.observed_counts = j.value("observed_counts", c.observed_counts);
  c.gplvm_iters = j.value("gplvm_iters", c.gplvm_iters);
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.sim_iters = j.value("sim_iters", c.sim_iters);
  c.gmm_dim = j.value("gmm_dim", c.gmm_dim);
  c.gmm_components = j.value("gmm_components", c.gmm_components);
  c.max_test_items = j.value("max_test_items", c.max_test_items);
  c.validate();
  return c;
}

std::vector<std::string> default_ordering_methods() { return {"bps", "brightness", "hue"}; }

std::vector<std::string> default_completion_methods() {
  return {"gplvm+spf", "gplvm+brightness", "gplvm+none", "gmm+spf",
          "gmm+none",  "retrieval+spf",    "retrieval+none", "mean"};
}

const BenchCell& BenchReport::cell(const std::string& method, const std::string& condition) const {
  for (const auto& c : cells) {
    if (c.method == method && c.condition == condition) return c;
  }
  throw std::out_of_range("no bench cell for " + method + " / " + condition);
}

double BenchReport::overall_mean(const std::string& method) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.method != method) continue;
    sum += r.error;
    ++n;
  }
  if (n == 0) throw std::out_of_range("no records for " + method);
  return sum / n;
}

std::vector<PaletteSet> bench_datasets(const BenchConfig& cfg) {
  std::vector<PaletteSet> out;
  for (const auto& path : cfg.datasets) out.push_back(load_dataset(path));
  for (const auto& s : cfg.synthetic) out.push_back(planted_dataset(s).palettes);
  return out;
}

void summarize(BenchReport& report) {
  report.cells.clear();
  for (const auto& m : report.methods) {
    for (const auto& c : report.conditions) {
      BenchCell cell{m, c, 0.0, 0.0, 0, 0.0};
      double sum = 0.0, sum_sq = 0.0, rt = 0.0;
      for (const auto& r : report.records) {
        if (r.method != m || r.condition != c) continue;
        ++cell.count;
        sum += r.error;
        sum_sq += r.error * r.error;
        rt += r.runtime_ms;
      }
      if (cell.count > 0) {
        cell.mean = sum / cell.count;
        cell.mean_runtime_ms = rt / cell.count;
        if (cell.count > 1) {
          cell.stddev = std::sqrt(std::max(0.0, (sum_sq - cell.count * cell.mean * cell.mean) / (cell.count - 1)));
        }
      }
      report.cells.push_back(cell);
    }
  }
}

BenchReport ordering_benchmark(const BenchConfig& cfg, const std::vector<PaletteSet>& datasets) {
  cfg.validate();
  BenchReport report;
  report.kind = "ordering";
  report.methods = cfg.methods.empty() ? default_ordering_methods() : cfg.methods;
  std::vector<SortMethod> methods;
  for (const auto& m : report.methods) methods.push_back(parse_sort_method(m));

  std::vector<int> sizes = cfg.palette_sizes;
  if (sizes.empty()) {
    for (const auto& d : datasets) sizes.push_back(d.k());
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  }

  for (int k : sizes) {
    const std::string condition = "K=" + std::to_string(k);
    report.conditions.push_back(condition);
    bool any = false;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const auto& data = datasets[di];
      if (data.k() != k) continue;
      if (data.size() < cfg.subset_size) {
        report.warnings.push_back("dataset " + std::to_string(di) + " has fewer than " +
                                  std::to_string(cfg.subset_size) + " palettes; skipped for " + condition);
        continue;
      }
      any = true;
      for (int r = 0; r < cfg.repeats; ++r) {
        const auto seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(k)), di * 1000 + static_cast<std::uint64_t>(r));
        auto idx = shuffled_indices(data.size(), seed);
        idx.resize(static_cast<std::size_t>(cfg.subset_size));
        std::sort(idx.begin(), idx.end());
        const PaletteSet ordered = kpca_order(data.subset(idx));
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          const auto start = Clock::now();
          const auto sorted = sort_palettes(ordered, methods[mi]);
          const double err = consecutive_distance(sorted.palettes);
          report.records.push_back(
              {report.methods[mi], condition, static_cast<int>(di), r, 0, err, elapsed_ms(start)});
        }
      }
    }
    if (!any) report.warnings.push_back("no usable dataset for " + condition);
  }
  summarize(report);
  return report;
}

BenchReport completion_benchmark(const BenchConfig& cfg, const std::vector<PaletteSet>& datasets) {
  cfg.validate();
  BenchReport report;
  report.kind = "completion";
  report.methods = cfg.methods.empty() ? default_completion_methods() : cfg.methods;
  std::vector<MethodSpec> specs;
  for (const auto& m : report.methods) specs.push_back(parse_completion_method(m));
  for (int m : cfg.observed_counts) report.conditions.push_back("observed=" + std::to_string(m));

  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const auto& data = datasets[di];
    for (int split = 0; split < cfg.repeats; ++split) {
      const auto split_seed = mix_seed(mix_seed(cfg.seed, di), static_cast<std::uint64_t>(split));
      const auto idx = shuffled_indices(data.size(), split_seed);
      const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_ratio * data.size()));
      if (n_train < 2 || n_train >= idx.size()) {
        report.warnings.push_back("dataset " + std::to_string(di) + " too small to split");
        break;
      }
      std::vector<int> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
      std::vector<int> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
      std::sort(train_idx.begin(), train_idx.end());
      if (cfg.max_test_items > 0 && static_cast<int>(test_idx.size()) > cfg.max_test_items) test_idx.resize(cfg.max_test_items);
      const PaletteSet train = data.subset(train_idx);

      std::map<std::string, PaletteSet> reps;
      std::map<std::string, std::unique_ptr<GplvmPredictor>> gplvms;
      std::map<std::string, std::unique_ptr<GmmModel>> gmms;
      std::vector<char> usable(specs.size(), 1);
      for (std::size_t mi = 0; mi < specs.size(); ++mi) {
        const auto& s = specs[mi];
        if (s.learner == "mean") continue;
        if (!reps.contains(s.representation)) reps.emplace(s.representation, represent(train, s.representation));
        const auto& rep = reps.at(s.representation);
        try {
          if (s.learner == "gplvm" && !gplvms.contains(s.representation)) {
            GplvmTrainOptions opts{cfg.latent_dim, cfg.gplvm_iters, split_seed};
            gplvms.emplace(s.representation, std::make_unique<GplvmPredictor>(train_gplvm(rep, opts)));
          } else if (s.learner == "gmm" && !gmms.contains(s.representation)) {
            GmmTrainOptions opts;
            opts.d = cfg.gmm_dim;
            opts.components = cfg.gmm_components;
            opts.seed = split_seed;
            gmms.emplace(s.representation, std::make_unique<GmmModel>(train_pca_gmm(rep, opts)));
          }
        } catch (const std::exception& e) {
          usable[mi] = 0;
          report.warnings.push_back(report.methods[mi] + " training failed on split " + std::to_string(split) + ": " +
                                    e.what());
        }
      }

      for (std::size_t ti = 0; ti < test_idx.size(); ++ti) {
        const Palette& truth = data[test_idx[ti]];
        for (int observed_n : cfg.observed_counts) {
          if (observed_n < 1 || observed_n > truth.k()) continue;
          const std::string condition = "observed=" + std::to_string(observed_n);
          Rng rng(mix_seed(split_seed, ti * 64 + static_cast<std::uint64_t>(observed_n)));
          std::vector<int> pick(truth.k());
          std::iota(pick.begin(), pick.end(), 0);
          for (int i = truth.k() - 1; i > 0; --i) std::swap(pick[i], pick[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
          std::vector<LabColor> observed;
          for (int i = 0; i < observed_n; ++i) observed.push_back(truth[pick[i]]);

          for (std::size_t mi = 0; mi < specs.size(); ++mi) {
            if (!usable[mi]) continue;
            const auto& s = specs[mi];
            const auto start = Clock::now();
            Palette predicted;
            if (s.learner == "mean") {
              PartialPalette partial(truth.k());
              for (int i = 0; i < observed_n; ++i) partial.slots[i] = observed[i];
              predicted = mean_predict(partial);
            } else {
              const auto& rep = reps.at(s.representation);
              const auto partial = align_partial(observed, rep);
              if (s.learner == "gplvm") {
                predicted = gplvm_complete(*gplvms.at(s.representation), partial, cfg.sim_iters, true).palette;
              } else if (s.learner == "gmm") {
                predicted = gmm_complete(*gmms.at(s.representation), partial);
              } else {
                predicted = clamp_observed(retrieval_predict(partial, rep), partial);
              }
            }
            const double ms = elapsed_ms(start);
            report.records.push_back({report.methods[mi], condition, static_cast<int>(di), split, static_cast<int>(ti),
                                      mhd(predicted.colors(), truth.colors()), ms});
          }
        }
      }
    }
  }
  summarize(report);
  return report;
}

json report_to_json(const BenchReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"method", c.method},
                     {"condition", c.condition},
                     {"mean_error", c.mean},
                     {"std_error", c.stddev},
                     {"count", c.count},
                     {"mean_runtime_ms", c.mean_runtime_ms}});
  }
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"method", r.method},
                       {"condition", r.condition},
                       {"dataset", r.dataset},
                       {"split", r.split},
                       {"item", r.item},
                       {"error", r.error},
                       {"runtime_ms", r.runtime_ms}});
  }
  return {{"kind", report.kind},     {"methods", report.methods}, {"conditions", report.conditions},
          {"cells", cells},          {"records", records},        {"warnings", report.warnings}};
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "method,condition,mean_error,std_error,count,mean_runtime_ms\n";
  for (const auto& c : report.cells) {
    out << c.method << ',' << c.condition << ',' << c.mean << ',' << c.stddev << ',' << c.count << ','
        << c.mean_runtime_ms << '\n';
  }
  return out.str();
}

std::string report_to_svg(const BenchReport& report) {
  constexpr double width = 640, height = 400, left = 70, right = 160, top = 30, bottom = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double ymax = 0.0;
  for (const auto& c : report.cells) ymax = std::max(ymax, c.mean);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  const auto nc = report.conditions.size();
  auto px = [&](std::size_t i) {
    return nc <= 1 ? left + (width - left - right) / 2 : left + i * (width - left - right) / (nc - 1);
  };
  auto py = [&](double v) { return top + (1.0 - v / ymax) * (height - top - bottom); };

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << report.kind << " benchmark: mean error</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
    << height - bottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ymax * t / 4;
    s << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  for (std::size_t i = 0; i < nc; ++i) {
    s << "<text x=\"" << px(i) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">"
      << report.conditions[i] << "</text>\n";
  }
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const char* color = palette[m % std::size(palette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < nc; ++i) {
      const auto& c = report.cell(report.methods[m], report.conditions[i]);
      if (c.count > 0) s << px(i) << ',' << py(c.mean) << ' ';
    }
    s << "\"/>\n";
    const double ly = top + 16.0 * m;
    s << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 32 << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << width - right + 38 << "\" y=\"" << ly + 4 << "\">" << report.methods[m] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace orchestra
