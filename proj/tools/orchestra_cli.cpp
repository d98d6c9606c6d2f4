#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orchestra/orchestra.h"

namespace {

orch_server* running_server = nullptr;

void on_signal(int) {
  if (running_server) orch_server_stop(running_server);
}

int report(orch_status s) {
  if (s == ORCH_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", orch_status_string(s), orch_last_error());
  return 1;
}

void print_warnings() {
  for (std::size_t i = 0; i < orch_warning_count(); ++i) std::fprintf(stderr, "warning: %s\n", orch_warning(i));
}

std::string with_extension(const std::string& path, const std::string& ext) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ext;
  return path.substr(0, dot) + ext;
}

int run_extract(const std::string& manifest, const std::string& out) {
  orch_dataset* d = nullptr;
  const auto s = orch_build_dataset(manifest.c_str(), &d);
  print_warnings();
  if (s != ORCH_OK) return report(s);
  const auto w = orch_dataset_save(d, out.c_str());
  std::printf("%d palettes of %d colors -> %s\n", orch_dataset_size(d), orch_dataset_k(d), out.c_str());
  orch_dataset_free(d);
  return report(w);
}

int run_sort(const std::string& in, const std::string& out, const std::string& method) {
  orch_dataset* d = nullptr;
  if (const auto s = orch_dataset_load(in.c_str(), &d); s != ORCH_OK) return report(s);
  orch_dataset* sorted = nullptr;
  auto s = orch_sort(d, method.c_str(), &sorted);
  orch_dataset_free(d);
  if (s != ORCH_OK) return report(s);
  double objective = 0.0;
  s = orch_ordering_objective(sorted, &objective);
  if (s == ORCH_OK) s = orch_dataset_save(sorted, out.c_str());
  if (s == ORCH_OK) std::printf("%s: %d palettes, objective %.6f -> %s\n", method.c_str(), orch_dataset_size(sorted), objective, out.c_str());
  orch_dataset_free(sorted);
  return report(s);
}

int run_train(const std::string& in, const std::string& method, const std::string& out, orch_train_options opts) {
  orch_dataset* d = nullptr;
  if (const auto s = orch_dataset_load(in.c_str(), &d); s != ORCH_OK) return report(s);
  orch_model* m = nullptr;
  auto s = orch_model_train(d, method.c_str(), &opts, &m);
  orch_dataset_free(d);
  if (s != ORCH_OK) return report(s);
  orch_model_info info{};
  s = orch_model_info_get(m, &info);
  if (s == ORCH_OK) s = orch_model_save(m, out.c_str());
  if (s == ORCH_OK) {
    std::printf("%s: K=%d q=%d, %zu trace entries, final %s %.6f%s -> %s\n", method.c_str(), info.k, info.q,
                info.trace_length, info.is_gplvm ? "NLL" : "log-likelihood", info.final_objective,
                info.degenerate ? " (degenerate data)" : "", out.c_str());
  }
  orch_model_free(m);
  return report(s);
}

int run_recolor(const std::string& image, const std::string& model_path, const std::string& segments,
                const std::string& palette, const std::string& out, orch_recolor_options opts) {
  orch_model* m = nullptr;
  if (!model_path.empty()) {
    if (const auto s = orch_model_load(model_path.c_str(), &m); s != ORCH_OK) return report(s);
  }
  opts.segments = segments.c_str();
  opts.palette_path = palette.empty() ? nullptr : palette.c_str();
  const auto s = orch_recolor_png(image.c_str(), m, &opts, out.c_str());
  print_warnings();
  orch_model_free(m);
  if (s == ORCH_OK) std::printf("-> %s\n", out.c_str());
  return report(s);
}

int run_bench(const std::string& kind, const std::string& config, const std::string& out) {
  orch_report* r = nullptr;
  const auto s = orch_bench_run(kind.c_str(), config.c_str(), &r);
  print_warnings();
  if (s != ORCH_OK) return report(s);
  const auto csv = with_extension(out, ".csv");
  const auto svg = with_extension(out, ".svg");
  auto w = orch_report_write_json(r, out.c_str());
  if (w == ORCH_OK) w = orch_report_write_csv(r, csv.c_str());
  if (w == ORCH_OK) w = orch_report_write_svg(r, svg.c_str());
  orch_report_free(r);
  if (w == ORCH_OK) std::printf("%s benchmark -> %s, %s, %s\n", kind.c_str(), out.c_str(), csv.c_str(), svg.c_str());
  return report(w);
}

int run_serve(const std::string& models, const std::string& images, const std::string& host, int port) {
  if (const char* env = std::getenv("PALETTE_ORCHESTRA_PORT"); env && *env) {
    char* end = nullptr;
    const long p = std::strtol(env, &end, 10);
    if (*end != '\0' || p < 0 || p > 65535) {
      std::fprintf(stderr, "error: PALETTE_ORCHESTRA_PORT is not a valid port: %s\n", env);
      return 1;
    }
    port = static_cast<int>(p);
  }
  orch_server* srv = nullptr;
  const auto s = orch_server_create(models.c_str(), images.empty() ? nullptr : images.c_str(), &srv);
  print_warnings();
  if (s != ORCH_OK) return report(s);
  running_server = srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  const auto r = orch_server_run(srv, host.c_str(), port);
  running_server = nullptr;
  orch_server_free(srv);
  return report(r);
}

int run_synth(const std::string& out, orch_synth_options opts) {
  orch_dataset* d = nullptr;
  if (const auto s = orch_synth_dataset(&opts, &d); s != ORCH_OK) return report(s);
  const auto s = orch_dataset_save(d, out.c_str());
  orch_dataset_free(d);
  if (s == ORCH_OK) std::printf("%d palettes of %d colors -> %s\n", opts.n_palettes, opts.k, out.c_str());
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Palette datasets, sorting, palette models and recoloring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", orch_version());

  std::string manifest, out;
  auto* extract = app.add_subcommand("extract", "Build a palette dataset from a manifest of images");
  extract->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out, "Dataset JSON")->required();

  std::string in, method = "bps";
  std::uint64_t seed = 0;
  auto* bps = app.add_subcommand("bps", "Palette ordering");
  bps->require_subcommand(1);
  auto* sort = bps->add_subcommand("sort", "Permute colors into a shared slot order");
  sort->add_option("--in", in, "Dataset JSON")->required()->check(CLI::ExistingFile);
  sort->add_option("--out", out, "Sorted dataset JSON")->required();
  sort->add_option("--method", method, "bps, brightness or hue")->check(CLI::IsMember({"bps", "brightness", "hue"}));
  // Sorting is deterministic; the seed is accepted for interface symmetry.
  sort->add_option("--seed", seed, "Random seed");

  std::string model_method = "gplvm";
  int iters = -1, latent = -1, components = -1;
  auto* model = app.add_subcommand("model", "Palette models");
  model->require_subcommand(1);
  auto* train = model->add_subcommand("train", "Train a GPLVM or PCA-GMM on a sorted dataset");
  train->add_option("--in", in, "Sorted dataset JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--method", model_method, "gplvm or gmm")->check(CLI::IsMember({"gplvm", "gmm"}));
  train->add_option("--out", out, "Model JSON")->required();
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--iters", iters, "SCG steps (gplvm) or EM iterations (gmm)");
  train->add_option("--latent-dim", latent, "q for gplvm, PCA dimension for gmm");
  train->add_option("--components", components, "Mixture components (gmm)");

  std::string image, model_path, segments = "grid:100", palette;
  auto recolor_opts = orch_recolor_defaults();
  bool keep_luminance = true;
  auto* recolor = app.add_subcommand("recolor", "Recolor a PNG with model-predicted or pool palettes");
  recolor->add_option("--image", image, "Input PNG")->required()->check(CLI::ExistingFile);
  recolor->add_option("--model", model_path, "GPLVM model JSON")->check(CLI::ExistingFile);
  recolor->add_option("--segments", segments, "Segmentation, grid:<cell>");
  recolor->add_option("--palette", palette, "Palette pool (dataset JSON); global recolor to the best match")
      ->check(CLI::ExistingFile);
  recolor->add_option("--out", out, "Output PNG")->required();
  recolor->add_option("--seed", seed, "Random seed");
  recolor->add_option("--sim-iters", recolor_opts.sim_iters, "Completion steps per segment");
  recolor->add_option("--preserve-luminance", keep_luminance, "Keep per-pixel L");

  std::string kind, config;
  auto* bench = app.add_subcommand("bench", "Ordering and completion benchmarks");
  bench->add_option("kind", kind, "ordering or completion")->required()->check(CLI::IsMember({"ordering", "completion"}));
  bench->add_option("--config", config, "Benchmark config JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out, "Report JSON; CSV and SVG are written alongside")->required();

  std::string models_dir, images_dir, host = "0.0.0.0";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP server over trained models");
  serve->add_option("--models", models_dir, "Directory of model JSON files")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--images", images_dir, "Directory of PNG images")->check(CLI::ExistingDirectory);
  serve->add_option("--port", port, "Port (PALETTE_ORCHESTRA_PORT overrides)");
  serve->add_option("--host", host, "Bind address");

  auto synth_opts = orch_synth_defaults();
  auto* synth = app.add_subcommand("synth", "Generate a planted-correspondence synthetic dataset");
  synth->add_option("--out", out, "Dataset JSON")->required();
  synth->add_option("-n,--palettes", synth_opts.n_palettes, "Number of palettes");
  synth->add_option("-k,--k", synth_opts.k, "Colors per palette");
  synth->add_option("--scenes", synth_opts.n_scenes, "Number of scenes");
  synth->add_option("--noise", synth_opts.noise, "Noise standard deviation");
  synth->add_option("--drift", synth_opts.drift, "Drift amplitude");
  synth->add_option("--seed", seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  if (*extract) return run_extract(manifest, out);
  if (*sort) return run_sort(in, out, method);
  if (*train) {
    auto opts = orch_train_defaults(model_method.c_str());
    opts.seed = seed;
    if (iters >= 0) opts.iters = iters;
    if (latent > 0) opts.latent_dim = latent;
    if (components > 0) opts.gmm_components = components;
    return run_train(in, model_method, out, opts);
  }
  if (*recolor) {
    if (model_path.empty() && palette.empty()) {
      std::fprintf(stderr, "error: recolor needs --model or --palette\n");
      return 1;
    }
    recolor_opts.seed = seed;
    recolor_opts.preserve_luminance = keep_luminance ? 1 : 0;
    return run_recolor(image, model_path, segments, palette, out, recolor_opts);
  }
  if (*bench) return run_bench(kind, config, out);
  if (*serve) return run_serve(models_dir, images_dir, host, port);
  if (*synth) {
    synth_opts.seed = seed;
    return run_synth(out, synth_opts);
  }
  return 0;
}
