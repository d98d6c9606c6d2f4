#include "orchestra/orchestra.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "orchestra/bench.hpp"
#include "orchestra/bps.hpp"
#include "orchestra/completion.hpp"
#include "orchestra/errors.hpp"
#include "orchestra/extract.hpp"
#include "orchestra/io.hpp"
#include "orchestra/recolor.hpp"
#include "orchestra/server.hpp"
#include "orchestra/synth.hpp"

using namespace orchestra;

struct orch_dataset {
  SortedPaletteSet set;
};

struct orch_model {
  AnyModel model;
  std::unique_ptr<GplvmPredictor> predictor;
  PaletteSet training;

  explicit orch_model(AnyModel m) : model(std::move(m)) {
    if (const auto* g = std::get_if<GplvmModel>(&model)) {
      predictor = std::make_unique<GplvmPredictor>(*g);
      training = g->training_palettes();
    }
  }
};

struct orch_report {
  BenchReport report;
};

struct orch_server {
  Server server;
  explicit orch_server(ServerOptions o) : server(std::move(o)) {}
};

namespace {

thread_local std::string last_error;
thread_local std::vector<std::string> last_warnings;

orch_status fail(orch_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
orch_status guard(F&& f) {
  last_error.clear();
  try {
    f();
    return ORCH_OK;
  } catch (const IoError& e) {
    return fail(ORCH_ERR_IO, e.what());
  } catch (const FormatError& e) {
    return fail(ORCH_ERR_FORMAT, e.what());
  } catch (const json::exception& e) {
    return fail(ORCH_ERR_FORMAT, e.what());
  } catch (const NumericError& e) {
    return fail(ORCH_ERR_NUMERIC, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ORCH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ORCH_ERR_NOT_FOUND, e.what());
  } catch (const std::exception& e) {
    return fail(ORCH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ORCH_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Palette palette_from(const double* c, int k) {
  std::vector<LabColor> colors;
  for (int i = 0; i < k; ++i) {
    for (int t = 0; t < 3; ++t) {
      if (!(c[3 * i + t] >= 0.0 && c[3 * i + t] <= 1.0)) throw std::invalid_argument("color component outside [0,1]");
    }
    colors.push_back({c[3 * i], c[3 * i + 1], c[3 * i + 2]});
  }
  return Palette(std::move(colors));
}

void palette_to(const Palette& p, double* out) {
  for (int i = 0; i < p.k(); ++i) {
    out[3 * i] = p[i].l;
    out[3 * i + 1] = p[i].a;
    out[3 * i + 2] = p[i].b;
  }
}

int model_k(const AnyModel& m) {
  return std::visit([](const auto& x) { return x.k; }, m);
}

void write_text(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(std::string("cannot write ") + path);
  out << text;
}

}  // namespace

extern "C" {

const char* orch_version(void) { return "0.1.0"; }

const char* orch_last_error(void) { return last_error.c_str(); }

const char* orch_status_string(orch_status s) {
  switch (s) {
    case ORCH_OK: return "ok";
    case ORCH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ORCH_ERR_IO: return "i/o error";
    case ORCH_ERR_FORMAT: return "format error";
    case ORCH_ERR_NUMERIC: return "numerical failure";
    case ORCH_ERR_NOT_FOUND: return "not found";
    case ORCH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t orch_warning_count(void) { return last_warnings.size(); }

const char* orch_warning(size_t i) { return i < last_warnings.size() ? last_warnings[i].c_str() : nullptr; }

orch_status orch_dataset_create(int k, int n, const double* colors, orch_dataset** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    require(k >= 1 && k <= kMaxPaletteSize, "K must be in 1..16");
    require(n >= 0 && (n == 0 || colors != nullptr), "colors is null");
    std::vector<Palette> ps;
    for (int i = 0; i < n; ++i) ps.push_back(palette_from(colors + static_cast<std::size_t>(i) * k * 3, k));
    *out = new orch_dataset{as_sorted(PaletteSet(k, std::move(ps)))};
  });
}

orch_status orch_dataset_load(const char* path, orch_dataset** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new orch_dataset{load_sorted_dataset(path)};
  });
}

orch_status orch_dataset_save(const orch_dataset* d, const char* path) {
  return guard([&] {
    require(d && path, "null argument");
    save_dataset(path, d->set);
  });
}

void orch_dataset_free(orch_dataset* d) { delete d; }

int orch_dataset_k(const orch_dataset* d) { return d ? d->set.k() : 0; }

int orch_dataset_size(const orch_dataset* d) { return d ? d->set.size() : 0; }

orch_status orch_dataset_colors(const orch_dataset* d, double* out, size_t len) {
  return guard([&] {
    require(d && out, "null argument");
    const std::size_t need = static_cast<std::size_t>(d->set.size()) * d->set.k() * 3;
    require(len >= need, "output buffer too small");
    for (int n = 0; n < d->set.size(); ++n) palette_to(d->set.palettes[n], out + static_cast<std::size_t>(n) * d->set.k() * 3);
  });
}

orch_status orch_dataset_provenance(const orch_dataset* d, int* out, size_t len) {
  return guard([&] {
    require(d && out, "null argument");
    require(len >= static_cast<std::size_t>(d->set.size()) * d->set.k(), "output buffer too small");
    for (const auto& row : d->set.provenance) out = std::copy(row.begin(), row.end(), out);
  });
}

orch_status orch_build_dataset(const char* manifest_path, orch_dataset** out) {
  last_warnings.clear();
  return guard([&] {
    require(manifest_path && out, "null argument");
    *out = new orch_dataset{as_sorted(build_dataset(load_manifest(manifest_path), &last_warnings))};
  });
}

orch_synth_options orch_synth_defaults(void) {
  const PlantedOptions p;
  return {p.n_palettes, p.k, p.n_scenes, p.noise, p.drift, p.seed};
}

orch_status orch_synth_dataset(const orch_synth_options* opts, orch_dataset** out) {
  return guard([&] {
    require(opts && out, "null argument");
    PlantedOptions p;
    p.n_palettes = opts->n_palettes;
    p.k = opts->k;
    p.n_scenes = opts->n_scenes;
    p.noise = opts->noise;
    p.drift = opts->drift;
    p.seed = opts->seed;
    *out = new orch_dataset{as_sorted(planted_dataset(p).palettes)};
  });
}

orch_status orch_sort(const orch_dataset* in, const char* method, orch_dataset** out) {
  return guard([&] {
    require(in && out, "null argument");
    require(in->set.size() > 0, "cannot sort an empty dataset");
    *out = new orch_dataset{sort_palettes(in->set.palettes, parse_sort_method(method ? method : "bps"))};
  });
}

orch_status orch_ordering_objective(const orch_dataset* d, double* out) {
  return guard([&] {
    require(d && out, "null argument");
    *out = ordering_objective(d->set.palettes);
  });
}

orch_status orch_consecutive_distance(const orch_dataset* d, double* out) {
  return guard([&] {
    require(d && out, "null argument");
    *out = consecutive_distance(d->set.palettes);
  });
}

orch_train_options orch_train_defaults(const char* method) {
  if (method && std::strcmp(method, "gmm") == 0) {
    const GmmTrainOptions g;
    return {g.seed, g.max_iters, g.d, g.components};
  }
  const GplvmTrainOptions g;
  return {g.seed, g.iters, g.q, GmmTrainOptions{}.components};
}

orch_status orch_model_train(const orch_dataset* sorted, const char* method, const orch_train_options* opts,
                             orch_model** out) {
  return guard([&] {
    require(sorted && out, "null argument");
    const std::string m = method ? method : "gplvm";
    const orch_train_options o = opts ? *opts : orch_train_defaults(m.c_str());
    if (m == "gplvm") {
      *out = new orch_model(train_gplvm(sorted->set.palettes, {o.latent_dim, o.iters, o.seed}));
    } else if (m == "gmm") {
      GmmTrainOptions g;
      g.d = o.latent_dim;
      g.components = o.gmm_components;
      g.max_iters = o.iters;
      g.seed = o.seed;
      *out = new orch_model(train_pca_gmm(sorted->set.palettes, g));
    } else {
      throw std::invalid_argument("unknown model method: " + m);
    }
  });
}

orch_status orch_model_load(const char* path, orch_model** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new orch_model(load_model(path));
  });
}

orch_status orch_model_save(const orch_model* m, const char* path) {
  return guard([&] {
    require(m && path, "null argument");
    save_model(path, m->model);
  });
}

void orch_model_free(orch_model* m) { delete m; }

orch_status orch_model_info_get(const orch_model* m, orch_model_info* out) {
  return guard([&] {
    require(m && out, "null argument");
    if (const auto* g = std::get_if<GplvmModel>(&m->model)) {
      *out = {1, g->k, g->q, g->n(), g->degenerate ? 1 : 0, g->training_log.size(),
              g->training_log.empty() ? 0.0 : g->training_log.back()};
    } else {
      const auto& gm = std::get<GmmModel>(m->model);
      *out = {0, gm.k, gm.latent_dim(), gm.components(), 0, gm.em_trace.size(),
              gm.em_trace.empty() ? 0.0 : gm.em_trace.back()};
    }
  });
}

orch_status orch_model_trace(const orch_model* m, double* out, size_t len) {
  return guard([&] {
    require(m && out, "null argument");
    const auto& trace = std::visit(
        [](const auto& x) -> const std::vector<double>& {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, GplvmModel>) {
            return x.training_log;
          } else {
            return x.em_trace;
          }
        },
        m->model);
    require(len >= trace.size(), "output buffer too small");
    std::copy(trace.begin(), trace.end(), out);
  });
}

orch_status orch_model_backproject(const orch_model* m, const double* x, double* palette_out, double* variance_out) {
  return guard([&] {
    require(m && x && palette_out, "null argument");
    require(m->predictor != nullptr, "back-projection needs a gplvm model");
    const int q = m->predictor->model().q;
    const auto pred = m->predictor->predict(Eigen::Map<const Eigen::VectorXd>(x, q));
    palette_to(from_spf(pred.mean), palette_out);
    if (variance_out) *variance_out = pred.variance;
  });
}

orch_status orch_model_complete(const orch_model* m, const double* colors, const int* observed, int sim_iters,
                                int clamp, double* palette_out) {
  return guard([&] {
    require(m && colors && observed && palette_out, "null argument");
    const int k = model_k(m->model);
    PartialPalette p(k);
    for (int i = 0; i < k; ++i) {
      if (observed[i]) p.slots[i] = LabColor{colors[3 * i], colors[3 * i + 1], colors[3 * i + 2]};
    }
    p.validate();
    if (m->predictor) {
      palette_to(gplvm_complete(*m->predictor, p, sim_iters, clamp != 0).palette, palette_out);
    } else {
      palette_to(gmm_complete(std::get<GmmModel>(m->model), p), palette_out);
    }
  });
}

orch_status orch_model_suggest(const orch_model* m, const double* observed, int n_observed, int sim_iters, int clamp,
                               double* palette_out) {
  return guard([&] {
    require(m && observed && palette_out, "null argument");
    require(m->predictor != nullptr, "suggestions need a gplvm model");
    std::vector<LabColor> colors;
    for (int i = 0; i < n_observed; ++i) colors.push_back({observed[3 * i], observed[3 * i + 1], observed[3 * i + 2]});
    const auto partial = align_partial(colors, m->training);
    palette_to(gplvm_complete(*m->predictor, partial, sim_iters, clamp != 0).palette, palette_out);
  });
}

orch_recolor_options orch_recolor_defaults(void) {
  const EnrichedOptions e;
  return {"grid:100", nullptr, e.sim_iters, e.preserve_luminance ? 1 : 0, e.seed};
}

orch_status orch_recolor_png(const char* image_path, const orch_model* model, const orch_recolor_options* opts,
                             const char* out_path) {
  last_warnings.clear();
  return guard([&] {
    require(image_path && out_path, "null argument");
    const orch_recolor_options o = opts ? *opts : orch_recolor_defaults();
    const Image image = read_png(image_path);
    Image result;
    if (o.palette_path) {
      const PaletteSet pool = load_dataset(o.palette_path);
      const LabImage lab = to_lab(image);
      const Palette source = image_palette(lab, pool.k(), o.seed);
      RecolorSpec spec{source, match_palette(source, pool), o.preserve_luminance != 0, 1.0};
      result = to_rgb_preserving(image, lab, recolor_single(lab, spec));
    } else {
      require(model != nullptr, "recolor needs a model or a palette file");
      const auto* g = std::get_if<GplvmModel>(&model->model);
      require(g != nullptr, "enriched recolor needs a gplvm model");
      EnrichedOptions e;
      e.sim_iters = o.sim_iters;
      e.seed = o.seed;
      e.preserve_luminance = o.preserve_luminance != 0;
      const auto segments = parse_segments(o.segments ? o.segments : "grid:100", image.width, image.height);
      result = recolor_enriched(image, segments, *g, e, &last_warnings);
    }
    write_png(out_path, result);
  });
}

orch_status orch_bench_run(const char* kind, const char* config_path, orch_report** out) {
  last_warnings.clear();
  return guard([&] {
    require(kind && config_path && out, "null argument");
    const auto cfg = bench_config_from_json(read_json_file(config_path));
    const auto datasets = bench_datasets(cfg);
    const std::string k = kind;
    BenchReport r;
    if (k == "ordering") {
      r = ordering_benchmark(cfg, datasets);
    } else if (k == "completion") {
      r = completion_benchmark(cfg, datasets);
    } else {
      throw std::invalid_argument("unknown benchmark kind: " + k);
    }
    last_warnings = r.warnings;
    *out = new orch_report{std::move(r)};
  });
}

orch_status orch_report_write_json(const orch_report* r, const char* path) {
  return guard([&] {
    require(r && path, "null argument");
    write_json_file(path, report_to_json(r->report), 2);
  });
}

orch_status orch_report_write_csv(const orch_report* r, const char* path) {
  return guard([&] {
    require(r && path, "null argument");
    write_text(path, report_to_csv(r->report));
  });
}

orch_status orch_report_write_svg(const orch_report* r, const char* path) {
  return guard([&] {
    require(r && path, "null argument");
    write_text(path, report_to_svg(r->report));
  });
}

orch_status orch_report_cell_mean(const orch_report* r, const char* method, const char* condition, double* out) {
  return guard([&] {
    require(r && method && condition && out, "null argument");
    *out = r->report.cell(method, condition).mean;
  });
}

void orch_report_free(orch_report* r) { delete r; }

orch_status orch_server_create(const char* models_dir, const char* images_dir, orch_server** out) {
  last_warnings.clear();
  return guard([&] {
    require(out != nullptr, "null argument");
    ServerOptions o;
    o.models_dir = models_dir ? models_dir : "";
    o.images_dir = images_dir ? images_dir : "";
    auto s = std::make_unique<orch_server>(o);
    try {
      s->server.load_directories();
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    last_warnings = s->server.warnings();
    *out = s.release();
  });
}

orch_status orch_server_start(orch_server* s, const char* host, int port, int* bound_port) {
  return guard([&] {
    require(s != nullptr, "null argument");
    const int p = s->server.start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = p;
  });
}

orch_status orch_server_run(orch_server* s, const char* host, int port) {
  return guard([&] {
    require(s != nullptr, "null argument");
    s->server.listen(host ? host : "0.0.0.0", port);
  });
}

void orch_server_stop(orch_server* s) {
  if (s) s->server.stop();
}

void orch_server_free(orch_server* s) { delete s; }

}  // extern "C"
