#include "orchestra/server.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "orchestra/completion.hpp"
#include "orchestra/io.hpp"
#include "orchestra/recolor.hpp"

namespace orchestra {

namespace fs = std::filesystem;

namespace {

struct HttpError : std::runtime_error {
  int code;
  HttpError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void send_error(httplib::Response& res, int code, const std::string& message) {
  res.status = code;
  res.set_content(json{{"error", message}, {"code", code}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& j) { res.set_content(j.dump(), "application/json"); }

std::string content_hash(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

std::string hex_color(const LabColor& c) {
  const Rgb8 rgb = lab_to_srgb(c);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb.r, rgb.g, rgb.b);
  return buf;
}

json palette_json(const Palette& p) {
  json colors = json::array(), srgb = json::array();
  for (const auto& c : p.colors()) {
    colors.push_back({c.l, c.a, c.b});
    srgb.push_back(hex_color(c));
  }
  return {{"k", p.k()}, {"colors", colors}, {"srgb", srgb}};
}

double parse_number(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw HttpError(400, std::string("bad ") + what);
  }
  if (used != text.size()) throw HttpError(400, std::string("bad ") + what);
  if (!std::isfinite(v)) throw HttpError(400, std::string(what) + " must be finite");
  return v;
}

int parse_int(const std::string& text, const char* what) {
  const double v = parse_number(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw HttpError(400, std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

std::pair<int, int> parse_dims(const std::string& text, int q) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw HttpError(400, "dims must be i,j");
  const int i = parse_int(text.substr(0, comma), "dims");
  const int j = parse_int(text.substr(comma + 1), "dims");
  if (i < 0 || j < 0 || i >= q || j >= q || i == j) throw HttpError(400, "dims out of range");
  return {i, j};
}

LabColor parse_color(const json& c) {
  if (!c.is_array() || c.size() != 3) throw HttpError(400, "colors must be [l,a,b] triples");
  LabColor out;
  try {
    out = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
  } catch (const json::exception&) {
    throw HttpError(400, "colors must be numeric");
  }
  for (double v : {out.l, out.a, out.b}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw HttpError(400, "colors must lie in [0,1]");
  }
  return out;
}

struct LoadedModel {
  std::unique_ptr<GplvmPredictor> predictor;
  PaletteSet training;
  std::pair<int, int> default_dims;
};

struct StoredImage {
  std::string hash;
  Image image;
};

// Per (image, model, resolution, segmentation): everything the preview needs except the target.
struct CacheEntry {
  Image working;
  LabImage lab;
  Palette source;
  std::optional<SegmentMap> segments;
  std::vector<SegmentPalette> segment_palettes;
};

}  // namespace

struct Server::Impl {
  ServerOptions opts;
  std::map<std::string, LoadedModel> models;
  std::map<std::string, StoredImage> images;
  std::vector<std::string> warnings;

  std::mutex images_mu;
  std::mutex cache_mu;
  std::map<std::string, std::shared_ptr<const CacheEntry>> cache;
  std::atomic<std::size_t> hits{0}, misses{0};

  httplib::Server http;
  std::thread worker;

  const LoadedModel& model(const std::string& name) const {
    const auto it = models.find(name);
    if (it == models.end()) throw HttpError(404, "unknown model: " + name);
    return it->second;
  }

  StoredImage image(const std::string& id) {
    std::lock_guard lock(images_mu);
    const auto it = images.find(id);
    if (it == images.end()) throw HttpError(404, "unknown image: " + id);
    return it->second;
  }

  std::string store(const std::vector<std::uint8_t>& png) {
    if (!is_png(png)) throw HttpError(415, "image must be a PNG");
    Image img;
    try {
      img = decode_png(png);
    } catch (const std::exception& e) {
      throw HttpError(415, std::string("unreadable PNG: ") + e.what());
    }
    const std::string id = content_hash(png);
    std::lock_guard lock(images_mu);
    images.insert_or_assign(id, StoredImage{id, std::move(img)});
    return id;
  }

  std::pair<int, int> dims_of(const httplib::Request& req, const LoadedModel& m) const {
    if (!req.has_param("dims")) return m.default_dims;
    return parse_dims(req.get_param_value("dims"), m.predictor->model().q);
  }

  Eigen::VectorXd latent_point(const LoadedModel& m, std::pair<int, int> dims, double x, double y) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m.predictor->model().q);
    z(dims.first) = x;
    z(dims.second) = y;
    return z;
  }

  std::shared_ptr<const CacheEntry> entry(const StoredImage& img, const std::string& model_name, const LoadedModel& m,
                                          bool full, const std::optional<std::string>& segments) {
    const std::string key =
        img.hash + '\n' + model_name + '\n' + (full ? "full" : "preview") + '\n' + segments.value_or("");
    {
      std::lock_guard lock(cache_mu);
      const auto it = cache.find(key);
      if (it != cache.end()) {
        ++hits;
        return it->second;
      }
    }
    ++misses;
    auto e = std::make_shared<CacheEntry>();
    e->working = full ? img.image : downscale_to_fit(img.image, opts.preview_max_dim);
    e->lab = to_lab(e->working);
    const int k = m.predictor->model().k;
    const auto extracted = image_palette(e->lab, k, opts.seed);
    const auto aligned = align_partial(extracted.colors(), m.training);
    std::vector<LabColor> ordered;
    for (const auto& s : aligned.slots) ordered.push_back(*s);
    e->source = Palette(std::move(ordered));
    if (segments) {
      e->segments = parse_segments(*segments, e->working.width, e->working.height);
      EnrichedOptions eo;
      eo.sim_iters = opts.sim_iters;
      eo.seed = opts.seed;
      e->segment_palettes = segment_palettes(e->lab, *e->segments, *m.predictor, m.training, eo);
    }
    std::lock_guard lock(cache_mu);
    cache.insert_or_assign(key, e);
    return e;
  }

  void get_models(const httplib::Request&, httplib::Response& res) const {
    json out = json::array();
    for (const auto& [name, m] : models) {
      out.push_back({{"name", name}, {"k", m.predictor->model().k}, {"q", m.predictor->model().q}});
    }
    send_json(res, out);
  }

  void get_density(const httplib::Request& req, httplib::Response& res) const {
    const auto& m = model(req.path_params.at("name"));
    const auto dims = dims_of(req, m);
    const int resolution = req.has_param("res") ? parse_int(req.get_param_value("res"), "res") : 64;
    if (resolution < 2 || resolution > 512) throw HttpError(400, "res must be in 2..512");
    const auto grid = gplvm_density(*m.predictor, dims, resolution);
    json points = json::array();
    const auto& X = m.predictor->model().X;
    for (int n = 0; n < X.rows(); ++n) points.push_back({X(n, dims.first), X(n, dims.second)});
    send_json(res, {{"dims", {grid.dim_x, grid.dim_y}},
                    {"resolution", grid.resolution},
                    {"extents",
                     {{"x_min", grid.extents.x_min},
                      {"x_max", grid.extents.x_max},
                      {"y_min", grid.extents.y_min},
                      {"y_max", grid.extents.y_max}}},
                    {"values", grid.values},
                    {"training_points", points}});
  }

  void get_palette(const httplib::Request& req, httplib::Response& res) const {
    const auto& m = model(req.path_params.at("name"));
    if (!req.has_param("x") || !req.has_param("y")) throw HttpError(400, "x and y are required");
    const double x = parse_number(req.get_param_value("x"), "x");
    const double y = parse_number(req.get_param_value("y"), "y");
    const auto dims = dims_of(req, m);
    const auto pred = m.predictor->predict(latent_point(m, dims, x, y));
    json out = palette_json(from_spf(pred.mean));
    out["dims"] = {dims.first, dims.second};
    out["x"] = x;
    out["y"] = y;
    out["variance"] = pred.variance;
    send_json(res, out);
  }

  void post_images(const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) throw HttpError(400, "multipart upload needs an 'image' part");
      body = req.get_file_value("image").content;
    }
    const std::string id = store({body.begin(), body.end()});
    const auto img = image(id);
    send_json(res, {{"id", id}, {"width", img.image.width}, {"height", img.image.height}});
  }

  void post_recolor(const httplib::Request& req, httplib::Response& res) {
    json params;
    std::string image_id;
    const bool json_body = req.get_header_value("Content-Type").starts_with("application/json");
    if (json_body) {
      try {
        params = json::parse(req.body);
      } catch (const json::exception&) {
        throw HttpError(400, "malformed JSON body");
      }
      if (!params.is_object()) throw HttpError(400, "body must be a JSON object");
      if (!params.contains("image") || !params["image"].is_string()) throw HttpError(400, "image id is required");
      image_id = params["image"].get<std::string>();
    } else {
      // Inline upload: PNG body, parameters in the query string.
      image_id = store({req.body.begin(), req.body.end()});
      params = json::object();
      for (const auto& [key, value] : req.params) params[key] = value;
    }

    auto text = [&](const char* key) -> std::optional<std::string> {
      if (!params.contains(key)) return std::nullopt;
      const auto& v = params[key];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number() || v.is_boolean()) return v.dump();
      throw HttpError(400, std::string("bad ") + key);
    };
    auto flag = [&](const char* key) {
      const auto v = text(key);
      return v && (*v == "1" || *v == "true");
    };

    const auto model_name = text("model");
    if (!model_name) throw HttpError(400, "model is required");
    const auto& m = model(*model_name);
    const auto img = image(image_id);
    const bool full = flag("full") || (req.has_param("full") && req.get_param_value("full") == "1");
    const bool automatic = flag("auto");

    Image out;
    if (automatic) {
      const auto e = entry(img, *model_name, m, full, text("segments").value_or("grid:100"));
      EnrichedOptions eo;
      eo.sim_iters = opts.sim_iters;
      eo.seed = opts.seed;
      out = to_rgb_preserving(e->working, e->lab,
                              apply_segment_palettes(e->lab, *e->segments, e->segment_palettes, *m.predictor, eo));
    } else {
      const auto xs = text("x"), ys = text("y");
      if (!xs || !ys) throw HttpError(400, "x and y are required unless auto is set");
      const double x = parse_number(*xs, "x"), y = parse_number(*ys, "y");
      const auto dims_text = text("dims");
      const auto dims = dims_text ? parse_dims(*dims_text, m.predictor->model().q) : m.default_dims;
      const auto e = entry(img, *model_name, m, full, std::nullopt);
      const Palette target = from_spf(m.predictor->predict(latent_point(m, dims, x, y)).mean);
      const Palette matched = match_palette(e->source, PaletteSet(target.k(), {target}));
      RecolorSpec spec{e->source, matched, true, 1.0};
      out = to_rgb_preserving(e->working, e->lab, recolor_single(e->lab, spec));
    }
    const auto png = encode_png(out);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void post_suggest(const httplib::Request& req, httplib::Response& res) const {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      throw HttpError(400, "malformed JSON body");
    }
    if (!body.is_object() || !body.contains("model") || !body["model"].is_string()) {
      throw HttpError(400, "model is required");
    }
    const auto& m = model(body["model"].get<std::string>());
    const int k = m.predictor->model().k;
    if (!body.contains("observed") || !body["observed"].is_array() || body["observed"].empty()) {
      throw HttpError(400, "observed must be a non-empty list of colors");
    }
    std::vector<LabColor> observed;
    for (const auto& c : body["observed"]) observed.push_back(parse_color(c));
    if (static_cast<int>(observed.size()) > k) throw HttpError(400, "more observed colors than K");
    const int count = body.value("count", 3);
    if (count < 1 || count > 10) throw HttpError(400, "count must be in 1..10");
    const bool clamp = body.value("clamp", false);

    const auto partial = align_partial(observed, m.training);
    json out = json::array();
    for (int i = 0; i < count; ++i) {
      const int iters = std::min(200, 4 * (i + 1) * (i + 1));
      auto colors = gplvm_complete(*m.predictor, partial, iters, clamp).palette.colors();
      std::stable_sort(colors.begin(), colors.end(), [](const LabColor& a, const LabColor& b) { return a.l < b.l; });
      json p = palette_json(Palette(std::move(colors)));
      p["sim_iters"] = iters;
      out.push_back(std::move(p));
    }
    send_json(res, out);
  }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        (this->*f)(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.code, e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  void routes() {
    http.Get("/models", guarded(&Impl::get_models));
    http.Get("/models/:name/density", guarded(&Impl::get_density));
    http.Get("/models/:name/palette", guarded(&Impl::get_palette));
    http.Post("/images", guarded(&Impl::post_images));
    http.Post("/recolor", guarded(&Impl::post_recolor));
    http.Post("/suggest", guarded(&Impl::post_suggest));
    http.set_payload_max_length(64 * 1024 * 1024);
  }

  int bind(const std::string& host, int port) {
    routes();
    const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }
};

Server::Server(ServerOptions opts) : impl_(std::make_unique<Impl>()) { impl_->opts = std::move(opts); }

Server::~Server() { stop(); }

void Server::load_directories() {
  auto& im = *impl_;
  if (!im.opts.models_dir.empty()) {
    if (!fs::is_directory(im.opts.models_dir)) throw std::runtime_error("models directory not found: " + im.opts.models_dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(im.opts.models_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        auto any = load_model(f.string());
        if (auto* g = std::get_if<GplvmModel>(&any)) {
          add_model(f.stem().string(), *g);
        } else {
          im.warnings.push_back(f.filename().string() + ": not a gplvm model; skipped");
        }
      } catch (const std::exception& e) {
        im.warnings.push_back(f.filename().string() + ": " + e.what());
      }
    }
  }
  if (!im.opts.images_dir.empty()) {
    if (!fs::is_directory(im.opts.images_dir)) throw std::runtime_error("images directory not found: " + im.opts.images_dir);
    for (const auto& e : fs::directory_iterator(im.opts.images_dir)) {
      if (!e.is_regular_file() || e.path().extension() != ".png") continue;
      try {
        add_image(e.path().stem().string(), read_png(e.path().string()));
      } catch (const std::exception& ex) {
        im.warnings.push_back(e.path().filename().string() + ": " + ex.what());
      }
    }
  }
}

void Server::add_model(const std::string& name, const GplvmModel& model) {
  LoadedModel m;
  m.predictor = std::make_unique<GplvmPredictor>(model);
  m.training = model.training_palettes();
  m.default_dims = model.q >= 2 ? most_significant_dims(model) : std::pair{0, 0};
  impl_->models.insert_or_assign(name, std::move(m));
}

std::string Server::add_image(const Image& image) {
  const auto png = encode_png(image);
  return impl_->store(png);
}

void Server::add_image(const std::string& id, const Image& image) {
  const auto png = encode_png(image);
  std::lock_guard lock(impl_->images_mu);
  impl_->images.insert_or_assign(id, StoredImage{content_hash(png), image});
}

const std::vector<std::string>& Server::warnings() const { return impl_->warnings; }

std::vector<std::string> Server::model_names() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : impl_->models) out.push_back(name);
  return out;
}

int Server::start(const std::string& host, int port) {
  const int bound = impl_->bind(host, port);
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::listen(const std::string& host, int port) {
  impl_->bind(host, port);
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

std::size_t Server::cache_hits() const { return impl_->hits; }
std::size_t Server::cache_misses() const { return impl_->misses; }

}  // namespace orchestra
