#include "orchestra/io.hpp"

#include <fstream>
#include <stdexcept>

#include "orchestra/errors.hpp"

namespace orchestra {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols_hint = -1) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : std::max<Eigen::Index>(cols_hint, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json palettes_json(const PaletteSet& s) {
  json out = json::array();
  for (const auto& p : s.palettes()) {
    json colors = json::array();
    for (const auto& c : p.colors()) colors.push_back({c.l, c.a, c.b});
    out.push_back(std::move(colors));
  }
  return out;
}

}  // namespace

json dataset_to_json(const PaletteSet& s) {
  return {{"k", s.k()}, {"colors_space", "lab01"}, {"palettes", palettes_json(s)}};
}

json dataset_to_json(const SortedPaletteSet& s) {
  json j = dataset_to_json(s.palettes);
  j["provenance"] = s.provenance;
  return j;
}

PaletteSet dataset_from_json(const json& j) {
  const int k = j.at("k").get<int>();
  if (j.contains("colors_space") && j.at("colors_space") != "lab01") {
    throw FormatError("unsupported colors_space: " + j.at("colors_space").dump());
  }
  std::vector<Palette> palettes;
  for (const auto& p : j.at("palettes")) {
    std::vector<LabColor> colors;
    for (const auto& c : p) {
      if (c.size() != 3) throw FormatError("each color must have three components");
      const LabColor col{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
      if (col.l < 0 || col.l > 1 || col.a < 0 || col.a > 1 || col.b < 0 || col.b > 1) {
        throw FormatError("lab01 color component outside [0,1]");
      }
      colors.push_back(col);
    }
    if (static_cast<int>(colors.size()) != k) throw FormatError("palette size differs from declared k");
    palettes.emplace_back(std::move(colors));
  }
  return PaletteSet(k, std::move(palettes));
}

SortedPaletteSet sorted_dataset_from_json(const json& j) {
  SortedPaletteSet s = as_sorted(dataset_from_json(j));
  if (j.contains("provenance")) {
    auto prov = j.at("provenance").get<std::vector<std::vector<int>>>();
    if (static_cast<int>(prov.size()) != s.size()) throw FormatError("provenance length mismatch");
    s.provenance = std::move(prov);
  }
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j, int indent) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(indent) << '\n';
}

PaletteSet load_dataset(const std::string& path) { return dataset_from_json(read_json_file(path)); }
SortedPaletteSet load_sorted_dataset(const std::string& path) { return sorted_dataset_from_json(read_json_file(path)); }
void save_dataset(const std::string& path, const PaletteSet& s) { write_json_file(path, dataset_to_json(s)); }
void save_dataset(const std::string& path, const SortedPaletteSet& s) { write_json_file(path, dataset_to_json(s)); }

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.source_image_paths = j.at("source_image_paths").get<std::vector<std::string>>();
  m.k = j.value("k", m.k);
  m.palettes_per_set = j.value("palettes_per_set", m.palettes_per_set);
  m.random_seed = j.value("random_seed", m.random_seed);
  if (j.contains("patch")) {
    const auto& p = j.at("patch");
    m.patch.patch_size = p.value("patch_size", m.patch.patch_size);
    m.patch.step = p.value("step", m.patch.step);
    m.patch.samples_per_patch = p.value("samples_per_patch", m.patch.samples_per_patch);
  }
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::string& path) { return manifest_from_json(read_json_file(path)); }

json model_to_json(const GplvmModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"type", "gplvm"},
          {"k", m.k},
          {"q", m.q},
          {"data_mean", vector_to_json(m.data_mean)},
          {"X", matrix_to_json(m.X)},
          {"Y", matrix_to_json(m.Y)},
          {"hyperparams", {{"alpha", m.hyper.alpha}, {"gamma", m.hyper.gamma}, {"beta", m.hyper.beta}}},
          {"degenerate", m.degenerate},
          {"training_log", m.training_log}};
}

json model_to_json(const GmmModel& m) {
  json mixture = json::array();
  for (int c = 0; c < m.components(); ++c) {
    mixture.push_back({{"weight", m.weights[c]},
                       {"mean", vector_to_json(m.means[c])},
                       {"covariance", matrix_to_json(m.covariances[c])}});
  }
  return {{"format_version", kModelFormatVersion},
          {"type", "pca-gmm"},
          {"k", m.k},
          {"q", m.latent_dim()},
          {"data_mean", vector_to_json(m.data_mean)},
          {"pca_basis", matrix_to_json(m.basis)},
          {"residual_variance", m.residual_variance},
          {"regularization", m.regularization},
          {"mixture", mixture},
          {"em_trace", m.em_trace}};
}

AnyModel model_from_json(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) throw FormatError("unsupported model format_version " + std::to_string(version));
  const auto type = j.at("type").get<std::string>();
  if (type == "gplvm") {
    GplvmModel m;
    m.k = j.at("k").get<int>();
    m.q = j.at("q").get<int>();
    m.data_mean = vector_from_json(j.at("data_mean"));
    m.X = matrix_from_json(j.at("X"), m.q);
    m.Y = matrix_from_json(j.at("Y"), 3 * m.k);
    const auto& h = j.at("hyperparams");
    m.hyper = {h.at("alpha").get<double>(), h.at("gamma").get<double>(), h.at("beta").get<double>()};
    m.degenerate = j.value("degenerate", false);
    m.training_log = j.value("training_log", std::vector<double>{});
    if (m.data_mean.size() != 3 * m.k || m.Y.cols() != 3 * m.k || m.X.cols() != m.q || m.X.rows() != m.Y.rows()) {
      throw FormatError("inconsistent GPLVM model dimensions");
    }
    if (!(m.hyper.alpha > 0 && m.hyper.gamma > 0 && m.hyper.beta > 0)) {
      throw FormatError("GPLVM hyperparameters must be positive");
    }
    return m;
  }
  if (type == "pca-gmm") {
    GmmModel m;
    m.k = j.at("k").get<int>();
    m.data_mean = vector_from_json(j.at("data_mean"));
    m.basis = matrix_from_json(j.at("pca_basis"));
    m.residual_variance = j.value("residual_variance", 0.0);
    m.regularization = j.value("regularization", 0.0);
    for (const auto& c : j.at("mixture")) {
      m.weights.push_back(c.at("weight").get<double>());
      m.means.push_back(vector_from_json(c.at("mean")));
      m.covariances.push_back(matrix_from_json(c.at("covariance")));
    }
    m.em_trace = j.value("em_trace", std::vector<double>{});
    if (m.data_mean.size() != 3 * m.k || m.basis.rows() != 3 * m.k) {
      throw FormatError("inconsistent PCA-GMM model dimensions");
    }
    return m;
  }
  throw FormatError("unknown model type: " + type);
}

void save_model(const std::string& path, const AnyModel& m) {
  write_json_file(path, std::visit([](const auto& model) { return model_to_json(model); }, m));
}

AnyModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

}  // namespace orchestra
