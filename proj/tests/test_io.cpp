#include <doctest.h>

#include <fstream>
#include <random>

#include "helpers.hpp"
#include "orchestra/errors.hpp"
#include "orchestra/io.hpp"

using namespace orchestra;

TEST_CASE("dataset round trip") {
  const auto dir = testing::scratch_dir("io");
  std::mt19937_64 rng(1);
  const auto s = testing::random_set(rng, 12, 5);
  const auto path = (dir / "d.json").string();
  save_dataset(path, s);
  CHECK(load_dataset(path) == s);

  const auto sorted = bps_sort(s);
  save_dataset(path, sorted);
  const auto back = load_sorted_dataset(path);
  CHECK(back.palettes == sorted.palettes);
  CHECK(back.provenance == sorted.provenance);

  const auto j = read_json_file(path);
  CHECK(j.at("k") == 5);
  CHECK(j.at("colors_space") == "lab01");
  CHECK(j.at("palettes").size() == 12);
}

TEST_CASE("dataset validation") {
  json ok = {{"k", 2}, {"palettes", {{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}}}}};
  CHECK(dataset_from_json(ok).size() == 1);
  CHECK(sorted_dataset_from_json(ok).provenance[0] == std::vector<int>{0, 1});

  auto bad = ok;
  bad["colors_space"] = "srgb";
  CHECK_THROWS_AS(dataset_from_json(bad), FormatError);
  bad = ok;
  bad["palettes"][0][1] = {0.4, 1.5, 0.6};
  CHECK_THROWS_AS(dataset_from_json(bad), FormatError);
  bad = ok;
  bad["palettes"][0][1] = {0.4, 0.5};
  CHECK_THROWS_AS(dataset_from_json(bad), FormatError);
  bad = ok;
  bad["k"] = 3;
  CHECK_THROWS_AS(dataset_from_json(bad), FormatError);
  bad = ok;
  bad["provenance"] = {{0, 1}, {1, 0}};
  CHECK_THROWS_AS(sorted_dataset_from_json(bad), FormatError);

  CHECK_THROWS_AS(load_dataset("/nonexistent/orchestra.json"), IoError);
  const auto dir = testing::scratch_dir("io_bad");
  std::ofstream((dir / "x.json").string()) << "{not json";
  CHECK_THROWS_AS(load_dataset((dir / "x.json").string()), FormatError);
}

TEST_CASE("manifest") {
  const auto m = manifest_from_json({{"source_image_paths", {"a.png", "b.png"}},
                                     {"k", 4},
                                     {"palettes_per_set", 50},
                                     {"random_seed", 9},
                                     {"patch", {{"patch_size", 100}, {"step", 50}}}});
  CHECK(m.source_image_paths.size() == 2);
  CHECK(m.k == 4);
  CHECK(m.palettes_per_set == 50);
  CHECK(m.random_seed == 9);
  CHECK(m.patch.patch_size == 100);
  CHECK(m.patch.step == 50);

  const auto d = manifest_from_json({{"source_image_paths", {"a.png"}}});
  CHECK(d.k == 5);
  CHECK(d.palettes_per_set == 400);
  CHECK(d.patch.patch_size == 200);
  CHECK(d.patch.step == 100);
  CHECK(d.patch.samples_per_patch == 1000);
  CHECK_THROWS(manifest_from_json({{"k", 5}}));
  CHECK_THROWS(manifest_from_json({{"source_image_paths", {"a.png"}}, {"k", 17}}));
}

TEST_CASE("gplvm model round trip") {
  const auto dir = testing::scratch_dir("io_model");
  std::mt19937_64 rng(2);
  const auto m = train_gplvm(testing::random_set(rng, 15, 3), {2, 20, 4});
  const auto path = (dir / "g.json").string();
  save_model(path, m);
  const auto back = std::get<GplvmModel>(load_model(path));
  CHECK(back.k == m.k);
  CHECK(back.q == m.q);
  CHECK(back.X == m.X);
  CHECK(back.Y == m.Y);
  CHECK(back.data_mean == m.data_mean);
  CHECK(back.hyper.alpha == m.hyper.alpha);
  CHECK(back.hyper.gamma == m.hyper.gamma);
  CHECK(back.hyper.beta == m.hyper.beta);
  CHECK(back.training_log == m.training_log);
  CHECK(gplvm_nll(back) == gplvm_nll(m));

  auto j = read_json_file(path);
  CHECK(j.at("type") == "gplvm");
  j["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), FormatError);
  j = read_json_file(path);
  j["hyperparams"]["beta"] = -1.0;
  CHECK_THROWS_AS(model_from_json(j), FormatError);
  j = read_json_file(path);
  j["q"] = 3;
  CHECK_THROWS_AS(model_from_json(j), FormatError);
  j = read_json_file(path);
  j["type"] = "vae";
  CHECK_THROWS_AS(model_from_json(j), FormatError);
}

TEST_CASE("gmm model round trip") {
  const auto dir = testing::scratch_dir("io_gmm");
  std::mt19937_64 rng(3);
  const auto m = train_pca_gmm(testing::random_set(rng, 40, 3), {4, 3, 50, 1e-8, 1});
  const auto path = (dir / "m.json").string();
  save_model(path, m);
  const auto back = std::get<GmmModel>(load_model(path));
  CHECK(back.basis == m.basis);
  CHECK(back.weights == m.weights);
  CHECK(back.means == m.means);
  CHECK(back.covariances == m.covariances);
  CHECK(back.residual_variance == m.residual_variance);
  CHECK(back.regularization == m.regularization);
  PartialPalette p(3);
  p.slots[1] = LabColor{0.3, 0.6, 0.4};
  CHECK(gmm_complete(back, p) == gmm_complete(m, p));
  CHECK(read_json_file(path).at("type") == "pca-gmm");
}
