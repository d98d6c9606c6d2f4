#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "orchestra/bps.hpp"
#include "orchestra/extract.hpp"
#include "orchestra/gmm.hpp"
#include "orchestra/gplvm.hpp"

namespace orchestra {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

// Dataset exchange format:
//   {"k": K, "colors_space": "lab01", "palettes": [[[l,a,b] x K], ...], "provenance": [[...]]?}
json dataset_to_json(const PaletteSet& s);
json dataset_to_json(const SortedPaletteSet& s);
PaletteSet dataset_from_json(const json& j);
/// Provenance is optional in the file; identity when absent.
SortedPaletteSet sorted_dataset_from_json(const json& j);

PaletteSet load_dataset(const std::string& path);
SortedPaletteSet load_sorted_dataset(const std::string& path);
void save_dataset(const std::string& path, const PaletteSet& s);
void save_dataset(const std::string& path, const SortedPaletteSet& s);

DatasetManifest manifest_from_json(const json& j);
DatasetManifest load_manifest(const std::string& path);

using AnyModel = std::variant<GplvmModel, GmmModel>;

json model_to_json(const GplvmModel& m);
json model_to_json(const GmmModel& m);
AnyModel model_from_json(const json& j);

void save_model(const std::string& path, const AnyModel& m);
AnyModel load_model(const std::string& path);

json read_json_file(const std::string& path);
/// Writes j.dump(indent) followed by a newline.
void write_json_file(const std::string& path, const json& j, int indent = -1);

}  // namespace orchestra
