#pragma once

// File formats: dataset CSV + mask sidecar, model JSON, report JSON/CSV,
// effect-size CSV, curve CSVs and group annotation files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratekit/bnn.hpp"
#include "ratekit/esa.hpp"
#include "ratekit/eval.hpp"
#include "ratekit/rate.hpp"
#include "ratekit/simgen.hpp"

namespace ratekit::io {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

// "%.17g": round-trips every finite double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
// Writes the file, creating parent directories; throws InvalidInput on failure.
void write_text(const std::filesystem::path& path, const std::string& content);

// Header row of feature names followed by `y`.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text);
Dataset read_dataset_csv(const std::filesystem::path& path);

json mask_to_json(const std::vector<bool>& mask, std::uint64_t seed);
std::vector<bool> mask_from_json(const json& doc);

json network_to_json(const Network& net);
Network network_from_json(const json& doc);

json report_to_json(const std::vector<ImportanceReport>& reports);
std::string report_to_csv(const std::vector<ImportanceReport>& reports);
// Per-feature rates from an importance JSON document, averaged over classes.
std::vector<double> rates_from_report_json(const json& doc);

// feature,class,mu,omega_diag
std::string esa_to_csv(const EffectSizePosterior& esa);

std::string roc_to_csv(const RocCurve& roc);

// Rows: `group_name,feature_name`; an optional header `group,feature` or
// `group_name,feature_name` is skipped. Unknown feature names are errors.
GroupMap groups_from_csv(const std::string& text, const std::vector<std::string>& feature_names);

}  // namespace ratekit::io
