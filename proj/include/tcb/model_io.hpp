#pragma once

#include <string>
#include <vector>

#include "tcb/booster.hpp"
#include "tcb/cascade.hpp"
#include "tcb/dataset.hpp"

#include <json.hpp>

namespace tcb {

using Json = nlohmann::json;

struct ModelMetadata {
  std::string mode;  // "fisher", "lac", "adaboost", ...
  double theta = 0.0;
  std::uint64_t seed = 0;
  Json config;            // full run configuration
  Json training_metrics;  // metrics measured on the training set
};

void save_model(const std::string& path, const StrongClassifier& classifier,
                const ModelMetadata& meta);

struct LoadedModel {
  StrongClassifier classifier;
  ModelMetadata meta;
};

LoadedModel load_model(const std::string& path);

void save_cascade(const std::string& path, const CascadeModel& model,
                  const Json& meta);

struct LoadedCascade {
  CascadeModel model;
  Json meta;
};

LoadedCascade load_cascade(const std::string& path);

// Dataset CSV: optional '#'-prefixed metadata lines, then a header row
// `label,f0,f1,...`, then one example per line with label +1/-1.
void save_dataset_csv(const std::string& path, const Dataset& data,
                      const Json& meta);

// Sorts rows positives-first; the permutation lands in Dataset::source_rows.
Dataset load_dataset_csv(const std::string& path);

// 17 significant digits, enough to round-trip any double exactly.
std::string format_double(double value);

// Rows of doubles under a '#' metadata line and a column header.
void write_csv(const std::string& path, const Json& meta,
               const std::string& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace tcb
