#include "tcb/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcb {

namespace {

Json stumps_to_json(const std::vector<DecisionStump>& stumps) {
  Json arr = Json::array();
  for (const DecisionStump& s : stumps)
    arr.push_back({{"feature_index", s.feature_index},
                   {"threshold", s.threshold},
                   {"polarity", s.polarity}});
  return arr;
}

std::vector<DecisionStump> stumps_from_json(const Json& arr) {
  std::vector<DecisionStump> stumps;
  for (const Json& j : arr)
    stumps.push_back({j.at("feature_index").get<int>(),
                      j.at("threshold").get<double>(),
                      j.at("polarity").get<int>()});
  return stumps;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const Json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace

void save_model(const std::string& path, const StrongClassifier& classifier,
                const ModelMetadata& meta) {
  Json j;
  j["format"] = "tcboost-model";
  j["mode"] = meta.mode;
  j["theta"] = meta.theta;
  j["weak_classifiers"] = stumps_to_json(classifier.weak_classifiers);
  j["w"] = vector_to_json(classifier.w);
  j["b"] = classifier.b;
  j["seed"] = meta.seed;
  j["config"] = meta.config.is_null() ? Json::object() : meta.config;
  j["training_metrics"] =
      meta.training_metrics.is_null() ? Json::object() : meta.training_metrics;
  write_text_file(path, j.dump(2) + "\n");
}

LoadedModel load_model(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.value("format", "") != "tcboost-model")
    throw std::runtime_error("not a model file: " + path);
  LoadedModel out;
  out.classifier.weak_classifiers = stumps_from_json(j.at("weak_classifiers"));
  out.classifier.w = vector_from_json(j.at("w"));
  out.classifier.b = j.at("b").get<double>();
  out.meta.mode = j.at("mode").get<std::string>();
  out.meta.theta = j.at("theta").get<double>();
  out.meta.seed = j.at("seed").get<std::uint64_t>();
  out.meta.config = j.at("config");
  out.meta.training_metrics = j.at("training_metrics");
  return out;
}

void save_cascade(const std::string& path, const CascadeModel& model,
                  const Json& meta) {
  Json j;
  j["format"] = "tcboost-cascade";
  j["classifiers"] = stumps_to_json(model.classifiers);
  Json exits = Json::array();
  for (const CascadeExit& e : model.exits)
    exits.push_back({{"n_t", e.n_t}, {"w", vector_to_json(e.w)}, {"b", e.b}});
  j["exits"] = exits;
  j["lac_start_node"] = model.lac_start_node;
  j["targets"] = {{"d_min", model.targets.d_min},
                  {"f_max", model.targets.f_max},
                  {"overall_fp", model.targets.overall_fp}};
  j["meta"] = meta.is_null() ? Json::object() : meta;
  write_text_file(path, j.dump(2) + "\n");
}

LoadedCascade load_cascade(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.value("format", "") != "tcboost-cascade")
    throw std::runtime_error("not a cascade file: " + path);
  LoadedCascade out;
  out.model.classifiers = stumps_from_json(j.at("classifiers"));
  for (const Json& e : j.at("exits"))
    out.model.exits.push_back({e.at("n_t").get<Eigen::Index>(),
                               vector_from_json(e.at("w")),
                               e.at("b").get<double>()});
  out.model.lac_start_node = j.at("lac_start_node").get<int>();
  out.model.targets.d_min = j.at("targets").at("d_min").get<double>();
  out.model.targets.f_max = j.at("targets").at("f_max").get<double>();
  out.model.targets.overall_fp = j.at("targets").at("overall_fp").get<double>();
  out.meta = j.at("meta");
  return out;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void save_dataset_csv(const std::string& path, const Dataset& data,
                      const Json& meta) {
  data.validate();
  std::ostringstream out;
  if (!meta.is_null()) out << "# " << meta.dump() << "\n";
  out << "label";
  for (Eigen::Index j = 0; j < data.dims(); ++j) out << ",f" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    for (Eigen::Index j = 0; j < data.dims(); ++j)
      out << "," << format_double(data.features(i, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("label", 0) != 0)
        throw std::runtime_error("dataset csv: missing `label,f0,...` header");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ','))
      throw std::runtime_error("dataset csv: empty row");
    const int label = std::stoi(cell);
    if (label != 1 && label != -1)
      throw std::runtime_error("dataset csv: labels must be +1 or -1");
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("dataset csv: ragged rows");
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dataset csv: no data rows");

  RowMatrixXd features(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  Eigen::VectorXi label_vec(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    label_vec[static_cast<Eigen::Index>(i)] = labels[i];
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  }
  return Dataset::sorted(std::move(features), std::move(label_vec));
}

void write_csv(const std::string& path, const Json& meta,
               const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  if (!meta.is_null()) out << "# " << meta.dump() << "\n";
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << format_double(row[j]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace tcb
