#include "dca/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dca/errors.hpp"
#include "json.hpp"

namespace dca {

using nlohmann::json;

namespace {

json to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from(const json& j, const std::string& key, const std::string& name) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ParseError(name, 0, "model is missing array '" + key + "'");
  const auto& arr = j.at(key);
  Vector out(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) out(static_cast<int>(i)) = arr[i].get<double>();
  return out;
}

}  // namespace

void write_model(const ModelParams& params, std::ostream& out, const std::string& metadata_json) {
  json doc;
  doc["format"] = "dca-model";
  doc["version"] = kModelFormatVersion;
  doc["family"] = to_string(params.family);
  doc["K"] = params.num_components();
  doc["J"] = params.vocab_size();
  doc["meta"] = json::parse(metadata_json);
  doc["alpha"] = to_json(params.alpha);
  if (params.family != Family::DM) doc["beta"] = to_json(params.beta);
  if (params.family == Family::CGP) doc["rho"] = to_json(params.rho);
  doc["gamma"] = to_json(params.gamma);
  json theta = json::array();
  for (int j = 0; j < params.theta.rows(); ++j) {
    json row = json::array();
    for (int k = 0; k < params.theta.cols(); ++k) row.push_back(params.theta(j, k));
    theta.push_back(std::move(row));
  }
  doc["theta"] = std::move(theta);
  if (params.groups) {
    json g = json::array();
    for (int id : params.groups->group_of) g.push_back(id + 1);
    doc["groups"] = std::move(g);
  } else {
    doc["groups"] = nullptr;
  }
  out << doc.dump(1) << '\n';
}

ModelParams read_model(std::istream& in, const std::string& name) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(name, 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "dca-model") throw ParseError(name, 0, "not a dca-model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ParseError(name, 0, "unsupported model format version " + std::to_string(version));
    ModelParams p;
    p.family = family_from_string(doc.at("family").get<std::string>());
    const int K = doc.at("K").get<int>();
    const int J = doc.at("J").get<int>();
    p.alpha = vector_from(doc, "alpha", name);
    if (p.family != Family::DM) p.beta = vector_from(doc, "beta", name);
    if (p.family == Family::CGP) p.rho = vector_from(doc, "rho", name);
    p.gamma = vector_from(doc, "gamma", name);
    const auto& theta = doc.at("theta");
    if (!theta.is_array() || static_cast<int>(theta.size()) != J) throw ParseError(name, 0, "theta must have J rows");
    p.theta.resize(J, K);
    for (int j = 0; j < J; ++j) {
      const auto& row = theta[static_cast<std::size_t>(j)];
      if (!row.is_array() || static_cast<int>(row.size()) != K) throw ParseError(name, 0, "theta rows must have K entries");
      for (int k = 0; k < K; ++k) p.theta(j, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    if (doc.contains("groups") && !doc.at("groups").is_null()) {
      GroupSpec spec;
      for (const auto& g : doc.at("groups")) spec.group_of.push_back(g.get<int>() - 1);
      for (int g : spec.group_of) spec.num_groups = std::max(spec.num_groups, g + 1);
      p.groups = std::move(spec);
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(name, 0, std::string("malformed model: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(name, 0, e.what());
  }
}

void save_model(const ModelParams& params, const std::string& path, const std::string& metadata_json) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  write_model(params, out, metadata_json);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_model(in, path);
}

}  // namespace dca
