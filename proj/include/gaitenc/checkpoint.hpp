#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitenc/parameter.hpp"

namespace gaitenc {

inline constexpr int kCheckpointVersion = 1;

// {version, config echo, parameters: [{name, shape, values}]}
inline nlohmann::json checkpoint_to_json(const std::vector<Parameter*>& params,
                                         const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["config"] = config_echo;
  auto& arr = j["parameters"] = nlohmann::json::array();
  std::set<std::string> seen;
  for (const Parameter* p : params) {
    if (!seen.insert(p->name).second) {
      throw std::logic_error("duplicate parameter name '" + p->name + "'");
    }
    arr.push_back({{"name", p->name}, {"shape", p->value.shape()}, {"values", p->value.data()}});
  }
  return j;
}

inline void save_checkpoint(const std::filesystem::path& path,
                            const std::vector<Parameter*>& params,
                            const nlohmann::json& config_echo) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(params, config_echo).dump(2) << '\n';
}

struct LoadedCheckpoint {
  nlohmann::json config;
  std::vector<Parameter> parameters;

  const Parameter* find(const std::string& name) const {
    for (const Parameter& p : parameters) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  const int version = j.at("version").get<int>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint " + path.string() + " has unknown version " +
                             std::to_string(version));
  }
  LoadedCheckpoint ck;
  ck.config = j.value("config", nlohmann::json::object());
  for (const auto& pj : j.at("parameters")) {
    ck.parameters.emplace_back(pj.at("name").get<std::string>(),
                               Tensor(pj.at("shape").get<std::vector<int>>(),
                                      pj.at("values").get<std::vector<double>>()));
  }
  return ck;
}

// Copies checkpoint tensors into live parameters, matching by name.
inline void restore_parameters(const LoadedCheckpoint& ck,
                               const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    const Parameter* src = ck.find(p->name);
    if (src == nullptr) {
      throw std::runtime_error("checkpoint is missing parameter " + p->name);
    }
    if (!(src->value.shape() == p->value.shape())) {
      throw std::runtime_error("checkpoint parameter " + p->name + " has shape " +
                               src->value.shape_str() + ", expected " + p->value.shape_str());
    }
    p->value = src->value;
    p->zero_grad();
  }
}

}  // namespace gaitenc
