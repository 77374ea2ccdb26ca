#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "metamec/agents/agent.hpp"
#include "metamec/errors.hpp"

namespace metamec {

namespace detail {

inline nlohmann::ordered_json mlp_to_json(const MlpParams& p) {
  nlohmann::ordered_json j;
  j["layer_sizes"] = p.layer_sizes;
  j["hidden_activation"] = p.hidden_activation == HiddenActivation::tanh ? "tanh" : "relu";
  j["output_activation"] = p.output_activation == OutputActivation::linear ? "linear" : "softmax";
  auto weights = nlohmann::ordered_json::array();
  for (const auto& w : p.weights) weights.push_back(w.data);
  j["weights"] = weights;
  j["biases"] = p.biases;
  return j;
}

inline MlpParams mlp_from_json(const nlohmann::ordered_json& j) {
  MlpParams p;
  p.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  p.hidden_activation = j.at("hidden_activation") == "tanh" ? HiddenActivation::tanh : HiddenActivation::relu;
  p.output_activation = j.at("output_activation") == "linear" ? OutputActivation::linear : OutputActivation::softmax;
  const auto& weights = j.at("weights");
  if (weights.size() + 1 != p.layer_sizes.size()) throw ShapeError("params: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix m(p.layer_sizes[l + 1], p.layer_sizes[l]);
    m.data = weights[l].get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw ShapeError("params: weight matrix has wrong size");
    p.weights.push_back(std::move(m));
  }
  p.biases = j.at("biases").get<std::vector<Vec>>();
  detail::check_mlp_shape(p);
  return p;
}

}  // namespace detail

inline nlohmann::ordered_json params_to_json(const Agent& agent) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(to_string(agent.config().algorithm));
  const auto& p = agent.params();
  auto actors = nlohmann::ordered_json::array();
  for (const auto& a : p.actors) actors.push_back(detail::mlp_to_json(a));
  j["actors"] = actors;
  if (agent.learns()) j["critic"] = detail::mlp_to_json(p.critic);
  if (p.global_critic) j["global_critic"] = detail::mlp_to_json(*p.global_critic);
  return j;
}

inline void save_params(const Agent& agent, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write params to " + path);
  out << params_to_json(agent).dump() << "\n";
}

/// Loads parameters into `agent`; the file's algorithm and shapes must match.
inline void load_params(Agent& agent, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read params from " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
    if (j.at("algorithm").get<std::string>() != to_string(agent.config().algorithm))
      throw ConfigError("params file was trained with algorithm " + j.at("algorithm").get<std::string>());
    AgentParams p;
    for (const auto& a : j.at("actors")) p.actors.push_back(detail::mlp_from_json(a));
    if (j.contains("critic")) p.critic = detail::mlp_from_json(j.at("critic"));
    if (j.contains("global_critic")) p.global_critic = detail::mlp_from_json(j.at("global_critic"));
    agent.set_params(std::move(p));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed params file: " + e.what());
  }
}

}  // namespace metamec
