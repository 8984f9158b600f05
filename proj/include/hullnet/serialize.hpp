#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "hullnet/network_builder.hpp"
#include "hullnet/version.hpp"

namespace hullnet {

using json = nlohmann::json;

inline json to_json(const SeparatorPlane& p) {
  return {{"normal", p.normal}, {"offset", p.offset}, {"margin", p.margin}};
}

inline SeparatorPlane plane_from_json(const json& j) {
  SeparatorPlane p;
  p.normal = j.at("normal").get<std::vector<double>>();
  p.offset = j.at("offset").get<double>();
  p.margin = j.at("margin").get<double>();
  return p;
}

inline json to_json(const LayerAffine& l) {
  return {{"out_dim", l.out_dim},
          {"in_dim", l.in_dim},
          {"weights", l.weights},
          {"biases", l.biases}};
}

inline LayerAffine layer_from_json(const json& j) {
  LayerAffine l;
  l.out_dim = j.at("out_dim").get<std::size_t>();
  l.in_dim = j.at("in_dim").get<std::size_t>();
  l.weights = j.at("weights").get<std::vector<double>>();
  l.biases = j.at("biases").get<std::vector<double>>();
  if (l.weights.size() != l.out_dim * l.in_dim || l.biases.size() != l.out_dim)
    throw std::runtime_error("layer_from_json: inconsistent shapes");
  return l;
}

inline json to_json(const ActivationSpec& a) {
  json j{{"kind", a.name().substr(0, a.name().find(':'))}};
  if (a.kind == Activation::leaky_relu) {
    j["neg_slope"] = a.neg_slope;
    j["pos_slope"] = a.pos_slope;
  }
  return j;
}

inline ActivationSpec activation_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "leaky_relu")
    return ActivationSpec::make_leaky(j.at("neg_slope").get<double>(),
                                      j.at("pos_slope").get<double>());
  return ActivationSpec::parse(kind);
}

inline json to_json(const MarginCertificate& c) {
  return {{"x0", c.x0},
          {"delta", c.delta},
          {"epsilon", c.epsilon},
          {"parts", c.parts},
          {"ratio", c.ratio}};
}

inline MarginCertificate certificate_from_json(const json& j) {
  MarginCertificate c;
  c.x0 = j.at("x0").get<double>();
  c.delta = j.at("delta").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.parts = j.at("parts").get<std::size_t>();
  c.ratio = j.at("ratio").get<double>();
  return c;
}

inline json to_json(const Decomposition& d) {
  return {{"l1", d.l1()},
          {"l2", d.l2()},
          {"parts_1", d.parts_x},
          {"parts_2", d.parts_y},
          {"seed", d.seed},
          {"projections_used", d.projections_used},
          {"peel_iterations", d.peel_iterations}};
}

inline Decomposition decomposition_from_json(const json& j) {
  Decomposition d;
  d.parts_x = j.at("parts_1").get<std::vector<std::vector<std::size_t>>>();
  d.parts_y = j.at("parts_2").get<std::vector<std::vector<std::size_t>>>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.projections_used = j.at("projections_used").get<std::size_t>();
  d.peel_iterations = j.value("peel_iterations", std::size_t{0});
  return d;
}

inline json to_json(const ConstructedNetwork& net) {
  json j{{"schema_version", kNetworkSchemaVersion},
         {"tool_version", kVersion},
         {"in_dim", net.in_dim},
         {"activation", to_json(net.activation)},
         {"layer1", to_json(net.layer1)},
         {"layer2", to_json(net.layer2)},
         {"output_plane", to_json(net.plane)},
         {"cert1", to_json(net.cert1)},
         {"cert2", to_json(net.cert2)},
         {"decomposition", to_json(net.decomposition)}};
  if (net.requested_activation)
    j["requested_activation"] = to_json(*net.requested_activation);
  return j;
}

inline ConstructedNetwork network_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kNetworkSchemaVersion)
    throw std::runtime_error("unsupported network schema_version");
  ConstructedNetwork net;
  net.in_dim = j.at("in_dim").get<std::size_t>();
  net.activation = activation_from_json(j.at("activation"));
  net.layer1 = layer_from_json(j.at("layer1"));
  net.layer2 = layer_from_json(j.at("layer2"));
  net.plane = plane_from_json(j.at("output_plane"));
  net.cert1 = certificate_from_json(j.at("cert1"));
  net.cert2 = certificate_from_json(j.at("cert2"));
  net.decomposition = decomposition_from_json(j.at("decomposition"));
  if (j.contains("requested_activation"))
    net.requested_activation = activation_from_json(j.at("requested_activation"));
  return net;
}

inline json to_json(const SeparationReport& r) {
  return {{"all_correct", r.all_correct},
          {"misclassified", r.misclassified},
          {"final_hull_distance", r.final_hull_distance},
          {"epsilon_1", r.epsilon_1},
          {"epsilon_2", r.epsilon_2},
          {"delta_used_1", r.delta_used_1},
          {"delta_used_2", r.delta_used_2}};
}

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

}  // namespace hullnet
