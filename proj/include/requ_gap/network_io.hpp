#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "requ_gap/errors.hpp"
#include "requ_gap/network.hpp"

namespace requ_gap {

/// {input_dim, layers: [{rows, cols, entries: [[i, j, v]...], bias: [[i, v]...]}]}
/// with 0-based indices. Doubles are written in shortest round-trip form.
inline nlohmann::json to_json(const NeuralNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : layer.weights.entries()) entries.push_back({e.row, e.col, e.value});
    nlohmann::json bias = nlohmann::json::array();
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      if (layer.bias[i] != 0.0) bias.push_back({i, layer.bias[i]});
    }
    layers.push_back({{"rows", layer.weights.rows()},
                      {"cols", layer.weights.cols()},
                      {"entries", std::move(entries)},
                      {"bias", std::move(bias)}});
  }
  return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

inline std::string serialize(const NeuralNetwork& net) { return to_json(net).dump(); }

inline void serialize(const NeuralNetwork& net, std::ostream& out) { out << serialize(net); }

namespace detail {

inline std::size_t json_index(const nlohmann::json& v, std::size_t layer, const char* what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw FormatError(std::string("layer ") + std::to_string(layer) + ": " + what + " must be a non-negative integer",
                      std::nullopt, layer);
  }
  return v.get<std::size_t>();
}

inline double json_value(const nlohmann::json& v, std::size_t layer) {
  if (!v.is_number()) {
    throw FormatError("layer " + std::to_string(layer) + ": value must be a number", std::nullopt, layer);
  }
  return v.get<double>();
}

}  // namespace detail

inline NeuralNetwork from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw FormatError("network document needs a 'layers' array", std::nullopt);
  }
  const auto& jl = doc["layers"];
  if (jl.empty()) throw FormatError("network has no layers", std::nullopt);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < jl.size(); ++k) {
    const auto& l = jl[k];
    if (!l.is_object() || !l.contains("rows") || !l.contains("cols") || !l.contains("entries") ||
        !l["entries"].is_array()) {
      throw FormatError("layer " + std::to_string(k) + ": needs rows, cols and entries", std::nullopt, k);
    }
    const std::size_t rows = detail::json_index(l["rows"], k, "rows");
    const std::size_t cols = detail::json_index(l["cols"], k, "cols");
    std::vector<MatrixEntry> entries;
    for (const auto& e : l["entries"]) {
      if (!e.is_array() || e.size() != 3) {
        throw FormatError("layer " + std::to_string(k) + ": entry must be [i, j, value]", std::nullopt, k);
      }
      entries.push_back({detail::json_index(e[0], k, "row index"), detail::json_index(e[1], k, "column index"),
                         detail::json_value(e[2], k)});
    }
    std::vector<double> bias(rows, 0.0);
    if (l.contains("bias")) {
      if (!l["bias"].is_array()) throw FormatError("layer " + std::to_string(k) + ": bias must be an array", std::nullopt, k);
      for (const auto& b : l["bias"]) {
        if (!b.is_array() || b.size() != 2) {
          throw FormatError("layer " + std::to_string(k) + ": bias entry must be [i, value]", std::nullopt, k);
        }
        const std::size_t i = detail::json_index(b[0], k, "bias index");
        if (i >= rows) throw FormatError("layer " + std::to_string(k) + ": bias index out of range", std::nullopt, k);
        bias[i] = detail::json_value(b[1], k);
      }
    }
    if (k > 0 && cols != layers.back().weights.rows()) {
      throw FormatError("layer " + std::to_string(k) + ": cols " + std::to_string(cols) + " does not match rows " +
                            std::to_string(layers.back().weights.rows()) + " of layer " + std::to_string(k - 1),
                        std::nullopt, k);
    }
    try {
      layers.push_back({SparseMatrix(rows, cols, std::move(entries)), std::move(bias)});
    } catch (const std::exception& ex) {
      throw FormatError("layer " + std::to_string(k) + ": " + ex.what(), std::nullopt, k);
    }
  }
  if (doc.contains("input_dim")) {
    const std::size_t d = detail::json_index(doc["input_dim"], 0, "input_dim");
    if (d != layers.front().weights.cols()) {
      throw FormatError("layer 0: cols do not match input_dim", std::nullopt, 0);
    }
  }
  try {
    return NeuralNetwork(std::move(layers));
  } catch (const std::exception& ex) {
    throw FormatError(ex.what(), std::nullopt);
  }
}

inline NeuralNetwork deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw FormatError(std::string("malformed network stream: ") + ex.what(), ex.byte);
  }
  return from_json(doc);
}

inline NeuralNetwork deserialize(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace requ_gap
