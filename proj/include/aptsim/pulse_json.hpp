#pragma once

// JSON form of a pulse sequence: an array of objects
//   {"kind": "rotation", "axis": "y", "angle": -1.57...}
//   {"kind": "hold_hm", "j": 0.06, "gamma": 0.03, "duration": 10}
//   {"kind": "hold_dissipation", "gamma": 0.05, "duration": 5}
//   {"kind": "hold_rabi", "j": 0.06, "duration": 20}
// Doubles are written by nlohmann::json with shortest round-trip precision.

#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "aptsim/errors.hpp"
#include "aptsim/pulse.hpp"

namespace aptsim {

inline nlohmann::json to_json(const PulseSequence& seq) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& seg : seq.segments()) {
    arr.push_back(std::visit(
        [](const auto& s) -> nlohmann::json {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Rotation>) {
            return {{"kind", "rotation"}, {"axis", to_string(s.axis)}, {"angle", s.angle}};
          } else if constexpr (std::is_same_v<T, HoldHm>) {
            return {{"kind", "hold_hm"},
                    {"j", s.params.j},
                    {"gamma", s.params.gamma},
                    {"duration", s.duration}};
          } else if constexpr (std::is_same_v<T, HoldDissipation>) {
            return {{"kind", "hold_dissipation"}, {"gamma", s.gamma}, {"duration", s.duration}};
          } else {
            return {{"kind", "hold_rabi"}, {"j", s.j}, {"duration", s.duration}};
          }
        },
        seg));
  }
  return arr;
}

namespace detail {

inline double required_number(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw InvalidParams(std::string("pulse segment missing numeric field '") + key + "'");
  }
  return it->get<double>();
}

inline Axis parse_axis(const nlohmann::json& obj) {
  auto it = obj.find("axis");
  if (it == obj.end() || !it->is_string()) throw InvalidParams("rotation missing 'axis'");
  const auto s = it->get<std::string>();
  if (s == "x") return Axis::kX;
  if (s == "y") return Axis::kY;
  if (s == "z") return Axis::kZ;
  throw InvalidParams("unknown rotation axis '" + s + "'");
}

}  // namespace detail

inline PulseSequence pulse_sequence_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw InvalidParams("pulse sequence must be a JSON array");
  std::vector<PulseSegment> segs;
  for (const auto& obj : arr) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
      throw InvalidParams("pulse segment must be an object with a 'kind'");
    }
    const auto kind = obj["kind"].get<std::string>();
    if (kind == "rotation") {
      segs.emplace_back(Rotation{detail::parse_axis(obj), detail::required_number(obj, "angle")});
    } else if (kind == "hold_hm") {
      segs.emplace_back(HoldHm{SystemParams::make(detail::required_number(obj, "j"),
                                                  detail::required_number(obj, "gamma")),
                               detail::required_number(obj, "duration")});
    } else if (kind == "hold_dissipation") {
      segs.emplace_back(HoldDissipation{detail::required_number(obj, "gamma"),
                                        detail::required_number(obj, "duration")});
    } else if (kind == "hold_rabi") {
      segs.emplace_back(
          HoldRabi{detail::required_number(obj, "j"), detail::required_number(obj, "duration")});
    } else {
      throw InvalidParams("unknown pulse segment kind '" + kind + "'");
    }
  }
  return PulseSequence(std::move(segs));
}

}  // namespace aptsim
