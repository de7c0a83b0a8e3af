#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ctree/alarm.hpp"
#include "ctree/detail/format.hpp"

namespace ctree {

// File layout:
//   {"alarms": [{"id": 0, "trigger_prob": 0.600000000000, "deadline": 3}, ...]}
// Probabilities are written with at least 12 significant digits and always
// round-trip exactly.

inline std::string alarms_to_json(const AlarmSet& set) {
  std::string out = "{\n  \"alarms\": [";
  bool first = true;
  for (const AlarmSource& a : set) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"id\": " + std::to_string(a.id) +
           ", \"trigger_prob\": " + detail::format_real(a.trigger_prob);
    if (a.deadline) out += ", \"deadline\": " + std::to_string(*a.deadline);
    out += "}";
  }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline AlarmSet alarms_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("alarm file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("alarms"))
    throw ParseError("alarm file: missing field 'alarms'");
  const auto& list = doc["alarms"];
  if (!list.is_array()) throw ParseError("alarm file: field 'alarms' is not an array");

  std::vector<AlarmSource> alarms;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& rec = list[i];
    const std::string where = "alarms[" + std::to_string(i) + "]";
    if (!rec.is_object()) throw ParseError(where + ": expected an object");
    if (!rec.contains("id") || !rec["id"].is_number_integer())
      throw ParseError(where + ".id: expected an integer");
    if (!rec.contains("trigger_prob") || !rec["trigger_prob"].is_number())
      throw ParseError(where + ".trigger_prob: expected a number");
    AlarmSource a;
    a.id = rec["id"].get<AlarmId>();
    a.trigger_prob = rec["trigger_prob"].get<double>();
    if (rec.contains("deadline") && !rec["deadline"].is_null()) {
      if (!rec["deadline"].is_number_integer())
        throw ParseError(where + ".deadline: expected an integer");
      a.deadline = rec["deadline"].get<int>();
    }
    alarms.push_back(a);
  }
  return AlarmSet(std::move(alarms));
}

inline void save_alarms(const AlarmSet& set, const std::string& path) {
  detail::write_file(path, alarms_to_json(set));
}

inline AlarmSet load_alarms(const std::string& path) {
  return alarms_from_json(detail::read_file(path));
}

}  // namespace ctree
