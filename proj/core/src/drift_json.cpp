#include <json.hpp>
#include <set>
#include <stdexcept>
#include <string>

#include "sdde/drift.hpp"

namespace sdde {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw std::invalid_argument("drift_from_json: unknown key '" + it.key() + "' in " + where);
}

double num(const json& obj, const char* key) {
  if (!obj.contains(key))
    throw std::invalid_argument(std::string("drift_from_json: missing key '") + key + "'");
  if (!obj[key].is_number())
    throw std::invalid_argument(std::string("drift_from_json: key '") + key +
                                "' must be a number");
  return obj[key].get<double>();
}

std::size_t count(const json& obj, const char* key) {
  const double v = num(obj, key);
  if (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw std::invalid_argument(std::string("drift_from_json: key '") + key +
                                "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

DriftSpec drift_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("drift_from_json: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("drift_from_json: root must be an object");
  reject_unknown(doc, {"components"}, "root");
  if (!doc.contains("components") || !doc["components"].is_array())
    throw std::invalid_argument("drift_from_json: 'components' array required");

  DriftSpec spec;
  for (const auto& item : doc["components"]) {
    if (!item.is_object())
      throw std::invalid_argument("drift_from_json: component entries must be objects");
    if (!item.contains("kind") || !item["kind"].is_string())
      throw std::invalid_argument("drift_from_json: component needs a string 'kind'");
    const std::string kind = item["kind"].get<std::string>();
    if (kind == "step") {
      reject_unknown(item, {"kind", "height", "a", "b"}, "step component");
      spec.comps.push_back(drift_step(num(item, "height"), num(item, "a"), num(item, "b")));
    } else if (kind == "comb") {
      reject_unknown(item, {"kind", "height", "a", "b", "teeth"}, "comb component");
      spec.comps.push_back(
          drift_comb(num(item, "height"), num(item, "a"), num(item, "b"), count(item, "teeth")));
    } else if (kind == "gaussian") {
      reject_unknown(item, {"kind", "amp", "center", "width", "radius"}, "gaussian component");
      spec.comps.push_back(drift_gaussian_bump(num(item, "amp"), num(item, "center"),
                                               num(item, "width"), num(item, "radius")));
    } else if (kind == "admissible_step") {
      reject_unknown(item, {"kind", "j", "r", "delta_H", "C", "w", "margin", "a", "b"},
                     "admissible_step component");
      spec.comps.push_back(drift_admissible_step(count(item, "j"), num(item, "r"),
                                                 num(item, "delta_H"), num(item, "C"),
                                                 num(item, "w"), num(item, "margin"),
                                                 num(item, "a"), num(item, "b")));
    } else {
      throw std::invalid_argument("drift_from_json: unknown kind '" + kind + "'");
    }
  }
  spec.validate();
  return spec;
}

}  // namespace sdde
