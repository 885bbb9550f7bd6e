#include "familiar/sensor_value.hpp"

namespace familiar {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string SensorValue::to_display() const {
  return std::visit(
      overloaded{
          [](std::monostate) { return std::string("none"); },
          [](bool b) { return std::string(b ? "true" : "false"); },
          [](const Label& l) { return l.token; },
          [](double d) { return nlohmann::json(d).dump(); },
          [](const Text& t) { return t.value; },
      },
      v_);
}

nlohmann::json to_json_value(const SensorValue& value) {
  return std::visit(
      overloaded{
          [](std::monostate) { return nlohmann::json(nullptr); },
          [](bool b) { return nlohmann::json(b); },
          [](const Label& l) { return nlohmann::json(l.token); },
          [](double d) { return nlohmann::json(d); },
          [](const Text& t) { return nlohmann::json{{"text", t.value}}; },
      },
      value.storage());
}

bool from_json_value(const nlohmann::json& j, SensorValue& out) {
  if (j.is_null()) {
    out = SensorValue::none();
  } else if (j.is_boolean()) {
    out = SensorValue(j.get<bool>());
  } else if (j.is_number()) {
    out = SensorValue(j.get<double>());
  } else if (j.is_string()) {
    out = SensorValue::label(j.get<std::string>());
  } else if (j.is_object() && j.size() == 1 && j.contains("text") && j["text"].is_string()) {
    out = SensorValue::text(j["text"].get<std::string>());
  } else {
    return false;
  }
  return true;
}

}  // namespace familiar
