#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

namespace familiar {

/// Symbolic token (an intent name, a region name). Distinct from free text so
/// that `label("kitchen") != text("kitchen")`.
struct Label {
  std::string token;
  bool operator==(const Label&) const = default;
};

struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};

/// Value carried by a world-state entry or a semantic sensor.
///
/// Equality across alternatives is always false and never throws, so a
/// precondition comparing a label against a number simply does not hold.
class SensorValue {
 public:
  using Storage = std::variant<std::monostate, bool, Label, double, Text>;

  SensorValue() = default;
  SensorValue(bool flag) : v_(flag) {}
  SensorValue(double number) : v_(number) {}
  SensorValue(int number) : v_(static_cast<double>(number)) {}
  SensorValue(Label label) : v_(std::move(label)) {}
  SensorValue(Text text) : v_(std::move(text)) {}

  static SensorValue none() { return {}; }
  static SensorValue label(std::string token) { return Label{std::move(token)}; }
  static SensorValue text(std::string s) { return Text{std::move(s)}; }

  bool is_none() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_flag() const { return std::holds_alternative<bool>(v_); }
  bool is_label() const { return std::holds_alternative<Label>(v_); }
  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_text() const { return std::holds_alternative<Text>(v_); }

  bool flag() const { return std::get<bool>(v_); }
  double number() const { return std::get<double>(v_); }
  const std::string& label_token() const { return std::get<Label>(v_).token; }
  const std::string& text_value() const { return std::get<Text>(v_).value; }

  const Storage& storage() const { return v_; }

  /// Human-readable rendering: labels and text verbatim, numbers shortest form.
  std::string to_display() const;

  bool operator==(const SensorValue&) const = default;

 private:
  Storage v_;
};

/// JSON encoding used by the config file and the wire protocol:
/// null ↔ none, bool ↔ flag, number ↔ number, string ↔ label,
/// {"text": "..."} ↔ text.
nlohmann::json to_json_value(const SensorValue& value);

/// Returns false (leaving `out` untouched) when `j` is not a valid encoding.
bool from_json_value(const nlohmann::json& j, SensorValue& out);

}  // namespace familiar
