#include "icutl/vocabulary.hpp"

namespace icutl {
namespace {

struct ItemInfo {
  std::string_view name;
  std::string_view unit;
  std::array<std::string_view, 2> categories;
};

// oxygen_saturation is the one item filed under two categories.
constexpr ItemInfo kItems[] = {
    {"diastolic_bp", "mmHg", {"Vitals", ""}},
    {"systolic_bp", "mmHg", {"Vitals", ""}},
    {"mean_bp", "mmHg", {"Vitals", ""}},
    {"gcs_total", "points", {"Vitals", ""}},
    {"heart_rate", "bpm", {"Vitals", ""}},
    {"respiratory_rate", "insp/min", {"Vitals", ""}},
    {"temperature", "degC", {"Vitals", ""}},
    {"weight", "kg", {"Vitals", ""}},
    {"oxygen_saturation", "%", {"Vitals", "Respiratory"}},
    {"fio2", "fraction", {"Respiratory", ""}},
    {"ph", "units", {"Blood Gases", ""}},
    {"lactate", "mmol/L", {"Blood Gases", ""}},
    {"anion_gap", "mEq/L", {"Chemistry", ""}},
    {"bicarbonate", "mEq/L", {"Chemistry", ""}},
    {"bun", "mg/dL", {"Chemistry", ""}},
    {"chloride", "mEq/L", {"Chemistry", ""}},
    {"creatinine", "mg/dL", {"Chemistry", ""}},
    {"glucose", "mg/dL", {"Chemistry", ""}},
    {"magnesium", "mg/dL", {"Chemistry", ""}},
    {"phosphate", "mg/dL", {"Chemistry", ""}},
    {"potassium", "mEq/L", {"Chemistry", ""}},
    {"sodium", "mEq/L", {"Chemistry", ""}},
    {"wbc", "K/uL", {"Hematology", ""}},
    {"hematocrit", "%", {"Hematology", ""}},
    {"hemoglobin", "g/dL", {"Hematology", ""}},
    {"platelets", "K/uL", {"Hematology", ""}},
    {"inr", "ratio", {"Hematology", ""}},
    {"ptt", "sec", {"Hematology", ""}},
    {"prothrombin_time", "sec", {"Hematology", ""}},
};

const ItemInfo* find_item(std::string_view name) {
  for (const auto& item : kItems) {
    if (item.name == name) return &item;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string_view> categories_for_item(std::string_view item) {
  std::vector<std::string_view> out;
  if (const auto* info = find_item(item)) {
    for (auto c : info->categories) {
      if (!c.empty()) out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string_view> known_series_names() {
  std::vector<std::string_view> out;
  for (const auto& item : kItems) out.push_back(item.name);
  return out;
}

std::string_view default_unit(std::string_view item) {
  const auto* info = find_item(item);
  return info ? info->unit : std::string_view{};
}

}  // namespace icutl
