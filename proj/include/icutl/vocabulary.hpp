#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace icutl {

// The 29 model features, vitals first then labs, in the fixed order used for
// every feature vector (window-major: window k occupies slots 29k..29k+28).
inline constexpr std::array<std::string_view, 29> kFeatureNames = {
    // vitals
    "diastolic_bp", "systolic_bp", "mean_bp", "gcs_total", "heart_rate", "respiratory_rate",
    "temperature", "weight", "wbc", "ph",
    // labs
    "anion_gap", "bicarbonate", "bun", "chloride", "creatinine", "fio2", "glucose",
    "hematocrit", "hemoglobin", "inr", "lactate", "magnesium", "oxygen_saturation", "ptt",
    "phosphate", "platelets", "potassium", "prothrombin_time", "sodium"};

inline constexpr std::size_t kNumFeatures = kFeatureNames.size();

// Display order of the series-selection categories; "Other" catches any
// item missing from the category table.
inline constexpr std::array<std::string_view, 6> kSeriesCategories = {
    "Blood Gases", "Chemistry", "Hematology", "Vitals", "Respiratory", "Other"};

// Categories of a known item; empty for items outside the table.
std::vector<std::string_view> categories_for_item(std::string_view item);

// Every item name in the category table.
std::vector<std::string_view> known_series_names();

// Display unit for a known item (used when a series has no data).
std::string_view default_unit(std::string_view item);

}  // namespace icutl
