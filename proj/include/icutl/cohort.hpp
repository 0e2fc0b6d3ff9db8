#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "icutl/datastore.hpp"

namespace icutl::cohort {

// Ages above this at admission are de-identification artifacts...
inline constexpr double kAgeArtifactYears = 120.0;
// ...and are reported as this value.
inline constexpr double kAgeCapYears = 90.0;

// (admittime - dob) in days / 365.25, with artifact ages capped.
// Throws NegativeAge if admittime precedes dob.
double age_at_admission(Timestamp dob, Timestamp admittime);

double length_of_stay_days(const Admission& a);

struct Range {
  double min;
  double max;
};

// Conjunctive admission filter; an unset field places no constraint.
struct FilterSpec {
  std::optional<std::set<std::string>> primary_icd9;  // code prefixes
  std::optional<std::set<std::string>> intervention_labels;
  std::optional<std::set<std::string>> services;
  std::optional<Range> age_range;
  std::optional<Gender> gender;
  std::optional<Range> los_range;  // days
  std::optional<bool> died_in_hospital;

  // Throws InvalidRange if a range has min > max.
  void validate() const;
};

// Admissions satisfying every present constraint, ascending by hadm_id.
std::vector<AdmissionId> apply_filters(const Datastore& store, const FilterSpec& spec);

// Single-admission predicate used by apply_filters.
bool matches(const Datastore& store, const Admission& admission, const FilterSpec& spec);

}  // namespace icutl::cohort
