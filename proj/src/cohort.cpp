#include "icutl/cohort.hpp"

#include <algorithm>

#include "icutl/error.hpp"

namespace icutl::cohort {

double age_at_admission(Timestamp dob, Timestamp admittime) {
  if (admittime < dob) {
    throw Error(ErrorCode::kNegativeAge, "admittime " + format_timestamp(admittime) +
                                             " precedes dob " + format_timestamp(dob));
  }
  const double years = days_between(dob, admittime) / 365.25;
  return years > kAgeArtifactYears ? kAgeCapYears : years;
}

double length_of_stay_days(const Admission& a) { return days_between(a.admittime, a.dischtime); }

void FilterSpec::validate() const {
  if (age_range && age_range->min > age_range->max) {
    throw Error(ErrorCode::kInvalidRange, "age_range min > max");
  }
  if (los_range && los_range->min > los_range->max) {
    throw Error(ErrorCode::kInvalidRange, "los_range min > max");
  }
}

namespace {

bool in_range(double v, const Range& r) { return r.min <= v && v <= r.max; }

bool primary_matches(const Datastore& store, AdmissionId hadm,
                     const std::set<std::string>& prefixes) {
  for (const auto& d : store.diagnoses_for_admission(hadm)) {
    if (d.seq_num != 1) continue;
    for (const auto& prefix : prefixes) {
      if (d.icd9_code.starts_with(prefix)) return true;
    }
  }
  return false;
}

bool any_label_in(std::span<const IntervalEvent> events, const std::set<std::string>& labels) {
  return std::any_of(events.begin(), events.end(),
                     [&](const IntervalEvent& e) { return labels.count(e.label) > 0; });
}

}  // namespace

bool matches(const Datastore& store, const Admission& a, const FilterSpec& spec) {
  if (spec.died_in_hospital && a.deathtime.has_value() != *spec.died_in_hospital) return false;
  if (spec.los_range && !in_range(length_of_stay_days(a), *spec.los_range)) return false;
  if (spec.gender || spec.age_range) {
    const auto* patient = store.find_patient(a.subject_id);
    if (!patient) return false;
    if (spec.gender && patient->gender != *spec.gender) return false;
    if (spec.age_range &&
        !in_range(age_at_admission(patient->dob, a.admittime), *spec.age_range)) {
      return false;
    }
  }
  if (spec.primary_icd9 && !primary_matches(store, a.hadm_id, *spec.primary_icd9)) return false;
  if (spec.services &&
      !any_label_in(store.intervals_for_scope(IntervalKind::kService, a.hadm_id), *spec.services)) {
    return false;
  }
  if (spec.intervention_labels) {
    bool found = false;
    for (const auto& stay : store.stays_for_admission(a.hadm_id)) {
      if (any_label_in(store.intervals_for_scope(IntervalKind::kIntervention, stay.icustay_id),
                       *spec.intervention_labels)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::vector<AdmissionId> apply_filters(const Datastore& store, const FilterSpec& spec) {
  spec.validate();
  std::vector<AdmissionId> out;
  // admissions() is sorted by hadm_id.
  for (const auto& a : store.admissions()) {
    if (matches(store, a, spec)) out.push_back(a.hadm_id);
  }
  return out;
}

}  // namespace icutl::cohort
