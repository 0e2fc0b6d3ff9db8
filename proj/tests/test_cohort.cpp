#include <doctest.h>

#include <algorithm>

#include "icutl/cohort.hpp"
#include "icutl/error.hpp"
#include "icutl/rng.hpp"
#include "support.hpp"

using namespace icutl;
using namespace icutl::cohort;

TEST_CASE("age at admission") {
  const auto dob = make_timestamp(2100, 1, 1);
  CHECK(age_at_admission(dob, make_timestamp(2150, 1, 1)) ==
        doctest::Approx(50.0).epsilon(1e-3));
  // De-identification shifts put some ages near 300.
  CHECK(age_at_admission(make_timestamp(1850, 1, 1), make_timestamp(2150, 6, 1)) == 90.0);
  CHECK_THROWS_AS(age_at_admission(make_timestamp(2150, 1, 2), make_timestamp(2150, 1, 1)), Error);
  CHECK(age_at_admission(dob, dob) == 0.0);
}

TEST_CASE("length of stay in days") {
  Admission a;
  a.admittime = make_timestamp(2150, 1, 1);
  a.dischtime = make_timestamp(2150, 1, 3, 12);
  CHECK(length_of_stay_days(a) == 2.5);
}

TEST_CASE("filters on the fixture") {
  const auto store = Datastore::ingest(testing::fixture_dir());
  FilterSpec none;
  CHECK(apply_filters(store, none) == std::vector<AdmissionId>{10, 20, 21, 30});

  FilterSpec died;
  died.died_in_hospital = true;
  CHECK(apply_filters(store, died) == std::vector<AdmissionId>{10});

  FilterSpec icd;
  icd.primary_icd9 = std::set<std::string>{"038", "486"};
  CHECK(apply_filters(store, icd) == std::vector<AdmissionId>{10, 21});

  FilterSpec secondary_only;
  secondary_only.primary_icd9 = std::set<std::string>{"4280"};
  CHECK(apply_filters(store, secondary_only).empty());

  FilterSpec vent;
  vent.intervention_labels = std::set<std::string>{"ventilation"};
  CHECK(apply_filters(store, vent) == std::vector<AdmissionId>{10});

  FilterSpec surg;
  surg.services = std::set<std::string>{"SURG"};
  CHECK(apply_filters(store, surg) == std::vector<AdmissionId>{10});

  FilterSpec women;
  women.gender = Gender::kFemale;
  CHECK(apply_filters(store, women) == std::vector<AdmissionId>{10, 30});

  FilterSpec old;
  old.age_range = Range{85, 200};
  CHECK(apply_filters(store, old) == std::vector<AdmissionId>{30});

  FilterSpec los;
  los.los_range = Range{2, 4.5};
  CHECK(apply_filters(store, los) == std::vector<AdmissionId>{10, 20});
}

TEST_CASE("inverted ranges are rejected") {
  const auto store = Datastore::ingest(testing::fixture_dir());
  FilterSpec bad;
  bad.los_range = Range{5, 2};
  try {
    apply_filters(store, bad);
    FAIL("expected InvalidRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidRange);
  }
  FilterSpec bad_age;
  bad_age.age_range = Range{60, 40};
  CHECK_THROWS_AS(bad_age.validate(), Error);
}

namespace {

// Independent re-statement of the filter semantics over raw tables.
bool naive_match(const Datastore& store, const Admission& a, const FilterSpec& spec) {
  const Patient* p = nullptr;
  for (const auto& q : store.patients()) {
    if (q.subject_id == a.subject_id) p = &q;
  }
  if (spec.gender && p->gender != *spec.gender) return false;
  if (spec.died_in_hospital && a.deathtime.has_value() != *spec.died_in_hospital) return false;
  if (spec.age_range) {
    double age = static_cast<double>(a.admittime.seconds - p->dob.seconds) / 86400.0 / 365.25;
    if (age > 120.0) age = 90.0;
    if (age < spec.age_range->min || age > spec.age_range->max) return false;
  }
  if (spec.los_range) {
    const double los = static_cast<double>(a.dischtime.seconds - a.admittime.seconds) / 86400.0;
    if (los < spec.los_range->min || los > spec.los_range->max) return false;
  }
  if (spec.primary_icd9) {
    bool hit = false;
    for (const auto& d : store.diagnoses()) {
      if (d.hadm_id != a.hadm_id || d.seq_num != 1) continue;
      for (const auto& prefix : *spec.primary_icd9) hit |= d.icd9_code.rfind(prefix, 0) == 0;
    }
    if (!hit) return false;
  }
  if (spec.intervention_labels) {
    bool hit = false;
    for (const auto& s : store.icustays()) {
      if (s.hadm_id != a.hadm_id) continue;
      for (const auto& e : store.interval_events()) {
        if (e.kind == IntervalKind::kIntervention && e.scope_id == s.icustay_id &&
            spec.intervention_labels->count(e.label)) {
          hit = true;
        }
      }
    }
    if (!hit) return false;
  }
  if (spec.services) {
    bool hit = false;
    for (const auto& e : store.interval_events()) {
      if (e.kind == IntervalKind::kService && e.scope_id == a.hadm_id && spec.services->count(e.label)) {
        hit = true;
      }
    }
    if (!hit) return false;
  }
  return true;
}

FilterSpec random_spec(Rng& rng) {
  FilterSpec s;
  const std::vector<std::string> icd = {"038", "486", "428", "41", "5", "0389", "999"};
  const std::vector<std::string> services = {"MED", "SURG", "CMED", "CSURG", "NSURG", "TRAUM"};
  if (rng.bernoulli(0.3)) {
    std::set<std::string> codes;
    for (int i = 0, n = 1 + static_cast<int>(rng.below(2)); i < n; ++i) codes.insert(icd[rng.below(icd.size())]);
    s.primary_icd9 = codes;
  }
  if (rng.bernoulli(0.3)) {
    s.intervention_labels = rng.bernoulli(0.5) ? std::set<std::string>{"ventilation"}
                                               : std::set<std::string>{"vasopressor", "ventilation"};
  }
  if (rng.bernoulli(0.3)) s.services = std::set<std::string>{services[rng.below(services.size())]};
  if (rng.bernoulli(0.4)) {
    const double lo = rng.uniform(0, 90);
    s.age_range = Range{lo, lo + rng.uniform(0, 40)};
  }
  if (rng.bernoulli(0.4)) s.gender = rng.bernoulli(0.5) ? Gender::kFemale : Gender::kMale;
  if (rng.bernoulli(0.4)) {
    const double lo = rng.uniform(0, 8);
    s.los_range = Range{lo, lo + rng.uniform(0, 8)};
  }
  if (rng.bernoulli(0.4)) s.died_in_hospital = rng.bernoulli(0.5);
  return s;
}

}  // namespace

TEST_CASE("apply_filters equals a naive scan on random specs") {
  const auto& store = testing::small_synthetic();
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto spec = random_spec(rng);
    std::vector<AdmissionId> expected;
    for (const auto& a : store.admissions()) {
      if (naive_match(store, a, spec)) expected.push_back(a.hadm_id);
    }
    std::sort(expected.begin(), expected.end());
    CHECK(apply_filters(store, spec) == expected);
  }
}
