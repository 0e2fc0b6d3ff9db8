#include "icutl/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "icutl/csv.hpp"
#include "icutl/error.hpp"
#include "icutl/vocabulary.hpp"

namespace icutl::synth {
namespace {

enum class Source { kChartHourly, kChart4h, kChartDaily, kLab };

// value = baseline + coefficient * signal_strength * severity + noise * N(0,1),
// clipped to [lo, hi] and rounded to `decimals`.
struct FeatureModel {
  std::string_view name;
  double baseline;
  double coefficient;
  double noise;
  double lo;
  double hi;
  int decimals;
  Source source;
};

// Same order as kFeatureNames. Features with coefficient 0 carry no signal.
constexpr std::array<FeatureModel, kNumFeatures> kModels = {{
    {"diastolic_bp", 62, -5.0, 8, 20, 140, 0, Source::kChartHourly},
    {"systolic_bp", 120, -9.0, 12, 50, 220, 0, Source::kChartHourly},
    {"mean_bp", 80, -6.0, 9, 30, 160, 0, Source::kChartHourly},
    {"gcs_total", 13, -1.6, 1.5, 3, 15, 0, Source::kChart4h},
    {"heart_rate", 88, 8.0, 10, 30, 200, 0, Source::kChartHourly},
    {"respiratory_rate", 19, 3.0, 4, 4, 50, 0, Source::kChartHourly},
    {"temperature", 37.0, 0.35, 0.5, 33, 42, 1, Source::kChartHourly},
    {"weight", 80, 0.0, 12, 35, 200, 1, Source::kChartDaily},
    {"wbc", 10, 3.0, 3, 0.2, 80, 1, Source::kLab},
    {"ph", 7.38, -0.04, 0.05, 6.8, 7.7, 2, Source::kLab},
    {"anion_gap", 13, 2.5, 3, 2, 40, 0, Source::kLab},
    {"bicarbonate", 24, -2.5, 3, 5, 45, 0, Source::kLab},
    {"bun", 25, 8.0, 10, 2, 150, 0, Source::kLab},
    {"chloride", 104, 0.0, 4, 80, 130, 0, Source::kLab},
    {"creatinine", 1.2, 0.4, 0.5, 0.2, 12, 1, Source::kLab},
    {"fio2", 0.4, 0.08, 0.1, 0.21, 1.0, 2, Source::kChartHourly},
    {"glucose", 130, 15.0, 35, 30, 600, 0, Source::kLab},
    {"hematocrit", 32, -1.5, 4, 12, 55, 1, Source::kLab},
    {"hemoglobin", 10.5, -0.5, 1.4, 4, 18, 1, Source::kLab},
    {"inr", 1.3, 0.2, 0.3, 0.8, 8, 1, Source::kLab},
    {"lactate", 1.8, 0.9, 0.8, 0.3, 20, 1, Source::kLab},
    {"magnesium", 2.0, 0.0, 0.25, 0.8, 4, 1, Source::kLab},
    {"oxygen_saturation", 97, -1.5, 2, 60, 100, 0, Source::kChartHourly},
    {"ptt", 35, 4.0, 8, 18, 150, 1, Source::kLab},
    {"phosphate", 3.6, 0.4, 0.9, 0.5, 12, 1, Source::kLab},
    {"platelets", 220, -25.0, 70, 5, 900, 0, Source::kLab},
    {"potassium", 4.1, 0.15, 0.5, 2, 7.5, 1, Source::kLab},
    {"prothrombin_time", 14.5, 1.5, 2.5, 9, 60, 1, Source::kLab},
    {"sodium", 139, 0.0, 4, 115, 165, 0, Source::kLab},
}};

// Hourly death hazard sigmoid(alpha + kHazardSlope * running mean severity).
constexpr double kHazardSlope = 2.2;
constexpr double kReadmissionProbability = 0.25;
constexpr int kMinIcuHours = 4;

constexpr std::uint64_t kStreamStructure = 0;
constexpr std::uint64_t kStreamHazard = 1;
constexpr std::uint64_t kStreamMeasure = 2;
constexpr std::uint64_t kCaseStudySeed = 20171128;

struct Diagnosis {
  std::string_view code;
  std::string_view text;
};
constexpr Diagnosis kPrimaryDiagnoses[] = {
    {"486", "PNEUMONIA"},           {"0389", "SEPSIS"},
    {"4280", "CONGESTIVE HEART FAILURE"}, {"41071", "MYOCARDIAL INFARCTION"},
    {"431", "INTRACRANIAL HEMORRHAGE"}, {"5849", "ACUTE RENAL FAILURE"},
    {"51881", "RESPIRATORY FAILURE"}, {"5070", "ASPIRATION PNEUMONIA"},
    {"99859", "POSTOPERATIVE INFECTION"}, {"41401", "CORONARY ARTERY DISEASE"},
};
constexpr std::string_view kSecondaryCodes[] = {"4019", "25000", "42731", "5990", "2859",
                                                "2724", "496",   "40390", "2762", "V5861"};
constexpr std::string_view kCareunits[] = {"MICU", "SICU", "CCU", "CSRU", "TSICU"};
constexpr std::string_view kServices[] = {"MED", "SURG", "CMED", "CSURG", "NMED"};
constexpr std::string_view kNoteCategories[] = {"Nursing", "Physician", "Echo", "Radiology"};

struct PlannedAdmission {
  Timestamp admittime;
  Timestamp intime;
  int icu_hours = 0;  // planned, before any death
  int ward_hours = 0;
  std::vector<double> severity;  // hourly over the planned ICU stay, size icu_hours
  std::vector<double> hazard_draws;
  std::size_t diagnosis = 0;
  std::size_t careunit = 0;
  std::size_t service = 0;
  std::optional<std::size_t> service_change;
  std::vector<std::size_t> secondary;
};

struct PlannedPatient {
  Gender gender = Gender::kMale;
  Timestamp dob;
  bool readmit = false;
  double readmit_gap_days = 0;
  std::array<PlannedAdmission, 2> admissions;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Running-mean severity at hour k, for k = 0..icu_hours-1.
std::vector<double> running_means(const std::vector<double>& severity) {
  std::vector<double> out(severity.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < severity.size(); ++k) {
    sum += severity[k];
    out[k] = sum / static_cast<double>(k + 1);
  }
  return out;
}

// Hours 1..icu_hours-1 carry hazard; death is snapped to the hour.
std::optional<int> death_hour(const PlannedAdmission& a, double alpha) {
  const auto cumulative = running_means(a.severity);
  for (int k = 1; k < a.icu_hours; ++k) {
    if (a.hazard_draws[k] < sigmoid(alpha + kHazardSlope * cumulative[k])) return k;
  }
  return std::nullopt;
}

double death_probability(const PlannedAdmission& a, double alpha) {
  const auto cumulative = running_means(a.severity);
  double survive = 1.0;
  for (int k = 1; k < a.icu_hours; ++k) {
    survive *= 1.0 - sigmoid(alpha + kHazardSlope * cumulative[k]);
  }
  return 1.0 - survive;
}

PlannedAdmission plan_admission(const SynthConfig& cfg, Timestamp admittime, double frailty,
                                Rng& structure, Rng& hazard) {
  PlannedAdmission a;
  a.admittime = admittime;
  a.intime = admittime.plus_seconds(
      static_cast<std::int64_t>(structure.uniform(1.0, 18.0) * 60) * 60);
  a.icu_hours = std::max(kMinIcuHours,
                         static_cast<int>(std::lround(structure.exponential(cfg.mean_icu_los_hours))));
  a.ward_hours = 12 + static_cast<int>(structure.below(109));
  SeverityParams params;
  params.mu = frailty;
  a.severity = severity_trajectory(params, a.icu_hours, structure);
  a.hazard_draws.resize(a.icu_hours);
  for (auto& u : a.hazard_draws) u = hazard.uniform();
  a.diagnosis = structure.below(std::size(kPrimaryDiagnoses));
  a.careunit = structure.below(std::size(kCareunits));
  a.service = structure.below(std::size(kServices));
  if (structure.bernoulli(0.2)) a.service_change = structure.below(std::size(kServices));
  const auto n_secondary = 1 + structure.below(3);
  for (std::uint64_t j = 0; j < n_secondary; ++j) {
    const auto code = structure.below(std::size(kSecondaryCodes));
    if (std::find(a.secondary.begin(), a.secondary.end(), code) == a.secondary.end()) {
      a.secondary.push_back(code);
    }
  }
  return a;
}

PlannedPatient plan_patient(const SynthConfig& cfg, std::int64_t index) {
  const auto base = static_cast<std::uint64_t>(index) * 8;
  Rng structure(cfg.seed, base + kStreamStructure);
  Rng hazard(cfg.seed, base + kStreamHazard);

  PlannedPatient p;
  p.gender = structure.bernoulli(0.45) ? Gender::kFemale : Gender::kMale;
  const int year = 2100 + static_cast<int>(structure.below(100));
  const unsigned month = 1 + static_cast<unsigned>(structure.below(12));
  const unsigned day = 1 + static_cast<unsigned>(structure.below(28));
  const Timestamp admit = make_timestamp(year, month, day, static_cast<unsigned>(structure.below(24)),
                                         static_cast<unsigned>(structure.below(60)));
  // Ages: a few pediatric admissions, a few de-identification artifacts
  // (dob ~300 years earlier), the rest adult.
  const double kind = structure.uniform();
  double age_years;
  if (kind < 0.02) {
    age_years = structure.uniform(1.0, 15.0);
  } else if (kind < 0.05) {
    age_years = 300.0;
  } else {
    age_years = std::clamp(64.0 + 16.0 * structure.normal(), 16.0, 89.0);
  }
  const auto age_days = static_cast<std::int64_t>(age_years * 365.25);
  const std::int64_t dob_day = (admit.seconds / kSecondsPerDay) - age_days;
  p.dob = {dob_day * kSecondsPerDay};

  const double frailty = structure.normal();
  p.readmit = structure.bernoulli(kReadmissionProbability);
  p.readmit_gap_days = structure.uniform(30.0, 900.0);
  p.admissions[0] = plan_admission(cfg, admit, frailty, structure, hazard);
  // The readmission admittime is fixed later from the first discharge.
  p.admissions[1] = plan_admission(cfg, Timestamp{0}, frailty + 0.3, structure, hazard);
  return p;
}

double calibrate_alpha(const std::vector<PlannedPatient>& patients, double target_rate) {
  // Expected deaths over expected admissions, bisected in alpha.
  auto rate = [&](double alpha) {
    double deaths = 0.0, admissions = 0.0;
    for (const auto& p : patients) {
      const double p1 = death_probability(p.admissions[0], alpha);
      const double readmit = p.readmit ? (1.0 - p1) : 0.0;
      deaths += p1 + readmit * death_probability(p.admissions[1], alpha);
      admissions += 1.0 + readmit;
    }
    return deaths / admissions;
  };
  double lo = -30.0, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) < target_rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string id(std::int64_t v) { return std::to_string(v); }
std::string ts(Timestamp t) { return format_timestamp(t); }

std::string_view severity_bucket(double s) {
  if (s < 0.0) return "stable";
  if (s < 1.0) return "guarded";
  return "critical";
}

struct Writers {
  explicit Writers(const std::filesystem::path& dir)
      : patients(dir / "patients.csv"),
        admissions(dir / "admissions.csv"),
        icustays(dir / "icustays.csv"),
        chartevents(dir / "chartevents.csv"),
        labevents(dir / "labevents.csv"),
        noteevents(dir / "noteevents.csv"),
        interventions(dir / "interventions.csv"),
        transfers(dir / "transfers.csv"),
        services(dir / "services.csv"),
        diagnoses(dir / "diagnoses.csv") {
    for (const auto& schema : table_schemas()) {
      std::vector<std::string> header(schema.columns.begin(), schema.columns.end());
      writer_for(schema.file).row(header);
    }
  }

  csv::Writer& writer_for(std::string_view file) {
    if (file == "patients.csv") return patients;
    if (file == "admissions.csv") return admissions;
    if (file == "icustays.csv") return icustays;
    if (file == "chartevents.csv") return chartevents;
    if (file == "labevents.csv") return labevents;
    if (file == "noteevents.csv") return noteevents;
    if (file == "interventions.csv") return interventions;
    if (file == "transfers.csv") return transfers;
    if (file == "services.csv") return services;
    return diagnoses;
  }

  csv::Writer patients, admissions, icustays, chartevents, labevents, noteevents, interventions,
      transfers, services, diagnoses;
  std::map<std::string, std::size_t> counts;

  void count(std::string_view table) { ++counts[std::string(table)]; }
};

// Everything needed to emit one admission's rows.
struct AdmissionPlan {
  SubjectId subject_id;
  AdmissionId hadm_id;
  StayId icustay_id;
  Timestamp admittime;
  Timestamp intime;
  Timestamp outtime;
  Timestamp dischtime;
  std::optional<Timestamp> deathtime;
  std::vector<double> severity;  // hourly over the realized ICU stay
  std::string_view careunit;
  std::string diagnosis_text;
};

// Severity at an absolute time: flat before ICU, last value after it.
double severity_at(const AdmissionPlan& a, Timestamp t) {
  if (a.severity.empty() || t <= a.intime) return a.severity.empty() ? 0.0 : a.severity.front();
  const auto k = static_cast<std::size_t>((t.seconds - a.intime.seconds) / kSecondsPerHour);
  return a.severity[std::min(k, a.severity.size() - 1)];
}

double measure(const FeatureModel& m, double signal, double severity, Rng& rng) {
  const double v = m.baseline + m.coefficient * signal * severity + m.noise * rng.normal();
  return std::clamp(v, m.lo, m.hi);
}

// Hook for fixture-specific value overrides: (feature index, hour, value&).
using ChartOverride = std::function<void(std::size_t, int, double&)>;

void emit_measurements(Writers& w, const AdmissionPlan& a, double signal, Rng& rng,
                       const ChartOverride& override_chart = {}) {
  const int hours = static_cast<int>(a.severity.size());
  for (int k = 0; k < hours; ++k) {
    const auto minute = static_cast<std::int64_t>(rng.below(60));
    const Timestamp t = a.intime.plus_seconds(k * kSecondsPerHour + minute * 60);
    if (t > a.outtime) break;
    for (std::size_t f = 0; f < kModels.size(); ++f) {
      const auto& m = kModels[f];
      const bool due = (m.source == Source::kChartHourly) ||
                       (m.source == Source::kChart4h && k % 4 == 0) ||
                       (m.source == Source::kChartDaily && k % 24 == 0);
      if (!due) continue;
      double v = measure(m, signal, a.severity[k], rng);
      if (override_chart) override_chart(f, k, v);
      w.chartevents.row({id(a.icustay_id), ts(t), m.name, fixed(v, m.decimals),
                         default_unit(m.name)});
      w.count("chartevents");
    }
  }
  // Lab panels every 4-12 h across the whole admission.
  Timestamp t = a.admittime.plus_seconds(static_cast<std::int64_t>(rng.uniform(0.0, 2.0) * 3600));
  while (t <= a.dischtime) {
    const double s = severity_at(a, t);
    for (const auto& m : kModels) {
      if (m.source != Source::kLab) continue;
      const double v = measure(m, signal, s, rng);
      w.labevents.row({id(a.hadm_id), ts(t), m.name, fixed(v, m.decimals), default_unit(m.name),
                       "Blood"});
      w.count("labevents");
    }
    t = t.plus_seconds(static_cast<std::int64_t>(rng.uniform(4.0, 12.0) * 3600));
  }
}

void emit_notes(Writers& w, const AdmissionPlan& a, double rate_per_day, Rng& rng) {
  if (rate_per_day <= 0.0) return;
  const double mean_gap_hours = 24.0 / rate_per_day;
  Timestamp t = a.admittime.plus_seconds(
      static_cast<std::int64_t>(rng.exponential(mean_gap_hours) * 3600));
  while (t <= a.dischtime) {
    const double u = rng.uniform();
    const auto category = u < 0.5 ? kNoteCategories[0]
                          : u < 0.8 ? kNoteCategories[1]
                          : u < 0.9 ? kNoteCategories[2]
                                    : kNoteCategories[3];
    std::string text = std::string(category) + " note. Patient condition " +
                       std::string(severity_bucket(severity_at(a, t))) + ". " + a.diagnosis_text +
                       ", plan reviewed with team.";
    w.noteevents.row({id(a.hadm_id), ts(t), category, text});
    w.count("noteevents");
    t = t.plus_seconds(static_cast<std::int64_t>(rng.exponential(mean_gap_hours) * 3600) + 60);
  }
}

// Interventions start when severity crosses `on` and stop below `off`.
void emit_threshold_interventions(Writers& w, const AdmissionPlan& a) {
  struct Rule {
    std::string_view label;
    double on;
    double off;
  };
  constexpr Rule rules[] = {{"ventilation", 0.8, 0.4}, {"vasopressor", 1.3, 0.9}};
  for (const auto& rule : rules) {
    std::optional<int> start;
    const int hours = static_cast<int>(a.severity.size());
    for (int k = 0; k <= hours; ++k) {
      const bool end_of_stay = (k == hours);
      if (!start && !end_of_stay && a.severity[k] > rule.on) start = k;
      if (start && (end_of_stay || a.severity[k] < rule.off)) {
        const Timestamp from = a.intime.plus_seconds(*start * kSecondsPerHour);
        const Timestamp to = end_of_stay ? a.outtime : a.intime.plus_seconds(k * kSecondsPerHour);
        w.interventions.row({id(a.icustay_id), rule.label, ts(from), ts(to)});
        w.count("interventions");
        start.reset();
      }
    }
  }
}

void emit_core_rows(Writers& w, const AdmissionPlan& a, std::string_view primary_code,
                    const std::vector<std::string_view>& secondary, std::string_view service,
                    std::optional<std::string_view> service_change) {
  w.admissions.row({id(a.hadm_id), id(a.subject_id), ts(a.admittime), ts(a.dischtime),
                    a.deathtime ? ts(*a.deathtime) : std::string(), a.diagnosis_text});
  w.count("admissions");
  w.icustays.row(
      {id(a.icustay_id), id(a.hadm_id), id(a.subject_id), ts(a.intime), ts(a.outtime), a.careunit});
  w.count("icustays");
  w.transfers.row({id(a.hadm_id), "ED", ts(a.admittime), ts(a.intime)});
  w.transfers.row({id(a.hadm_id), a.careunit, ts(a.intime), ts(a.outtime)});
  w.count("transfers");
  w.count("transfers");
  if (a.outtime < a.dischtime) {
    w.transfers.row({id(a.hadm_id), "WARD", ts(a.outtime), ts(a.dischtime)});
    w.count("transfers");
  }
  w.services.row({id(a.hadm_id), ts(a.admittime), service});
  w.count("services");
  if (service_change && a.outtime < a.dischtime) {
    w.services.row({id(a.hadm_id), ts(a.outtime), *service_change});
    w.count("services");
  }
  w.diagnoses.row({id(a.hadm_id), primary_code, "1"});
  w.count("diagnoses");
  int seq = 2;
  for (auto code : secondary) {
    if (code == primary_code) continue;
    w.diagnoses.row({id(a.hadm_id), code, std::to_string(seq++)});
    w.count("diagnoses");
  }
}

void emit_case_study(Writers& w, const SynthConfig& cfg) {
  const auto ids = case_study_ids();
  Rng rng(kCaseStudySeed);
  AdmissionPlan a;
  a.subject_id = ids.subject_id;
  a.hadm_id = ids.hadm_id;
  a.icustay_id = ids.icustay_id;
  a.admittime = make_timestamp(2150, 11, 23, 14, 0, 0);
  a.intime = a.admittime.plus_seconds(3 * kSecondsPerHour);
  constexpr int kDeathHour = 141;
  a.outtime = a.intime.plus_seconds(kDeathHour * kSecondsPerHour);
  a.dischtime = a.outtime;
  a.deathtime = a.outtime;
  a.careunit = "MICU";
  a.diagnosis_text = "PNEUMONIA;CONGESTIVE HEART FAILURE";
  // Quiet start, slow rise after a ventilator break, steep terminal decline.
  for (int k = 0; k < kDeathHour; ++k) {
    double s = 0.0;
    if (k >= 125) s = 2.2 + 0.6 * (k - 125) / 16.0;
    else if (k >= 98) s = 0.5 + 1.7 * (k - 98) / 27.0;
    else if (k >= 80) s = 0.5 * (k - 80) / 18.0;
    a.severity.push_back(s);
  }

  w.patients.row({id(a.subject_id), "M", ts(make_timestamp(2070, 6, 2)), ts(*a.deathtime)});
  w.count("patients");
  emit_core_rows(w, a, "486", {"4280", "4019"}, "MED", std::nullopt);

  constexpr int kVentOff = 90, kVentOn = 98, kPressorsOn = 104, kComfort = 138;
  auto hour = [&](double h) { return a.intime.plus_seconds(static_cast<std::int64_t>(h * 3600)); };
  w.interventions.row({id(a.icustay_id), "ventilation", ts(hour(1)), ts(hour(kVentOff))});
  w.interventions.row({id(a.icustay_id), "ventilation", ts(hour(kVentOn)), ts(hour(kComfort))});
  w.interventions.row({id(a.icustay_id), "vasopressor", ts(hour(kPressorsOn)), ts(hour(kComfort))});
  for (int i = 0; i < 3; ++i) w.count("interventions");

  const auto& names = kFeatureNames;
  auto index_of = [&](std::string_view n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  const auto rr = index_of("respiratory_rate"), spo2 = index_of("oxygen_saturation"),
             dbp = index_of("diastolic_bp");
  emit_measurements(w, a, cfg.signal_strength, rng, [&](std::size_t f, int k, double& v) {
    if (f == rr && k == 114) v = 2;
    if (f == spo2 && k == 95) v = 86;
    if (f == dbp && k >= kPressorsOn && k < kComfort) v += 10;
  });
  // WBC: low value drawn before admission, elevated on ICU arrival, peak later.
  w.labevents.row({id(a.hadm_id), ts(a.admittime.plus_seconds(-3 * kSecondsPerHour)), "wbc", "3.1",
                   "K/uL", "Blood"});
  w.labevents.row({id(a.hadm_id), ts(hour(1.5)), "wbc", "18.2", "K/uL", "Blood"});
  w.labevents.row({id(a.hadm_id), ts(hour(106.5)), "wbc", "28.7", "K/uL", "Blood"});
  for (int i = 0; i < 3; ++i) w.count("labevents");

  w.noteevents.row({id(a.hadm_id), ts(hour(20)), "Echo",
                    "Echo report. Moderately depressed LV systolic function, EF 30%."});
  w.noteevents.row({id(a.hadm_id), ts(hour(93)), "Nursing",
                    "Nursing note. Extubated this morning, tolerating face mask. SpO2 dipping."});
  w.noteevents.row({id(a.hadm_id), ts(hour(105)), "Physician",
                    "Physician note. Hypotensive, norepinephrine started. Reintubated overnight."});
  w.noteevents.row({id(a.hadm_id), ts(hour(136)), "Physician",
                    "Family meeting held. Decision made for comfort measures only."});
  for (int i = 0; i < 4; ++i) w.count("noteevents");
}

}  // namespace

void SynthConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (n_patients < 0 || n_patients > 100000000) bad("n_patients out of range");
  if (!(mortality_base_rate > 0.0 && mortality_base_rate < 1.0)) bad("mortality_base_rate must be in (0,1)");
  if (!(signal_strength >= 0.0)) bad("signal_strength must be >= 0");
  if (!(mean_icu_los_hours > 0.0)) bad("mean_icu_los_hours must be positive");
  if (!(note_rate_per_day >= 0.0)) bad("note_rate_per_day must be >= 0");
}

std::vector<double> severity_trajectory(const SeverityParams& params, int horizon_steps, Rng& rng) {
  std::vector<double> s(static_cast<std::size_t>(std::max(horizon_steps, 0)));
  if (s.empty()) return s;
  s[0] = params.mu;
  for (std::size_t k = 1; k < s.size(); ++k) {
    s[k] = params.mu + params.phi * (s[k - 1] - params.mu) + params.sigma * rng.normal();
  }
  return s;
}

GenerationSummary generate(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string());

  std::vector<PlannedPatient> planned;
  planned.reserve(static_cast<std::size_t>(cfg.n_patients));
  for (std::int64_t i = 0; i < cfg.n_patients; ++i) planned.push_back(plan_patient(cfg, i));
  const double alpha = planned.empty() ? 0.0 : calibrate_alpha(planned, cfg.mortality_base_rate);

  Writers w(out_dir);
  GenerationSummary summary;
  for (std::int64_t i = 0; i < cfg.n_patients; ++i) {
    auto& p = planned[static_cast<std::size_t>(i)];
    Rng measure_rng(cfg.seed, static_cast<std::uint64_t>(i) * 8 + kStreamMeasure);
    std::vector<AdmissionPlan> realized;
    for (int j = 0; j < 2; ++j) {
      auto& pa = p.admissions[j];
      if (j == 1) {
        if (!p.readmit || realized.front().deathtime) break;
        const auto gap = static_cast<std::int64_t>(p.readmit_gap_days * kSecondsPerDay);
        const auto shift = realized.front().dischtime.seconds + gap;
        pa.intime = Timestamp{shift + (pa.intime.seconds - pa.admittime.seconds)};
        pa.admittime = Timestamp{shift};
      }
      AdmissionPlan a;
      a.subject_id = i + 1;
      a.hadm_id = 1000000 + 2 * i + j;
      a.icustay_id = 2000000 + 2 * i + j;
      a.admittime = pa.admittime;
      a.intime = pa.intime;
      const auto death = death_hour(pa, alpha);
      const int icu_hours = death ? *death : pa.icu_hours;
      a.severity.assign(pa.severity.begin(), pa.severity.begin() + icu_hours);
      a.outtime = a.intime.plus_seconds(icu_hours * kSecondsPerHour);
      if (death) {
        a.deathtime = a.outtime;
        a.dischtime = a.outtime;
      } else {
        a.dischtime = a.outtime.plus_seconds(pa.ward_hours * kSecondsPerHour);
      }
      a.careunit = kCareunits[pa.careunit];
      a.diagnosis_text = std::string(kPrimaryDiagnoses[pa.diagnosis].text);
      realized.push_back(std::move(a));
    }

    const auto& last = realized.back();
    w.patients.row({id(i + 1), std::string(gender_code(p.gender)), ts(p.dob),
                    last.deathtime ? ts(*last.deathtime) : std::string()});
    w.count("patients");
    for (std::size_t j = 0; j < realized.size(); ++j) {
      const auto& a = realized[j];
      const auto& pa = p.admissions[j];
      std::vector<std::string_view> secondary;
      for (auto s : pa.secondary) secondary.push_back(kSecondaryCodes[s]);
      std::optional<std::string_view> change;
      if (pa.service_change) change = kServices[*pa.service_change];
      emit_core_rows(w, a, kPrimaryDiagnoses[pa.diagnosis].code, secondary, kServices[pa.service],
                     change);
      emit_measurements(w, a, cfg.signal_strength, measure_rng);
      emit_notes(w, a, cfg.note_rate_per_day, measure_rng);
      emit_threshold_interventions(w, a);
      ++summary.admissions;
      if (a.deathtime) ++summary.deaths;
    }
  }
  if (cfg.include_case_study) {
    emit_case_study(w, cfg);
    ++summary.admissions;
    ++summary.deaths;
  }
  for (const auto& schema : table_schemas()) {
    const std::string stem(schema.file.substr(0, schema.file.find('.')));
    auto it = w.counts.find(stem);
    summary.table_counts.emplace_back(stem, it == w.counts.end() ? 0 : it->second);
  }
  return summary;
}

}  // namespace icutl::synth
