#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "icutl/time.hpp"

namespace icutl {

using SubjectId = std::int64_t;
using AdmissionId = std::int64_t;
using StayId = std::int64_t;
// Interned string handle (item names, units, fluids).
using Symbol = std::uint32_t;

enum class Gender { kMale, kFemale };

std::string_view gender_code(Gender g);
std::optional<Gender> parse_gender(std::string_view text);

struct Patient {
  SubjectId subject_id = 0;
  Gender gender = Gender::kMale;
  Timestamp dob;
  std::optional<Timestamp> dod;
};

struct Admission {
  AdmissionId hadm_id = 0;
  SubjectId subject_id = 0;
  Timestamp admittime;
  Timestamp dischtime;
  std::optional<Timestamp> deathtime;
  std::string admission_diagnosis;
};

struct IcuStay {
  StayId icustay_id = 0;
  AdmissionId hadm_id = 0;
  SubjectId subject_id = 0;
  Timestamp intime;
  Timestamp outtime;
  std::string first_careunit;
};

struct ChartEvent {
  StayId icustay_id = 0;
  Timestamp charttime;
  Symbol item = 0;
  double value = 0.0;
  Symbol unit = 0;
};

struct LabEvent {
  AdmissionId hadm_id = 0;
  Timestamp charttime;
  Symbol item = 0;
  double value = 0.0;
  Symbol unit = 0;
  Symbol fluid = 0;
};

struct NoteEvent {
  AdmissionId hadm_id = 0;
  Timestamp charttime;
  std::string category;
  std::string text;
};

enum class IntervalKind { kIntervention, kCareunit, kService };

std::string_view interval_kind_name(IntervalKind kind);

// scope_id is an icustay_id for interventions and an hadm_id otherwise.
struct IntervalEvent {
  std::int64_t scope_id = 0;
  IntervalKind kind = IntervalKind::kIntervention;
  std::string label;
  Timestamp starttime;
  Timestamp endtime;
};

struct DiagnosisRecord {
  AdmissionId hadm_id = 0;
  std::string icd9_code;
  int seq_num = 1;
};

enum class EventKind { kChart, kLab, kNote, kIntervention, kCareunit, kService, kDiagnosis };

// Chart events are accepted this long before ICU intime / after outtime.
inline constexpr std::int64_t kChartSlackSeconds = 6 * kSecondsPerHour;

// The ten CSV tables and their required columns.
struct TableSchema {
  std::string_view file;
  std::vector<std::string_view> columns;
};
const std::vector<TableSchema>& table_schemas();

// Immutable in-memory image of a MIMIC-shaped dataset. Every table is sorted
// by (scope id, time) with ties kept in source row order; per-scope ranges
// and per-(scope, item) orderings are built once at ingest.
class Datastore {
 public:
  // Reads the ten tables from `dataset_dir`, validates every row and builds
  // indices. An optional `item_aliases.csv` (alias,item_name) renames items.
  static Datastore ingest(const std::filesystem::path& dataset_dir);

  std::span<const Patient> patients() const { return patients_; }
  std::span<const Admission> admissions() const { return admissions_; }
  std::span<const IcuStay> icustays() const { return icustays_; }
  std::span<const ChartEvent> chart_events() const { return chart_events_; }
  std::span<const LabEvent> lab_events() const { return lab_events_; }
  std::span<const NoteEvent> note_events() const { return note_events_; }
  std::span<const IntervalEvent> interval_events() const { return interval_events_; }
  std::span<const DiagnosisRecord> diagnoses() const { return diagnoses_; }

  const Patient* find_patient(SubjectId id) const;
  const Admission* find_admission(AdmissionId id) const;
  const IcuStay* find_stay(StayId id) const;

  // Ascending by admittime; empty if the subject is unknown.
  std::vector<Admission> admissions_for_subject(SubjectId subject_id) const;

  // Ascending by intime.
  std::span<const IcuStay> stays_for_admission(AdmissionId hadm_id) const;

  // Row indices into the table of `kind`, time-sorted with source-order
  // ties. Chart events and interventions are resolved through the
  // admission's ICU stays. Throws UnknownAdmission.
  std::vector<std::size_t> events_for_admission(AdmissionId hadm_id, EventKind kind) const;

  std::span<const ChartEvent> chart_events_for_stay(StayId icustay_id) const;
  std::span<const LabEvent> lab_events_for_admission(AdmissionId hadm_id) const;
  std::span<const NoteEvent> notes_for_admission(AdmissionId hadm_id) const;
  std::span<const DiagnosisRecord> diagnoses_for_admission(AdmissionId hadm_id) const;
  std::span<const IntervalEvent> intervals_for_scope(IntervalKind kind, std::int64_t scope) const;

  // Indices into chart_events()/lab_events() for one item, time-sorted.
  std::span<const std::uint32_t> chart_item_events(StayId icustay_id, Symbol item) const;
  std::span<const std::uint32_t> lab_item_events(AdmissionId hadm_id, Symbol item) const;

  std::string_view symbol_name(Symbol s) const { return symbols_[s]; }
  std::optional<Symbol> find_symbol(std::string_view name) const;

  // Distinct item names across chart and lab events, sorted.
  std::vector<std::string> item_names() const;

  // Row counts per table file stem (e.g. "chartevents").
  std::vector<std::pair<std::string, std::size_t>> table_counts() const;

 private:
  using Range = std::pair<std::uint32_t, std::uint32_t>;
  template <typename Row, typename KeyFn>
  static std::unordered_map<std::int64_t, Range> build_ranges(const std::vector<Row>& rows,
                                                              KeyFn key);

  Symbol intern(std::string_view name);
  void build_indices();

  std::vector<Patient> patients_;
  std::vector<Admission> admissions_;
  std::vector<IcuStay> icustays_;
  std::vector<ChartEvent> chart_events_;
  std::vector<LabEvent> lab_events_;
  std::vector<NoteEvent> note_events_;
  std::vector<IntervalEvent> interval_events_;
  std::vector<DiagnosisRecord> diagnoses_;
  std::size_t transfer_rows_ = 0;
  std::size_t service_rows_ = 0;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Symbol> symbol_ids_;

  std::unordered_map<SubjectId, std::uint32_t> patient_index_;
  std::unordered_map<AdmissionId, std::uint32_t> admission_index_;
  std::unordered_map<StayId, std::uint32_t> stay_index_;
  std::unordered_map<SubjectId, std::vector<std::uint32_t>> subject_admissions_;
  std::unordered_map<AdmissionId, Range> stay_ranges_;
  std::unordered_map<StayId, Range> chart_ranges_;
  std::unordered_map<AdmissionId, Range> lab_ranges_;
  std::unordered_map<AdmissionId, Range> note_ranges_;
  std::unordered_map<AdmissionId, Range> diagnosis_ranges_;
  std::unordered_map<std::int64_t, Range> interval_ranges_[3];

  // Permutations of chart/lab rows ordered by (scope, item, time, row).
  std::vector<std::uint32_t> chart_by_item_;
  std::vector<std::uint32_t> lab_by_item_;
};

}  // namespace icutl
