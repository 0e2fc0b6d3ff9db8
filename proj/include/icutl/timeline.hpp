#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icutl/datastore.hpp"

namespace icutl::timeline {

struct PointEvent {
  Timestamp time;
  std::string label;  // "admission", "discharge" or "death"
};

struct NotePoint {
  Timestamp time;
  std::string category;
  std::string text;
};

struct SeriesPoint {
  Timestamp time;
  double value = 0.0;
  std::map<std::string, std::string> tooltip;
};

struct ValueSeries {
  std::string name;
  std::vector<std::string> categories;
  std::string unit;
  std::vector<SeriesPoint> points;
};

struct RiskPoint {
  Timestamp time;
  double probability = 0.0;
};

struct RiskSeries {
  std::string model_id;
  std::vector<RiskPoint> points;
};

struct SubjectAttributes {
  SubjectId subject_id = 0;
  Gender gender = Gender::kMale;
  double age = 0.0;
  std::string admission_diagnosis;
  Timestamp admittime;
};

struct TimelineDocument {
  AdmissionId hadm_id = 0;
  SubjectAttributes subject_attributes;
  std::vector<PointEvent> point_events;
  std::vector<IntervalEvent> interval_events;
  std::vector<NotePoint> note_events;
  std::vector<ValueSeries> series;
  std::vector<RiskSeries> risk_series;
};

struct CatalogEntry {
  std::string category;
  std::vector<std::string> names;
};

// Every item present in the store, grouped by display category. Items
// outside the category table fall under "Other".
std::vector<CatalogEntry> series_catalog(const Datastore& store);

// Integrates every event class for one admission. Selected names without
// data still yield a series with no points. risk_series is left empty.
// Throws UnknownAdmission.
TimelineDocument assemble_timeline(const Datastore& store, AdmissionId hadm_id,
                                   const std::set<std::string>& selected_series);

// JSON with alphabetically ordered keys; timestamps as ISO strings.
nlohmann::json to_json(const TimelineDocument& doc);
nlohmann::json to_json(const RiskSeries& series);
nlohmann::json to_json(const std::vector<CatalogEntry>& catalog);

}  // namespace icutl::timeline
