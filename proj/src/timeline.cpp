#include "icutl/timeline.hpp"

#include <algorithm>

#include "icutl/cohort.hpp"
#include "icutl/error.hpp"
#include "icutl/vocabulary.hpp"

namespace icutl::timeline {

std::vector<CatalogEntry> series_catalog(const Datastore& store) {
  std::map<std::string, std::vector<std::string>> by_category;
  for (const auto& name : store.item_names()) {
    auto categories = categories_for_item(name);
    if (categories.empty()) categories.push_back("Other");
    for (auto c : categories) by_category[std::string(c)].push_back(name);
  }
  std::vector<CatalogEntry> out;
  for (auto category : kSeriesCategories) {
    auto it = by_category.find(std::string(category));
    if (it == by_category.end()) continue;
    out.push_back({it->first, it->second});
  }
  return out;
}

namespace {

ValueSeries build_series(const Datastore& store, const Admission& a, const std::string& name) {
  ValueSeries series;
  series.name = name;
  for (auto c : categories_for_item(name)) series.categories.emplace_back(c);
  if (series.categories.empty()) series.categories.emplace_back("Other");
  series.unit = std::string(default_unit(name));

  const auto item = store.find_symbol(name);
  if (!item) return series;

  for (const auto& stay : store.stays_for_admission(a.hadm_id)) {
    for (auto idx : store.chart_item_events(stay.icustay_id, *item)) {
      const auto& e = store.chart_events()[idx];
      series.points.push_back(
          {e.charttime, e.value, {{"source", "chart"}, {"unit", std::string(store.symbol_name(e.unit))}}});
    }
  }
  for (auto idx : store.lab_item_events(a.hadm_id, *item)) {
    const auto& e = store.lab_events()[idx];
    series.points.push_back({e.charttime,
                             e.value,
                             {{"fluid", std::string(store.symbol_name(e.fluid))},
                              {"source", "lab"},
                              {"unit", std::string(store.symbol_name(e.unit))}}});
  }
  // Chart points precede lab points at equal times.
  std::stable_sort(series.points.begin(), series.points.end(),
                   [](const auto& x, const auto& y) { return x.time < y.time; });
  if (!series.points.empty()) {
    const auto& unit = series.points.front().tooltip.at("unit");
    if (!unit.empty()) series.unit = unit;
  }
  return series;
}

}  // namespace

TimelineDocument assemble_timeline(const Datastore& store, AdmissionId hadm_id,
                                   const std::set<std::string>& selected_series) {
  const auto* a = store.find_admission(hadm_id);
  if (!a) throw Error(ErrorCode::kUnknownAdmission, "unknown hadm_id " + std::to_string(hadm_id));
  const auto* patient = store.find_patient(a->subject_id);

  TimelineDocument doc;
  doc.hadm_id = hadm_id;
  doc.subject_attributes.subject_id = a->subject_id;
  doc.subject_attributes.gender = patient->gender;
  doc.subject_attributes.age = cohort::age_at_admission(patient->dob, a->admittime);
  doc.subject_attributes.admission_diagnosis = a->admission_diagnosis;
  doc.subject_attributes.admittime = a->admittime;

  doc.point_events.push_back({a->admittime, "admission"});
  doc.point_events.push_back({a->dischtime, "discharge"});
  if (a->deathtime) doc.point_events.push_back({*a->deathtime, "death"});
  std::stable_sort(doc.point_events.begin(), doc.point_events.end(),
                   [](const auto& x, const auto& y) { return x.time < y.time; });

  for (auto idx : store.events_for_admission(hadm_id, EventKind::kCareunit)) {
    doc.interval_events.push_back(store.interval_events()[idx]);
  }
  for (auto idx : store.events_for_admission(hadm_id, EventKind::kIntervention)) {
    doc.interval_events.push_back(store.interval_events()[idx]);
  }
  for (auto idx : store.events_for_admission(hadm_id, EventKind::kService)) {
    doc.interval_events.push_back(store.interval_events()[idx]);
  }

  for (const auto& n : store.notes_for_admission(hadm_id)) {
    doc.note_events.push_back({n.charttime, n.category, n.text});
  }

  // std::set iteration gives the series in name order.
  for (const auto& name : selected_series) doc.series.push_back(build_series(store, *a, name));
  return doc;
}

nlohmann::json to_json(const RiskSeries& series) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : series.points) {
    points.push_back({{"probability", p.probability}, {"time", format_timestamp(p.time)}});
  }
  return {{"model_id", series.model_id}, {"points", std::move(points)}};
}

nlohmann::json to_json(const TimelineDocument& doc) {
  using nlohmann::json;
  json points = json::array();
  for (const auto& p : doc.point_events) {
    points.push_back({{"label", p.label}, {"time", format_timestamp(p.time)}});
  }
  json intervals = json::array();
  for (const auto& e : doc.interval_events) {
    intervals.push_back({{"endtime", format_timestamp(e.endtime)},
                         {"kind", interval_kind_name(e.kind)},
                         {"label", e.label},
                         {"scope_id", e.scope_id},
                         {"starttime", format_timestamp(e.starttime)}});
  }
  json notes = json::array();
  for (const auto& n : doc.note_events) {
    notes.push_back(
        {{"category", n.category}, {"text", n.text}, {"time", format_timestamp(n.time)}});
  }
  json series = json::array();
  for (const auto& s : doc.series) {
    json pts = json::array();
    for (const auto& p : s.points) {
      pts.push_back({{"time", format_timestamp(p.time)}, {"tooltip", p.tooltip}, {"value", p.value}});
    }
    series.push_back({{"categories", s.categories},
                      {"name", s.name},
                      {"points", std::move(pts)},
                      {"unit", s.unit}});
  }
  json risk = json::array();
  for (const auto& r : doc.risk_series) risk.push_back(to_json(r));

  const auto& attrs = doc.subject_attributes;
  return {{"hadm_id", doc.hadm_id},
          {"interval_events", std::move(intervals)},
          {"note_events", std::move(notes)},
          {"point_events", std::move(points)},
          {"risk_series", std::move(risk)},
          {"series", std::move(series)},
          {"subject_attributes",
           {{"admission_diagnosis", attrs.admission_diagnosis},
            {"admittime", format_timestamp(attrs.admittime)},
            {"age", attrs.age},
            {"gender", gender_code(attrs.gender)},
            {"subject_id", attrs.subject_id}}}};
}

nlohmann::json to_json(const std::vector<CatalogEntry>& catalog) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : catalog) {
    out.push_back({{"category", entry.category}, {"names", entry.names}});
  }
  return out;
}

}  // namespace icutl::timeline
