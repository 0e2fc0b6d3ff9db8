#include "icutl/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "icutl/csv.hpp"
#include "icutl/error.hpp"

namespace icutl {

std::string_view gender_code(Gender g) { return g == Gender::kFemale ? "F" : "M"; }

std::optional<Gender> parse_gender(std::string_view text) {
  if (text == "M") return Gender::kMale;
  if (text == "F") return Gender::kFemale;
  return std::nullopt;
}

std::string_view interval_kind_name(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::kIntervention: return "intervention";
    case IntervalKind::kCareunit: return "careunit";
    case IntervalKind::kService: return "service";
  }
  return "intervention";
}

const std::vector<TableSchema>& table_schemas() {
  static const std::vector<TableSchema> schemas = {
      {"patients.csv", {"subject_id", "gender", "dob", "dod"}},
      {"admissions.csv",
       {"hadm_id", "subject_id", "admittime", "dischtime", "deathtime", "admission_diagnosis"}},
      {"icustays.csv",
       {"icustay_id", "hadm_id", "subject_id", "intime", "outtime", "first_careunit"}},
      {"chartevents.csv", {"icustay_id", "charttime", "item_name", "value_num", "unit"}},
      {"labevents.csv", {"hadm_id", "charttime", "item_name", "value_num", "unit", "fluid"}},
      {"noteevents.csv", {"hadm_id", "charttime", "category", "text"}},
      {"interventions.csv", {"icustay_id", "label", "starttime", "endtime"}},
      {"transfers.csv", {"hadm_id", "careunit", "intime", "outtime"}},
      {"services.csv", {"hadm_id", "transfertime", "service"}},
      {"diagnoses.csv", {"hadm_id", "icd9_code", "seq_num"}},
  };
  return schemas;
}

namespace {

std::string table_stem(std::string_view file) {
  return std::string(file.substr(0, file.find('.')));
}

// One open table: header resolved to column positions, typed field access
// with errors that name the table and line.
class TableCursor {
 public:
  TableCursor(const std::filesystem::path& dir, const TableSchema& schema)
      : name_(table_stem(schema.file)) {
    const auto path = dir / schema.file;
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kMissingTable, "missing table " + std::string(schema.file));
    }
    reader_.emplace(path);
    if (!reader_->next()) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "table=" + name_ + " column=" + std::string(schema.columns.front()) +
                      ": empty file, header row required");
    }
    const auto& header = reader_->fields();
    for (auto col : schema.columns) {
      auto it = std::find(header.begin(), header.end(), col);
      if (it == header.end()) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "table=" + name_ + " column=" + std::string(col) + ": column not in header");
      }
      positions_.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    width_ = header.size();
  }

  bool next() {
    while (reader_->next()) {
      const auto& f = reader_->fields();
      if (f.size() == 1 && f[0].empty()) continue;  // blank line
      if (f.size() != width_) {
        throw Error(ErrorCode::kParseError, where() + ": expected " + std::to_string(width_) +
                                                " fields, got " + std::to_string(f.size()));
      }
      return true;
    }
    return false;
  }

  const std::string& text(std::size_t col) const { return reader_->fields()[positions_[col]]; }

  std::int64_t integer(std::size_t col) const {
    const auto& s = text(col);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw Error(ErrorCode::kParseError, where() + ": bad integer '" + s + "'");
    }
    return v;
  }

  double real(std::size_t col) const {
    const auto& s = text(col);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw Error(ErrorCode::kParseError, where() + ": bad number '" + s + "'");
    }
    return v;
  }

  Timestamp time(std::size_t col) const {
    auto t = parse_timestamp(text(col));
    if (!t) throw Error(ErrorCode::kParseError, where() + ": bad timestamp '" + text(col) + "'");
    return *t;
  }

  std::optional<Timestamp> optional_time(std::size_t col) const {
    if (text(col).empty()) return std::nullopt;
    return time(col);
  }

  [[noreturn]] void violation(const std::string& reason) const {
    throw Error(ErrorCode::kReferentialViolation, where() + ": " + reason);
  }

  std::string where() const {
    return "table=" + name_ + " line=" + std::to_string(reader_->line());
  }

 private:
  std::string name_;
  std::optional<csv::Reader> reader_;
  std::vector<std::size_t> positions_;
  std::size_t width_ = 0;
};

bool within(Timestamp t, Timestamp lo, Timestamp hi) { return lo <= t && t <= hi; }

}  // namespace

Symbol Datastore::intern(std::string_view name) {
  auto it = symbol_ids_.find(std::string(name));
  if (it != symbol_ids_.end()) return it->second;
  const auto id = static_cast<Symbol>(symbols_.size());
  symbols_.emplace_back(name);
  symbol_ids_.emplace(std::string(name), id);
  return id;
}

std::optional<Symbol> Datastore::find_symbol(std::string_view name) const {
  auto it = symbol_ids_.find(std::string(name));
  if (it == symbol_ids_.end()) return std::nullopt;
  return it->second;
}

Datastore Datastore::ingest(const std::filesystem::path& dir) {
  Datastore db;

  std::unordered_map<std::string, std::string> aliases;
  if (std::filesystem::exists(dir / "item_aliases.csv")) {
    csv::Reader r(dir / "item_aliases.csv");
    r.next();  // header
    while (r.next()) {
      if (r.fields().size() >= 2) aliases[r.fields()[0]] = r.fields()[1];
    }
  }
  auto item_symbol = [&](const std::string& raw) {
    auto it = aliases.find(raw);
    return db.intern(it == aliases.end() ? raw : it->second);
  };

  // Every table is opened before any row is read so a missing file is
  // reported regardless of which table is broken.
  std::vector<TableCursor> cursors;
  for (const auto& schema : table_schemas()) cursors.emplace_back(dir, schema);
  auto cursor = [&](std::string_view file) -> TableCursor& {
    const auto& schemas = table_schemas();
    for (std::size_t i = 0; i < schemas.size(); ++i) {
      if (schemas[i].file == file) return cursors[i];
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown table");
  };

  {
    auto& t = cursor("patients.csv");
    while (t.next()) {
      Patient p;
      p.subject_id = t.integer(0);
      auto g = parse_gender(t.text(1));
      if (!g) throw Error(ErrorCode::kParseError, t.where() + ": bad gender '" + t.text(1) + "'");
      p.gender = *g;
      p.dob = t.time(2);
      p.dod = t.optional_time(3);
      if (p.dod && *p.dod < p.dob) t.violation("dod precedes dob");
      if (!db.patient_index_.emplace(p.subject_id, db.patients_.size()).second) {
        t.violation("duplicate subject_id " + std::to_string(p.subject_id));
      }
      db.patients_.push_back(p);
    }
  }
  {
    auto& t = cursor("admissions.csv");
    while (t.next()) {
      Admission a;
      a.hadm_id = t.integer(0);
      a.subject_id = t.integer(1);
      a.admittime = t.time(2);
      a.dischtime = t.time(3);
      a.deathtime = t.optional_time(4);
      a.admission_diagnosis = t.text(5);
      if (!db.patient_index_.count(a.subject_id)) {
        t.violation("subject_id " + std::to_string(a.subject_id) + " not in patients");
      }
      if (!(a.dischtime > a.admittime)) t.violation("dischtime not after admittime");
      if (a.deathtime && !within(*a.deathtime, a.admittime, a.dischtime)) {
        t.violation("deathtime outside admission");
      }
      if (!db.admission_index_.emplace(a.hadm_id, db.admissions_.size()).second) {
        t.violation("duplicate hadm_id " + std::to_string(a.hadm_id));
      }
      db.admissions_.push_back(std::move(a));
    }
  }
  auto admission_of = [&](TableCursor& t, AdmissionId hadm) -> const Admission& {
    auto it = db.admission_index_.find(hadm);
    if (it == db.admission_index_.end()) {
      t.violation("hadm_id " + std::to_string(hadm) + " not in admissions");
    }
    return db.admissions_[it->second];
  };
  // Admission-scoped event times must fall inside the admission, with the
  // same pre-admission slack granted to chart events.
  auto check_in_admission = [&](TableCursor& t, const Admission& a, Timestamp time) {
    if (!within(time, a.admittime.plus_seconds(-kChartSlackSeconds), a.dischtime)) {
      t.violation("time " + format_timestamp(time) + " outside admission " +
                  std::to_string(a.hadm_id));
    }
  };
  {
    auto& t = cursor("icustays.csv");
    while (t.next()) {
      IcuStay s;
      s.icustay_id = t.integer(0);
      s.hadm_id = t.integer(1);
      s.subject_id = t.integer(2);
      s.intime = t.time(3);
      s.outtime = t.time(4);
      s.first_careunit = t.text(5);
      const auto& a = admission_of(t, s.hadm_id);
      if (a.subject_id != s.subject_id) t.violation("subject_id disagrees with admission");
      if (!(s.outtime > s.intime)) t.violation("outtime not after intime");
      if (s.intime < a.admittime || s.outtime > a.dischtime) {
        t.violation("stay outside admission " + std::to_string(a.hadm_id));
      }
      if (!db.stay_index_.emplace(s.icustay_id, 0).second) {
        t.violation("duplicate icustay_id " + std::to_string(s.icustay_id));
      }
      db.icustays_.push_back(std::move(s));
    }
  }
  // Provisional stay lookup for validation; final positions are set after sorting.
  std::unordered_map<StayId, std::size_t> stay_rows;
  for (std::size_t i = 0; i < db.icustays_.size(); ++i) stay_rows[db.icustays_[i].icustay_id] = i;
  auto stay_of = [&](TableCursor& t, StayId id) -> const IcuStay& {
    auto it = stay_rows.find(id);
    if (it == stay_rows.end()) t.violation("icustay_id " + std::to_string(id) + " not in icustays");
    return db.icustays_[it->second];
  };
  {
    auto& t = cursor("chartevents.csv");
    while (t.next()) {
      ChartEvent e;
      e.icustay_id = t.integer(0);
      e.charttime = t.time(1);
      e.item = item_symbol(t.text(2));
      e.value = t.real(3);
      e.unit = db.intern(t.text(4));
      const auto& s = stay_of(t, e.icustay_id);
      if (!std::isfinite(e.value)) t.violation("non-finite value_num");
      const auto& a = db.admissions_[db.admission_index_.at(s.hadm_id)];
      if (!within(e.charttime, s.intime.plus_seconds(-kChartSlackSeconds),
                  s.outtime.plus_seconds(kChartSlackSeconds))) {
        t.violation("charttime outside icustay " + std::to_string(s.icustay_id));
      }
      check_in_admission(t, a, e.charttime);
      db.chart_events_.push_back(e);
    }
  }
  {
    auto& t = cursor("labevents.csv");
    while (t.next()) {
      LabEvent e;
      e.hadm_id = t.integer(0);
      e.charttime = t.time(1);
      e.item = item_symbol(t.text(2));
      e.value = t.real(3);
      e.unit = db.intern(t.text(4));
      if (t.text(5).empty()) t.violation("empty fluid");
      e.fluid = db.intern(t.text(5));
      const auto& a = admission_of(t, e.hadm_id);
      if (!std::isfinite(e.value)) t.violation("non-finite value_num");
      check_in_admission(t, a, e.charttime);
      db.lab_events_.push_back(e);
    }
  }
  {
    auto& t = cursor("noteevents.csv");
    while (t.next()) {
      NoteEvent n;
      n.hadm_id = t.integer(0);
      n.charttime = t.time(1);
      n.category = t.text(2);
      n.text = t.text(3);
      const auto& a = admission_of(t, n.hadm_id);
      if (n.text.empty()) t.violation("empty note text");
      check_in_admission(t, a, n.charttime);
      db.note_events_.push_back(std::move(n));
    }
  }
  {
    auto& t = cursor("interventions.csv");
    while (t.next()) {
      IntervalEvent e;
      e.kind = IntervalKind::kIntervention;
      e.scope_id = t.integer(0);
      e.label = t.text(1);
      e.starttime = t.time(2);
      e.endtime = t.time(3);
      const auto& s = stay_of(t, e.scope_id);
      const auto& a = db.admissions_[db.admission_index_.at(s.hadm_id)];
      if (e.endtime < e.starttime) t.violation("endtime precedes starttime");
      check_in_admission(t, a, e.starttime);
      check_in_admission(t, a, e.endtime);
      db.interval_events_.push_back(std::move(e));
    }
  }
  {
    auto& t = cursor("transfers.csv");
    while (t.next()) {
      IntervalEvent e;
      e.kind = IntervalKind::kCareunit;
      e.scope_id = t.integer(0);
      e.label = t.text(1);
      e.starttime = t.time(2);
      e.endtime = t.time(3);
      const auto& a = admission_of(t, e.scope_id);
      if (e.endtime < e.starttime) t.violation("outtime precedes intime");
      check_in_admission(t, a, e.starttime);
      check_in_admission(t, a, e.endtime);
      db.interval_events_.push_back(std::move(e));
      ++db.transfer_rows_;
    }
  }
  {
    // A service runs from its transfertime until the admission's next
    // service change, or discharge.
    auto& t = cursor("services.csv");
    std::vector<IntervalEvent> services;
    while (t.next()) {
      IntervalEvent e;
      e.kind = IntervalKind::kService;
      e.scope_id = t.integer(0);
      e.starttime = t.time(1);
      e.label = t.text(2);
      const auto& a = admission_of(t, e.scope_id);
      check_in_admission(t, a, e.starttime);
      e.endtime = a.dischtime;
      services.push_back(std::move(e));
    }
    std::stable_sort(services.begin(), services.end(), [](const auto& x, const auto& y) {
      return std::tie(x.scope_id, x.starttime) < std::tie(y.scope_id, y.starttime);
    });
    for (std::size_t i = 0; i + 1 < services.size(); ++i) {
      if (services[i + 1].scope_id == services[i].scope_id) {
        services[i].endtime = services[i + 1].starttime;
      }
    }
    db.service_rows_ = services.size();
    for (auto& s : services) db.interval_events_.push_back(std::move(s));
  }
  {
    auto& t = cursor("diagnoses.csv");
    std::set<std::pair<AdmissionId, int>> seen;
    while (t.next()) {
      DiagnosisRecord d;
      d.hadm_id = t.integer(0);
      d.icd9_code = t.text(1);
      const auto seq = t.integer(2);
      admission_of(t, d.hadm_id);
      if (seq < 1) t.violation("seq_num must be positive");
      d.seq_num = static_cast<int>(seq);
      if (!seen.emplace(d.hadm_id, d.seq_num).second) t.violation("duplicate (hadm_id, seq_num)");
      db.diagnoses_.push_back(std::move(d));
    }
  }

  db.build_indices();
  return db;
}

template <typename Row, typename KeyFn>
std::unordered_map<std::int64_t, Datastore::Range> Datastore::build_ranges(
    const std::vector<Row>& rows, KeyFn key) {
  std::unordered_map<std::int64_t, Range> ranges;
  std::uint32_t begin = 0;
  for (std::uint32_t i = 1; i <= rows.size(); ++i) {
    if (i == rows.size() || key(rows[i]) != key(rows[begin])) {
      ranges.emplace(key(rows[begin]), Range{begin, i});
      begin = i;
    }
  }
  return ranges;
}

void Datastore::build_indices() {
  std::stable_sort(patients_.begin(), patients_.end(),
                   [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  std::stable_sort(admissions_.begin(), admissions_.end(),
                   [](const auto& a, const auto& b) { return a.hadm_id < b.hadm_id; });
  std::stable_sort(icustays_.begin(), icustays_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.hadm_id, a.intime) < std::tie(b.hadm_id, b.intime);
  });
  std::stable_sort(chart_events_.begin(), chart_events_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.icustay_id, a.charttime) < std::tie(b.icustay_id, b.charttime);
  });
  std::stable_sort(lab_events_.begin(), lab_events_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.hadm_id, a.charttime) < std::tie(b.hadm_id, b.charttime);
  });
  std::stable_sort(note_events_.begin(), note_events_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.hadm_id, a.charttime) < std::tie(b.hadm_id, b.charttime);
  });
  std::stable_sort(interval_events_.begin(), interval_events_.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(a.kind, a.scope_id, a.starttime) <
                            std::tie(b.kind, b.scope_id, b.starttime);
                   });
  std::stable_sort(diagnoses_.begin(), diagnoses_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.hadm_id, a.seq_num) < std::tie(b.hadm_id, b.seq_num);
  });

  patient_index_.clear();
  for (std::uint32_t i = 0; i < patients_.size(); ++i) patient_index_[patients_[i].subject_id] = i;
  admission_index_.clear();
  for (std::uint32_t i = 0; i < admissions_.size(); ++i) {
    admission_index_[admissions_[i].hadm_id] = i;
    subject_admissions_[admissions_[i].subject_id].push_back(i);
  }
  for (auto& [subject, list] : subject_admissions_) {
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
      return admissions_[a].admittime < admissions_[b].admittime;
    });
  }
  stay_index_.clear();
  for (std::uint32_t i = 0; i < icustays_.size(); ++i) stay_index_[icustays_[i].icustay_id] = i;

  stay_ranges_ = build_ranges(icustays_, [](const auto& r) { return r.hadm_id; });
  chart_ranges_ = build_ranges(chart_events_, [](const auto& r) { return r.icustay_id; });
  lab_ranges_ = build_ranges(lab_events_, [](const auto& r) { return r.hadm_id; });
  note_ranges_ = build_ranges(note_events_, [](const auto& r) { return r.hadm_id; });
  diagnosis_ranges_ = build_ranges(diagnoses_, [](const auto& r) { return r.hadm_id; });
  for (int k = 0; k < 3; ++k) {
    const auto kind = static_cast<IntervalKind>(k);
    auto first = std::partition_point(interval_events_.begin(), interval_events_.end(),
                                      [&](const auto& e) { return e.kind < kind; });
    auto last = std::partition_point(first, interval_events_.end(),
                                     [&](const auto& e) { return e.kind <= kind; });
    const auto offset = static_cast<std::uint32_t>(first - interval_events_.begin());
    std::vector<IntervalEvent> slice(first, last);
    for (auto [scope, range] : build_ranges(slice, [](const auto& r) { return r.scope_id; })) {
      interval_ranges_[k][scope] = {range.first + offset, range.second + offset};
    }
  }

  // Rows are already (scope, time)-sorted, so a stable sort on (scope, item)
  // keeps time order within each item.
  chart_by_item_.resize(chart_events_.size());
  std::iota(chart_by_item_.begin(), chart_by_item_.end(), 0u);
  std::stable_sort(chart_by_item_.begin(), chart_by_item_.end(), [&](auto a, auto b) {
    return std::tie(chart_events_[a].icustay_id, chart_events_[a].item) <
           std::tie(chart_events_[b].icustay_id, chart_events_[b].item);
  });
  lab_by_item_.resize(lab_events_.size());
  std::iota(lab_by_item_.begin(), lab_by_item_.end(), 0u);
  std::stable_sort(lab_by_item_.begin(), lab_by_item_.end(), [&](auto a, auto b) {
    return std::tie(lab_events_[a].hadm_id, lab_events_[a].item) <
           std::tie(lab_events_[b].hadm_id, lab_events_[b].item);
  });
}

const Patient* Datastore::find_patient(SubjectId id) const {
  auto it = patient_index_.find(id);
  return it == patient_index_.end() ? nullptr : &patients_[it->second];
}

const Admission* Datastore::find_admission(AdmissionId id) const {
  auto it = admission_index_.find(id);
  return it == admission_index_.end() ? nullptr : &admissions_[it->second];
}

const IcuStay* Datastore::find_stay(StayId id) const {
  auto it = stay_index_.find(id);
  return it == stay_index_.end() ? nullptr : &icustays_[it->second];
}

std::vector<Admission> Datastore::admissions_for_subject(SubjectId subject_id) const {
  std::vector<Admission> out;
  auto it = subject_admissions_.find(subject_id);
  if (it == subject_admissions_.end()) return out;
  for (auto i : it->second) out.push_back(admissions_[i]);
  return out;
}

namespace {

template <typename T, typename Map, typename Key>
std::span<const T> range_span(const std::vector<T>& rows, const Map& ranges, Key key) {
  auto it = ranges.find(key);
  if (it == ranges.end()) return {};
  return {rows.data() + it->second.first, it->second.second - it->second.first};
}

}  // namespace

std::span<const IcuStay> Datastore::stays_for_admission(AdmissionId hadm_id) const {
  return range_span(icustays_, stay_ranges_, hadm_id);
}

std::span<const ChartEvent> Datastore::chart_events_for_stay(StayId icustay_id) const {
  return range_span(chart_events_, chart_ranges_, icustay_id);
}

std::span<const LabEvent> Datastore::lab_events_for_admission(AdmissionId hadm_id) const {
  return range_span(lab_events_, lab_ranges_, hadm_id);
}

std::span<const NoteEvent> Datastore::notes_for_admission(AdmissionId hadm_id) const {
  return range_span(note_events_, note_ranges_, hadm_id);
}

std::span<const DiagnosisRecord> Datastore::diagnoses_for_admission(AdmissionId hadm_id) const {
  return range_span(diagnoses_, diagnosis_ranges_, hadm_id);
}

std::span<const IntervalEvent> Datastore::intervals_for_scope(IntervalKind kind,
                                                              std::int64_t scope) const {
  return range_span(interval_events_, interval_ranges_[static_cast<int>(kind)], scope);
}

std::vector<std::size_t> Datastore::events_for_admission(AdmissionId hadm_id,
                                                         EventKind kind) const {
  if (!find_admission(hadm_id)) {
    throw Error(ErrorCode::kUnknownAdmission, "unknown hadm_id " + std::to_string(hadm_id));
  }
  std::vector<std::size_t> out;
  auto append = [&](const auto& rows, auto span) {
    if (span.empty()) return;
    const auto first = static_cast<std::size_t>(span.data() - rows.data());
    for (std::size_t i = 0; i < span.size(); ++i) out.push_back(first + i);
  };
  switch (kind) {
    case EventKind::kChart: {
      for (const auto& s : stays_for_admission(hadm_id)) {
        append(chart_events_, chart_events_for_stay(s.icustay_id));
      }
      // Stays are contiguous blocks; merge them by time, row order on ties.
      std::stable_sort(out.begin(), out.end(), [&](auto a, auto b) {
        return chart_events_[a].charttime < chart_events_[b].charttime;
      });
      break;
    }
    case EventKind::kLab: append(lab_events_, lab_events_for_admission(hadm_id)); break;
    case EventKind::kNote: append(note_events_, notes_for_admission(hadm_id)); break;
    case EventKind::kIntervention: {
      for (const auto& s : stays_for_admission(hadm_id)) {
        append(interval_events_, intervals_for_scope(IntervalKind::kIntervention, s.icustay_id));
      }
      std::stable_sort(out.begin(), out.end(), [&](auto a, auto b) {
        return interval_events_[a].starttime < interval_events_[b].starttime;
      });
      break;
    }
    case EventKind::kCareunit:
      append(interval_events_, intervals_for_scope(IntervalKind::kCareunit, hadm_id));
      break;
    case EventKind::kService:
      append(interval_events_, intervals_for_scope(IntervalKind::kService, hadm_id));
      break;
    case EventKind::kDiagnosis: append(diagnoses_, diagnoses_for_admission(hadm_id)); break;
  }
  return out;
}

namespace {

template <typename Rows, typename Scope>
std::span<const std::uint32_t> item_range(const std::vector<std::uint32_t>& perm,
                                          const Rows& rows, Scope scope_of,
                                          std::int64_t scope, Symbol item) {
  auto key = [&](std::uint32_t i) { return std::pair{scope_of(rows[i]), rows[i].item}; };
  const std::pair<std::int64_t, Symbol> target{scope, item};
  auto lo = std::lower_bound(perm.begin(), perm.end(), target,
                             [&](std::uint32_t i, const auto& t) { return key(i) < t; });
  auto hi = std::upper_bound(lo, perm.end(), target,
                             [&](const auto& t, std::uint32_t i) { return t < key(i); });
  return {perm.data() + (lo - perm.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace

std::span<const std::uint32_t> Datastore::chart_item_events(StayId icustay_id, Symbol item) const {
  return item_range(chart_by_item_, chart_events_, [](const auto& e) { return e.icustay_id; },
                    icustay_id, item);
}

std::span<const std::uint32_t> Datastore::lab_item_events(AdmissionId hadm_id, Symbol item) const {
  return item_range(lab_by_item_, lab_events_, [](const auto& e) { return e.hadm_id; }, hadm_id,
                    item);
}

std::vector<std::string> Datastore::item_names() const {
  std::set<Symbol> used;
  for (const auto& e : chart_events_) used.insert(e.item);
  for (const auto& e : lab_events_) used.insert(e.item);
  std::vector<std::string> names;
  for (auto s : used) names.push_back(symbols_[s]);
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<std::pair<std::string, std::size_t>> Datastore::table_counts() const {
  std::size_t interventions = 0;
  for (const auto& e : interval_events_) {
    if (e.kind == IntervalKind::kIntervention) ++interventions;
  }
  return {
      {"patients", patients_.size()},       {"admissions", admissions_.size()},
      {"icustays", icustays_.size()},       {"chartevents", chart_events_.size()},
      {"labevents", lab_events_.size()},    {"noteevents", note_events_.size()},
      {"interventions", interventions},     {"transfers", transfer_rows_},
      {"services", service_rows_},          {"diagnoses", diagnoses_.size()},
  };
}

}  // namespace icutl
