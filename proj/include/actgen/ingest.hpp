#pragma once

// Travel-survey ingestion: typed person and trip records, CSV parsing with
// a quarantine of rejected rows, cleaning, trip chaining into activity
// schedules, and the train/validation split by survey year.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "actgen/csv.hpp"
#include "actgen/error.hpp"
#include "actgen/schedule.hpp"
#include "actgen/schedule_builder.hpp"

namespace actgen {

struct PersonRecord {
  std::string person_id;
  // personal attributes
  std::string person_type;
  double age = 0;
  std::string gender;
  std::string car_licence;
  std::string main_occupation;
  std::string anzsco2;
  std::string main_industry;
  std::string anzsic2;
  std::string income_level;
  std::string main_role;
  std::string work_type;
  std::string emp_type;
  // household
  std::string own_dwell;
  double travel_year = 2012;
  double travel_month = 1;
  std::string travel_day;
  double num_persons = 1;
  double num_kids = 0;
  double num_fulltime_workers = 0;
  double num_parttime_workers = 0;
  double num_casual_workers = 0;
  double num_cars = 0;
  double num_bikes = 0;
  double hh_income = 0;
  double years_lived = 0;
  // zone
  std::string home_region;
  std::string home_lga;
  std::string home_postcode;

  friend bool operator==(const PersonRecord&, const PersonRecord&) = default;
};

inline PersonGroup person_group(const PersonRecord& p) { return person_group_from_string(p.person_type); }

namespace detail {

inline std::vector<std::string> numbered_labels(const std::string& prefix, int count, int width) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) {
    std::string n = std::to_string(i);
    out.push_back(prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n);
  }
  return out;
}

}  // namespace detail

/// Declared schema of one survey variable.
struct PersonColumn {
  std::string name;
  std::variant<std::string PersonRecord::*, double PersonRecord::*> field;
  std::vector<std::string> vocab;  // categorical only
  double min = 0, max = 0;         // numeric only
  bool integral = false;

  bool categorical() const { return std::holds_alternative<std::string PersonRecord::*>(field); }
};

inline std::vector<std::string> home_postcodes() {
  std::vector<std::string> out;
  for (int i = 0; i < 245; ++i) out.push_back(std::to_string(3000 + i));
  return out;
}

/// All 28 survey variables with their vocabularies (cardinalities follow the
/// survey's variable table) and numeric ranges.
inline const std::vector<PersonColumn>& person_columns() {
  using P = PersonRecord;
  using detail::numbered_labels;
  static const std::vector<PersonColumn> columns = [] {
    auto cat = [](std::string name, std::string P::*f, std::vector<std::string> vocab) {
      return PersonColumn{std::move(name), f, std::move(vocab), 0, 0, false};
    };
    auto num = [](std::string name, double P::*f, double lo, double hi, bool integral = true) {
      return PersonColumn{std::move(name), f, {}, lo, hi, integral};
    };
    return std::vector<PersonColumn>{
        cat("PersonType", &P::person_type, {"Worker", "Student", "Nonworker"}),
        num("Age", &P::age, 0, 116),
        cat("Gender", &P::gender, {"Male", "Female"}),
        cat("CarLicence", &P::car_licence, {"Yes", "No"}),
        cat("MainOccupation", &P::main_occupation, numbered_labels("OCC", 10, 2)),
        cat("ANZSCO2", &P::anzsco2, numbered_labels("ANZSCO", 53, 2)),
        cat("MainIndustry", &P::main_industry, numbered_labels("IND", 21, 2)),
        cat("ANZSIC2", &P::anzsic2, numbered_labels("ANZSIC", 106, 3)),
        cat("PersonIncomeLevel", &P::income_level, numbered_labels("INC", 11, 2)),
        cat("MainRole", &P::main_role,
            {"Full-time worker", "Part-time worker", "Student", "Pupil", "Child", "Retired", "Nonworker"}),
        cat("WorkType", &P::work_type,
            {"Fixed hours", "Flexible hours", "Roster shifts", "Work from home", "Not in workforce"}),
        cat("EmpType", &P::emp_type, {"Permanent", "Fixed-term", "Casual", "Self-employed", "Not employed"}),
        cat("OwnDwell", &P::own_dwell,
            {"Fully owned", "Being purchased", "Being rented", "Occupied rent-free", "Something else"}),
        num("TravelYear", &P::travel_year, 2012, 2018),
        num("TravelMonth", &P::travel_month, 1, 12),
        cat("TravelDay", &P::travel_day, {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"}),
        num("NumPersons", &P::num_persons, 1, 11),
        num("NumKids", &P::num_kids, 0, 7),
        num("NumFulltimeWorkers", &P::num_fulltime_workers, 0, 6),
        num("NumParttimeWorkers", &P::num_parttime_workers, 0, 5),
        num("NumCasualWorkers", &P::num_casual_workers, 0, 4),
        num("NumCars", &P::num_cars, 0, 7),
        num("NumBikes", &P::num_bikes, 0, 14),
        num("HhIncome", &P::hh_income, 0, 12500, false),
        num("YearsLived", &P::years_lived, 0, 88),
        cat("HomeRegion", &P::home_region, {"Metropolitan", "Regional"}),
        cat("HomeLGA", &P::home_lga, numbered_labels("LGA", 32, 2)),
        cat("HomePostcode", &P::home_postcode, home_postcodes()),
    };
  }();
  return columns;
}

inline const PersonColumn& person_column(std::string_view name) {
  for (const auto& c : person_columns())
    if (c.name == name) return c;
  throw Error(ErrorCode::InvalidArgument, "ingest", "unknown person column '" + std::string(name) + "'");
}

/// Survey variables used as model features: everything except TravelYear,
/// which only decides the train/validation split.
inline std::vector<std::string> model_feature_columns() {
  std::vector<std::string> out;
  for (const auto& c : person_columns())
    if (c.name != "TravelYear") out.push_back(c.name);
  return out;
}

struct TripRecord {
  std::string person_id;
  std::string origin_purpose;
  std::string dest_purpose;
  double depart = 0;
  double arrive = 0;

  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

struct QuarantineEntry {
  std::string source;
  std::size_t line = 0;
  std::string person_id;
  std::string column;
  std::string reason;
};

struct SurveyData {
  std::vector<PersonRecord> persons;
  std::vector<TripRecord> trips;
  std::vector<QuarantineEntry> quarantine;
};

namespace detail {

inline std::vector<std::size_t> require_columns(const CsvTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto c = table.column(n);
    if (!c) throw Error(ErrorCode::MissingColumn, "ingest", n);
    idx.push_back(*c);
  }
  return idx;
}

}  // namespace detail

inline std::vector<std::string> person_csv_header() {
  std::vector<std::string> h{"PersonId"};
  for (const auto& c : person_columns()) h.push_back(c.name);
  return h;
}

inline const std::vector<std::string>& trip_csv_header() {
  static const std::vector<std::string> h{"PersonId", "OriginPurpose", "DestPurpose", "DepartTime", "ArriveTime"};
  return h;
}

/// Persons from a parsed table. Rows failing type, range or vocabulary
/// checks go to `quarantine` with their source line.
inline std::vector<PersonRecord> parse_persons(const CsvTable& table, std::vector<QuarantineEntry>& quarantine,
                                               const std::string& source = "persons.csv") {
  const auto idx = detail::require_columns(table, person_csv_header());
  const auto& columns = person_columns();
  std::vector<PersonRecord> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto get = [&](std::size_t k) -> std::string { return idx[k] < row.size() ? row[idx[k]] : std::string{}; };
    PersonRecord p;
    p.person_id = get(0);
    auto reject = [&](const std::string& column, const std::string& reason) {
      quarantine.push_back({source, line, p.person_id, column, reason});
    };
    if (p.person_id.empty()) {
      reject("PersonId", "MissingValue");
      continue;
    }
    if (seen.count(p.person_id)) {
      reject("PersonId", "DuplicateId");
      continue;
    }
    bool ok = true;
    for (std::size_t c = 0; c < columns.size() && ok; ++c) {
      const PersonColumn& col = columns[c];
      const std::string cell = get(c + 1);
      if (col.categorical()) {
        if (std::find(col.vocab.begin(), col.vocab.end(), cell) == col.vocab.end()) {
          reject(col.name, cell.empty() ? "MissingValue" : "UnknownCategory");
          ok = false;
        } else {
          p.*std::get<std::string PersonRecord::*>(col.field) = cell;
        }
      } else {
        auto v = parse_number(cell);
        if (!v || !std::isfinite(*v) || (col.integral && std::floor(*v) != *v)) {
          reject(col.name, "TypeMismatch");
          ok = false;
        } else if (*v < col.min || *v > col.max) {
          reject(col.name, "OutOfRange");
          ok = false;
        } else {
          p.*std::get<double PersonRecord::*>(col.field) = *v;
        }
      }
    }
    if (!ok) continue;
    seen.insert(p.person_id);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<TripRecord> parse_trips(const CsvTable& table, std::vector<QuarantineEntry>& quarantine,
                                           const std::string& source = "trips.csv") {
  const auto idx = detail::require_columns(table, trip_csv_header());
  std::vector<TripRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto get = [&](std::size_t k) -> std::string { return idx[k] < row.size() ? row[idx[k]] : std::string{}; };
    TripRecord t{get(0), get(1), get(2), 0, 0};
    auto depart = parse_number(get(3));
    auto arrive = parse_number(get(4));
    if (!depart || !std::isfinite(*depart)) {
      quarantine.push_back({source, table.line_numbers[r], t.person_id, "DepartTime", "TypeMismatch"});
      continue;
    }
    if (!arrive || !std::isfinite(*arrive)) {
      quarantine.push_back({source, table.line_numbers[r], t.person_id, "ArriveTime", "TypeMismatch"});
      continue;
    }
    t.depart = *depart;
    t.arrive = *arrive;
    out.push_back(std::move(t));
  }
  return out;
}

inline SurveyData parse_survey(const std::filesystem::path& person_csv, const std::filesystem::path& trip_csv) {
  SurveyData data;
  data.persons = parse_persons(read_csv(person_csv), data.quarantine, person_csv.filename().string());
  data.trips = parse_trips(read_csv(trip_csv), data.quarantine, trip_csv.filename().string());
  return data;
}

inline void write_persons_csv(std::ostream& out, const std::vector<PersonRecord>& persons) {
  write_csv_row(out, person_csv_header());
  for (const auto& p : persons) {
    std::vector<std::string> row{p.person_id};
    for (const auto& c : person_columns()) {
      if (c.categorical())
        row.push_back(p.*std::get<std::string PersonRecord::*>(c.field));
      else
        row.push_back(format_number(p.*std::get<double PersonRecord::*>(c.field)));
    }
    write_csv_row(out, row);
  }
}

inline void write_trips_csv(std::ostream& out, const std::vector<TripRecord>& trips) {
  write_csv_row(out, trip_csv_header());
  for (const auto& t : trips)
    write_csv_row(out, {t.person_id, t.origin_purpose, t.dest_purpose, format_number(t.depart), format_number(t.arrive)});
}

inline void write_quarantine_csv(std::ostream& out, const std::vector<QuarantineEntry>& entries) {
  write_csv_row(out, {"source", "line", "person_id", "column", "reason"});
  for (const auto& q : entries)
    write_csv_row(out, {q.source, std::to_string(q.line), q.person_id, q.column, q.reason});
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

/// Each rule can be switched off from the pipeline config.
struct CleaningRules {
  bool drop_orphan_trips = true;           // trips of unknown persons
  bool drop_persons_without_trips = true;  // stay-at-home days carry no schedule
  bool reject_nonpositive_trips = true;    // arrive <= depart
  bool reject_overlaps = true;             // arrive_i > depart_{i+1}, or empty non-home dwell
  bool reject_discontinuity = true;        // dest_i != origin_{i+1}
  bool require_home_anchor = true;         // day starts and ends at home
  bool reject_out_of_day = true;           // depart < 0, or arrive past the day limit
  bool reject_unknown_purpose = true;      // purpose missing from the lookup
  bool reject_subsistence_for_nonworkers = true;
};

struct RemovedPerson {
  std::string person_id;
  std::string reason;
};

struct CleanResult {
  std::vector<PersonRecord> persons;
  std::vector<TripRecord> trips;
  std::vector<RemovedPerson> removed;
};

/// Trips grouped per person in first-appearance order, each group stably
/// sorted by departure.
inline std::map<std::string, std::vector<TripRecord>> group_trips(const std::vector<TripRecord>& trips) {
  std::map<std::string, std::vector<TripRecord>> by_person;
  for (const auto& t : trips) by_person[t.person_id].push_back(t);
  for (auto& [id, list] : by_person)
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.depart < b.depart; });
  return by_person;
}

/// First rule a person's trip chain breaks, or empty when consistent.
inline std::string trip_chain_problem(const PersonRecord& person, const std::vector<TripRecord>& trips,
                                      const CleaningRules& rules, const PurposeTable& purposes) {
  if (trips.empty()) return rules.drop_persons_without_trips ? "NoTrips" : "";
  for (std::size_t i = 0; i < trips.size(); ++i) {
    const TripRecord& t = trips[i];
    if (rules.reject_nonpositive_trips && !(t.arrive > t.depart)) return "NonPositiveTrip";
    if (rules.reject_out_of_day && (t.depart < 0 || t.arrive > kMaxEndMinutes)) return "OutOfDay";
    if (rules.reject_unknown_purpose && (!purposes.knows(t.origin_purpose) || !purposes.knows(t.dest_purpose)))
      return "UnknownPurpose";
    if (i + 1 < trips.size()) {
      const TripRecord& next = trips[i + 1];
      if (rules.reject_overlaps) {
        if (t.arrive > next.depart) return "Overlap";
        if (t.arrive == next.depart && !purposes.is_home(t.dest_purpose)) return "Overlap";
      }
      if (rules.reject_discontinuity && to_lower(t.dest_purpose) != to_lower(next.origin_purpose))
        return "Discontinuity";
    }
    if (rules.reject_subsistence_for_nonworkers && person.person_type == "Nonworker" &&
        !purposes.is_home(t.dest_purpose)) {
      auto g = purposes.find(t.dest_purpose);
      if (g && *g == ActivityGroup::W && i + 1 < trips.size()) return "SubsistenceForNonworker";
    }
  }
  if (rules.require_home_anchor &&
      (!purposes.is_home(trips.front().origin_purpose) || !purposes.is_home(trips.back().dest_purpose)))
    return "NotHomeAnchored";
  return "";
}

/// Removes persons whose trip chain is inconsistent. Person order follows
/// the input; kept trips are grouped per person and sorted by departure.
inline CleanResult clean(const std::vector<PersonRecord>& persons, const std::vector<TripRecord>& trips,
                         const CleaningRules& rules = {}, const PurposeTable& purposes = PurposeTable::defaults()) {
  auto by_person = group_trips(trips);
  CleanResult out;
  std::set<std::string> known;
  for (const auto& p : persons) {
    known.insert(p.person_id);
    auto it = by_person.find(p.person_id);
    static const std::vector<TripRecord> none;
    const auto& list = it == by_person.end() ? none : it->second;
    std::string problem = trip_chain_problem(p, list, rules, purposes);
    if (!problem.empty()) {
      out.removed.push_back({p.person_id, problem});
      continue;
    }
    out.persons.push_back(p);
    out.trips.insert(out.trips.end(), list.begin(), list.end());
  }
  if (!rules.drop_orphan_trips) {
    for (const auto& [id, list] : by_person)
      if (!known.count(id)) out.trips.insert(out.trips.end(), list.begin(), list.end());
  }
  return out;
}

/// Chains one person's time-ordered trips into activities: every dwell at a
/// non-home destination between an inbound and outbound trip is an activity;
/// a home dwell closes the current home-based tour.
inline ActivitySchedule trips_to_schedule(const std::vector<TripRecord>& trips,
                                          const PurposeTable& purposes = PurposeTable::defaults()) {
  ActivitySchedule s;
  if (trips.empty()) return s;
  s.person_id = trips.front().person_id;
  if (!purposes.is_home(trips.front().origin_purpose) || !purposes.is_home(trips.back().dest_purpose))
    throw Error(ErrorCode::NotHomeAnchored, "ingest", "trip chain of " + s.person_id + " does not start and end at home");
  int tour = 0;
  for (std::size_t i = 0; i + 1 < trips.size(); ++i) {
    const TripRecord& in = trips[i];
    if (purposes.is_home(in.dest_purpose)) {
      ++tour;
      continue;
    }
    Activity a;
    a.group = classify_activity_group(in.dest_purpose, purposes);
    a.start = in.arrive;
    a.end = trips[i + 1].depart;
    a.raw_type = in.dest_purpose;
    s.activities.push_back(std::move(a));
    s.tour.push_back(tour);
  }
  // renumber tours densely from 0
  int next = 0, last = -1;
  for (auto& t : s.tour) {
    if (t != last) {
      last = t;
      t = next++;
    } else {
      t = next - 1;
    }
  }
  return s;
}

/// Flattens a schedule back into home-anchored trips. `travel_in[i]` is the
/// travel time into activity i; `travel_home[i]` the trip home when activity
/// i closes its tour.
inline std::vector<TripRecord> schedule_to_trips(const ActivitySchedule& s, const std::vector<double>& travel_in,
                                                 const std::vector<double>& travel_home) {
  std::vector<TripRecord> trips;
  std::string where = "Home";
  const std::size_t n = s.activities.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Activity& a = s.activities[i];
    trips.push_back({s.person_id, where, a.raw_type, a.start - travel_in.at(i), a.start});
    where = a.raw_type;
    const bool closes_tour = i + 1 == n || s.tour_of(i + 1) != s.tour_of(i);
    if (closes_tour) {
      trips.push_back({s.person_id, where, "Home", a.end, a.end + travel_home.at(i)});
      where = "Home";
    }
  }
  return trips;
}

struct YearSplit {
  std::vector<PersonRecord> train;
  std::vector<PersonRecord> validation;
};

/// 2012-2017 train, 2018 validation.
inline YearSplit split_by_year(const std::vector<PersonRecord>& persons) {
  YearSplit out;
  for (const auto& p : persons) {
    if (p.travel_year >= 2018)
      out.validation.push_back(p);
    else
      out.train.push_back(p);
  }
  return out;
}

}  // namespace actgen
