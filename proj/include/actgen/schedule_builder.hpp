#pragma once

// Turns an activity schedule into a tour-based daily pattern: one primary
// activity with its stop-before, stop-after and work-based sub-tour, plus
// the activities of the remaining home-based tours.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actgen/csv.hpp"
#include "actgen/error.hpp"
#include "actgen/schedule.hpp"

namespace actgen {

/// Raw trip purpose -> activity group. Lookup is case-insensitive; home
/// purposes mark tour boundaries and never become activities.
class PurposeTable {
 public:
  static PurposeTable defaults() {
    PurposeTable t;
    t.add_home("Home");
    for (auto s : {"Work", "Study"}) t.add(s, ActivityGroup::W);
    for (auto s : {"Shopping", "Personal business"}) t.add(s, ActivityGroup::M);
    for (auto s : {"Recreation", "Social", "Other"}) t.add(s, ActivityGroup::D);
    for (auto s : {"Pick up or Drop off", "Pick up", "Drop off", "Pickup-dropoff"}) t.add(s, ActivityGroup::P);
    return t;
  }

  void add(std::string_view purpose, ActivityGroup g) { groups_[to_lower(purpose)] = g; }
  void add_home(std::string_view purpose) { homes_.push_back(to_lower(purpose)); }

  bool is_home(std::string_view purpose) const {
    const auto key = to_lower(purpose);
    for (const auto& h : homes_)
      if (h == key) return true;
    return false;
  }

  std::optional<ActivityGroup> find(std::string_view purpose) const {
    auto it = groups_.find(to_lower(purpose));
    if (it == groups_.end()) return std::nullopt;
    return it->second;
  }

  bool knows(std::string_view purpose) const { return is_home(purpose) || find(purpose).has_value(); }

 private:
  std::map<std::string, ActivityGroup> groups_;
  std::vector<std::string> homes_;
};

inline ActivityGroup classify_activity_group(std::string_view raw_type, const PurposeTable& table) {
  if (auto g = table.find(raw_type)) return *g;
  throw Error(ErrorCode::UnknownPurpose, "schedule-builder", "unknown purpose '" + std::string(raw_type) + "'");
}

inline ActivityGroup classify_activity_group(std::string_view raw_type) {
  static const PurposeTable table = PurposeTable::defaults();
  return classify_activity_group(raw_type, table);
}

struct PrimaryThresholds {
  double maintenance_min = 30.0;
  double discretionary_min = 30.0;
};

namespace detail {

/// Longest activity among indices accepted by `pred`; ties keep the
/// earliest start (schedules are time-ordered, so the first seen).
template <typename Pred>
std::optional<std::size_t> longest_where(const std::vector<Activity>& acts, Pred pred) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (!pred(i, acts[i])) continue;
    if (!best || activity_duration(acts[i]) > activity_duration(acts[*best])) best = i;
  }
  return best;
}

}  // namespace detail

/// Index of the primary activity: any W (longest), else the longest M above
/// the maintenance threshold, else the longest D above the discretionary
/// threshold, else the longest M or D. P never qualifies.
inline std::size_t select_primary_index(const ActivitySchedule& s, const PrimaryThresholds& t, PersonGroup g) {
  const auto& acts = s.activities;
  if (acts.empty())
    throw Error(ErrorCode::NoPrimaryCandidate, "schedule-builder", "empty schedule for " + s.person_id);
  auto of_group = [](ActivityGroup want, double min_duration) {
    return [=](std::size_t, const Activity& a) { return a.group == want && activity_duration(a) >= min_duration; };
  };
  if (auto w = detail::longest_where(acts, of_group(ActivityGroup::W, 0.0))) {
    if (g == PersonGroup::Nonworker)
      throw Error(ErrorCode::InvalidArgument, "schedule-builder",
                  "subsistence activity in a nonworker schedule (" + s.person_id + ")");
    return *w;
  }
  if (auto m = detail::longest_where(acts, of_group(ActivityGroup::M, t.maintenance_min))) return *m;
  if (auto d = detail::longest_where(acts, of_group(ActivityGroup::D, t.discretionary_min))) return *d;
  if (auto md = detail::longest_where(acts, [](std::size_t, const Activity& a) {
        return a.group == ActivityGroup::M || a.group == ActivityGroup::D;
      }))
    return *md;
  throw Error(ErrorCode::NoPrimaryCandidate, "schedule-builder",
              "schedule of " + s.person_id + " has only pickup-dropoff activities");
}

inline Activity select_primary(const ActivitySchedule& s, const PrimaryThresholds& t, PersonGroup g) {
  return s.activities[select_primary_index(s, t, g)];
}

/// Where every activity of a schedule went when the pattern was built.
enum class ActivityRole { Primary, SubTour, StopBefore, StopAfter, Secondary, Dropped };

struct PatternLayout {
  PrimaryPattern pattern;
  int primary_tour = 0;
  std::vector<ActivityRole> roles;  // parallel to schedule activities
};

/// Builds the primary pattern around `primary_index` and records the role of
/// every activity. W episodes of the same raw type in the primary tour,
/// separated only by non-W excursions, merge into one primary whose longest
/// excursion becomes the sub-tour.
inline PatternLayout layout_primary_pattern(const ActivitySchedule& s, std::size_t primary_index) {
  const auto& acts = s.activities;
  if (primary_index >= acts.size())
    throw Error(ErrorCode::InvalidArgument, "schedule-builder", "primary index out of range");
  const Activity& seed = acts[primary_index];
  const int tour = s.tour_of(primary_index);

  PatternLayout out;
  out.primary_tour = tour;
  out.roles.assign(acts.size(), ActivityRole::Secondary);

  std::size_t lo = primary_index, hi = primary_index;
  if (seed.group == ActivityGroup::W) {
    auto mergeable = [&](std::size_t j) {
      return s.tour_of(j) == tour && acts[j].group == ActivityGroup::W && acts[j].raw_type == seed.raw_type;
    };
    // extend backwards over non-W excursions to the next matching W
    for (std::size_t j = lo; j-- > 0 && s.tour_of(j) == tour;) {
      if (acts[j].group == ActivityGroup::W) {
        if (!mergeable(j)) break;
        lo = j;
      }
    }
    for (std::size_t j = hi + 1; j < acts.size() && s.tour_of(j) == tour; ++j) {
      if (acts[j].group == ActivityGroup::W) {
        if (!mergeable(j)) break;
        hi = j;
      }
    }
  }

  Activity primary = seed;
  primary.start = acts[lo].start;
  primary.end = acts[hi].end;
  out.pattern.primary = primary;

  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (s.tour_of(i) != tour) continue;
    out.roles[i] = ActivityRole::Dropped;
    if (i >= lo && i <= hi && acts[i].group == ActivityGroup::W) out.roles[i] = ActivityRole::Primary;
  }

  auto in_tour_non_w = [&](std::size_t i, const Activity& a) {
    return s.tour_of(i) == tour && a.group != ActivityGroup::W && is_secondary_group(a.group);
  };
  if (seed.group == ActivityGroup::W && lo != hi) {
    if (auto sub = detail::longest_where(
            acts, [&](std::size_t i, const Activity& a) { return i > lo && i < hi && in_tour_non_w(i, a); })) {
      out.pattern.sub_tour = acts[*sub];
      out.roles[*sub] = ActivityRole::SubTour;
    }
  }
  if (auto before = detail::longest_where(
          acts, [&](std::size_t i, const Activity& a) { return i < lo && in_tour_non_w(i, a); })) {
    out.pattern.stop_before = acts[*before];
    out.roles[*before] = ActivityRole::StopBefore;
  }
  if (auto after = detail::longest_where(
          acts, [&](std::size_t i, const Activity& a) { return i > hi && in_tour_non_w(i, a); })) {
    out.pattern.stop_after = acts[*after];
    out.roles[*after] = ActivityRole::StopAfter;
  }

  // Secondary tours only carry M/D/P; a W there has no slot in the pattern.
  for (std::size_t i = 0; i < acts.size(); ++i)
    if (out.roles[i] == ActivityRole::Secondary && !is_secondary_group(acts[i].group))
      out.roles[i] = ActivityRole::Dropped;
  return out;
}

inline PrimaryPattern build_primary_pattern(const ActivitySchedule& s, const Activity& primary) {
  for (std::size_t i = 0; i < s.activities.size(); ++i)
    if (s.activities[i] == primary) return layout_primary_pattern(s, i).pattern;
  throw Error(ErrorCode::InvalidArgument, "schedule-builder", "primary activity is not part of the schedule");
}

/// Activities outside the primary home-based tour, order preserved.
inline std::vector<Activity> extract_secondary(const ActivitySchedule& s, const PrimaryPattern& p) {
  std::optional<int> primary_tour;
  for (std::size_t i = 0; i < s.activities.size(); ++i) {
    const Activity& a = s.activities[i];
    if (a.group == p.primary.group && a.start == p.primary.start) {
      primary_tour = s.tour_of(i);
      break;
    }
  }
  if (!primary_tour)
    throw Error(ErrorCode::InvalidArgument, "schedule-builder", "pattern was not built from this schedule");
  std::vector<Activity> out;
  for (std::size_t i = 0; i < s.activities.size(); ++i)
    if (s.tour_of(i) != *primary_tour && is_secondary_group(s.activities[i].group)) out.push_back(s.activities[i]);
  return out;
}

inline DailyPattern build_daily_pattern(const ActivitySchedule& s, const PrimaryThresholds& t, PersonGroup g) {
  const std::size_t idx = select_primary_index(s, t, g);
  DailyPattern d;
  d.primary_pattern = layout_primary_pattern(s, idx).pattern;
  d.secondary = extract_secondary(s, d.primary_pattern);
  auto violations = validate_pattern(d);
  if (!violations.empty()) {
    std::string msg = "pattern for " + s.person_id + " is invalid:";
    for (const auto& v : violations) msg += " " + std::string(to_string(v.kind));
    throw Error(ErrorCode::InvalidPattern, "schedule-builder", msg);
  }
  return d;
}

/// Inverse of the builder: lays a pattern back out as a schedule, one
/// home-based tour per secondary activity. A sub-tour splits the primary
/// into two episodes around the excursion.
inline ActivitySchedule flatten_pattern(const DailyPattern& d, std::string person_id = {}) {
  const PrimaryPattern& p = d.primary_pattern;
  std::vector<std::vector<Activity>> tours;
  std::vector<Activity> primary_tour;
  if (p.stop_before) primary_tour.push_back(*p.stop_before);
  if (p.sub_tour) {
    Activity first = p.primary, second = p.primary;
    first.end = p.sub_tour->start;
    second.start = p.sub_tour->end;
    primary_tour.push_back(first);
    primary_tour.push_back(*p.sub_tour);
    primary_tour.push_back(second);
  } else {
    primary_tour.push_back(p.primary);
  }
  if (p.stop_after) primary_tour.push_back(*p.stop_after);
  tours.push_back(std::move(primary_tour));
  for (const auto& a : d.secondary) tours.push_back({a});
  std::stable_sort(tours.begin(), tours.end(),
                   [](const auto& a, const auto& b) { return a.front().start < b.front().start; });

  ActivitySchedule s;
  s.person_id = std::move(person_id);
  for (std::size_t t = 0; t < tours.size(); ++t)
    for (const auto& a : tours[t]) {
      s.activities.push_back(a);
      s.tour.push_back(static_cast<int>(t));
    }
  return s;
}

}  // namespace actgen
