#pragma once

// Domain types for activities, tours, stops and the daily pattern built
// around one primary activity.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/error.hpp"

namespace actgen {

inline constexpr double kDayMinutes = 1440.0;
/// Latest legal end time: activities may run to 04:48 the next day.
inline constexpr double kMaxEndMinutes = 1728.0;

/// W subsistence, M maintenance, D discretionary, P pickup-dropoff.
/// ZeroStop and NoneSubTour are outcome classes, never attached to an
/// activity with times.
enum class ActivityGroup { W, M, D, P, ZeroStop, NoneSubTour };

enum class PersonGroup { Worker, Student, Nonworker };

inline constexpr PersonGroup kAllPersonGroups[] = {PersonGroup::Worker, PersonGroup::Student,
                                                   PersonGroup::Nonworker};

inline std::string_view to_string(ActivityGroup g) {
  switch (g) {
    case ActivityGroup::W: return "W";
    case ActivityGroup::M: return "M";
    case ActivityGroup::D: return "D";
    case ActivityGroup::P: return "P";
    case ActivityGroup::ZeroStop: return "ZERO_STOP";
    case ActivityGroup::NoneSubTour: return "NONE";
  }
  return "?";
}

inline ActivityGroup activity_group_from_string(std::string_view s) {
  if (s == "W") return ActivityGroup::W;
  if (s == "M") return ActivityGroup::M;
  if (s == "D") return ActivityGroup::D;
  if (s == "P") return ActivityGroup::P;
  if (s == "ZERO_STOP") return ActivityGroup::ZeroStop;
  if (s == "NONE") return ActivityGroup::NoneSubTour;
  throw Error(ErrorCode::InvalidArgument, "schedule-model", "unknown activity group '" + std::string(s) + "'");
}

inline std::string_view to_string(PersonGroup g) {
  switch (g) {
    case PersonGroup::Worker: return "worker";
    case PersonGroup::Student: return "student";
    case PersonGroup::Nonworker: return "nonworker";
  }
  return "?";
}

inline PersonGroup person_group_from_string(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "worker") return PersonGroup::Worker;
  if (lower == "student") return PersonGroup::Student;
  if (lower == "nonworker") return PersonGroup::Nonworker;
  throw Error(ErrorCode::InvalidArgument, "schedule-model", "unknown person group '" + std::string(s) + "'");
}

/// Primary activity groups legal for a person group.
inline std::vector<ActivityGroup> primary_groups_for(PersonGroup g) {
  if (g == PersonGroup::Nonworker) return {ActivityGroup::M, ActivityGroup::D};
  return {ActivityGroup::W, ActivityGroup::M, ActivityGroup::D};
}

inline bool is_secondary_group(ActivityGroup g) {
  return g == ActivityGroup::M || g == ActivityGroup::D || g == ActivityGroup::P;
}

/// One out-of-home episode; times are minutes since midnight.
struct Activity {
  ActivityGroup group = ActivityGroup::M;
  double start = 0.0;
  double end = 0.0;
  std::string raw_type;

  friend bool operator==(const Activity&, const Activity&) = default;
};

inline double activity_duration(const Activity& a) { return a.end - a.start; }

/// Time validity of a single activity: 0 <= start < 1440, start < end <= 1728.
inline bool activity_times_valid(const Activity& a) {
  return a.start >= 0.0 && a.start < kDayMinutes && a.end > a.start && a.end <= kMaxEndMinutes;
}

/// A person's day as an ordered list of activities. `tour[i]` is the
/// home-based tour index of activity i (a home dwell starts a new tour);
/// when empty, all activities are taken to share one tour.
struct ActivitySchedule {
  std::string person_id;
  std::vector<Activity> activities;
  std::vector<int> tour;

  int tour_of(std::size_t i) const { return tour.empty() ? 0 : tour.at(i); }

  friend bool operator==(const ActivitySchedule&, const ActivitySchedule&) = default;
};

struct PrimaryPattern {
  Activity primary;
  std::optional<Activity> stop_before;
  std::optional<Activity> stop_after;
  std::optional<Activity> sub_tour;

  ActivityGroup stop_before_group() const { return stop_before ? stop_before->group : ActivityGroup::ZeroStop; }
  ActivityGroup stop_after_group() const { return stop_after ? stop_after->group : ActivityGroup::ZeroStop; }
  ActivityGroup sub_tour_group() const { return sub_tour ? sub_tour->group : ActivityGroup::NoneSubTour; }

  /// Interval covered by the home-based primary tour.
  double tour_start() const { return stop_before ? std::min(stop_before->start, primary.start) : primary.start; }
  double tour_end() const { return stop_after ? std::max(stop_after->end, primary.end) : primary.end; }

  friend bool operator==(const PrimaryPattern&, const PrimaryPattern&) = default;
};

struct DailyPattern {
  PrimaryPattern primary_pattern;
  std::vector<Activity> secondary;

  friend bool operator==(const DailyPattern&, const DailyPattern&) = default;
};

/// Primary duration less the sub-tour excursion.
inline double primary_net_duration(const PrimaryPattern& p) {
  double d = activity_duration(p.primary);
  if (p.sub_tour) d -= activity_duration(*p.sub_tour);
  return d;
}

enum class ViolationKind {
  InvalidActivityTime,
  IllegalGroup,
  OverlapBeforePrimary,
  OverlapAfterPrimary,
  SubTourRequiresSubsistence,
  SubTourOutsidePrimary,
  SecondaryOverlapsPrimaryTour,
  SecondaryOverlap,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::InvalidActivityTime: return "InvalidActivityTime";
    case ViolationKind::IllegalGroup: return "IllegalGroup";
    case ViolationKind::OverlapBeforePrimary: return "OverlapBeforePrimary";
    case ViolationKind::OverlapAfterPrimary: return "OverlapAfterPrimary";
    case ViolationKind::SubTourRequiresSubsistence: return "SubTourRequiresSubsistence";
    case ViolationKind::SubTourOutsidePrimary: return "SubTourOutsidePrimary";
    case ViolationKind::SecondaryOverlapsPrimaryTour: return "SecondaryOverlapsPrimaryTour";
    case ViolationKind::SecondaryOverlap: return "SecondaryOverlap";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Every broken invariant of the pattern, one entry each. Empty means valid.
inline std::vector<Violation> validate_pattern(const DailyPattern& d) {
  std::vector<Violation> out;
  const PrimaryPattern& p = d.primary_pattern;
  auto check_times = [&](const Activity& a, std::string_view role) {
    if (!activity_times_valid(a))
      out.push_back({ViolationKind::InvalidActivityTime, std::string(role) + " has invalid times"});
  };
  auto check_group = [&](const Activity& a, std::string_view role, bool primary) {
    const bool ok = primary ? (a.group == ActivityGroup::W || a.group == ActivityGroup::M ||
                               a.group == ActivityGroup::D)
                            : is_secondary_group(a.group);
    if (!ok)
      out.push_back({ViolationKind::IllegalGroup,
                     std::string(role) + " has illegal group " + std::string(to_string(a.group))});
  };

  check_times(p.primary, "primary");
  check_group(p.primary, "primary", true);
  if (p.stop_before) {
    check_times(*p.stop_before, "stop_before");
    check_group(*p.stop_before, "stop_before", false);
    if (p.stop_before->end > p.primary.start)
      out.push_back({ViolationKind::OverlapBeforePrimary, "stop_before ends after primary starts"});
  }
  if (p.stop_after) {
    check_times(*p.stop_after, "stop_after");
    check_group(*p.stop_after, "stop_after", false);
    if (p.primary.end > p.stop_after->start)
      out.push_back({ViolationKind::OverlapAfterPrimary, "stop_after starts before primary ends"});
  }
  if (p.sub_tour) {
    check_times(*p.sub_tour, "sub_tour");
    check_group(*p.sub_tour, "sub_tour", false);
    if (p.primary.group != ActivityGroup::W)
      out.push_back({ViolationKind::SubTourRequiresSubsistence, "sub_tour on a non-subsistence primary"});
    const Activity& s = *p.sub_tour;
    if (!(p.primary.start < s.start && s.start < s.end && s.end < p.primary.end))
      out.push_back({ViolationKind::SubTourOutsidePrimary, "sub_tour not strictly inside primary"});
  }

  const double lo = p.tour_start();
  const double hi = p.tour_end();
  for (std::size_t i = 0; i < d.secondary.size(); ++i) {
    const Activity& a = d.secondary[i];
    const std::string role = "secondary[" + std::to_string(i) + "]";
    check_times(a, role);
    check_group(a, role, false);
    if (a.start < hi && a.end > lo)
      out.push_back({ViolationKind::SecondaryOverlapsPrimaryTour, role + " overlaps the primary tour"});
    if (i > 0 && d.secondary[i - 1].end > a.start)
      out.push_back({ViolationKind::SecondaryOverlap, role + " overlaps the previous secondary activity"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json activity_to_json(const Activity& a) {
  return {{"group", to_string(a.group)}, {"start", a.start}, {"end", a.end}, {"raw_type", a.raw_type}};
}

inline Activity activity_from_json(const nlohmann::json& j) {
  Activity a;
  a.group = activity_group_from_string(j.at("group").get<std::string>());
  a.start = j.at("start").get<double>();
  a.end = j.at("end").get<double>();
  a.raw_type = j.value("raw_type", std::string{});
  return a;
}

inline nlohmann::json optional_activity_to_json(const std::optional<Activity>& a, ActivityGroup absent) {
  if (!a) return std::string(to_string(absent));
  return activity_to_json(*a);
}

inline std::optional<Activity> optional_activity_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "ZERO_STOP" || s == "NONE") return std::nullopt;
    throw Error(ErrorCode::InvalidArgument, "schedule-model", "unexpected marker '" + s + "'");
  }
  return activity_from_json(j);
}

inline nlohmann::json pattern_to_json(const DailyPattern& d) {
  const PrimaryPattern& p = d.primary_pattern;
  nlohmann::json secondary = nlohmann::json::array();
  for (const auto& a : d.secondary) secondary.push_back(activity_to_json(a));
  return {{"primary", activity_to_json(p.primary)},
          {"stop_before", optional_activity_to_json(p.stop_before, ActivityGroup::ZeroStop)},
          {"stop_after", optional_activity_to_json(p.stop_after, ActivityGroup::ZeroStop)},
          {"sub_tour", optional_activity_to_json(p.sub_tour, ActivityGroup::NoneSubTour)},
          {"secondary", std::move(secondary)}};
}

inline DailyPattern pattern_from_json(const nlohmann::json& j) {
  DailyPattern d;
  d.primary_pattern.primary = activity_from_json(j.at("primary"));
  d.primary_pattern.stop_before = optional_activity_from_json(j.at("stop_before"));
  d.primary_pattern.stop_after = optional_activity_from_json(j.at("stop_after"));
  d.primary_pattern.sub_tour = optional_activity_from_json(j.at("sub_tour"));
  for (const auto& a : j.at("secondary")) d.secondary.push_back(activity_from_json(a));
  return d;
}

inline nlohmann::json schedule_to_json(const ActivitySchedule& s) {
  nlohmann::json acts = nlohmann::json::array();
  for (std::size_t i = 0; i < s.activities.size(); ++i) {
    auto j = activity_to_json(s.activities[i]);
    j["tour"] = s.tour_of(i);
    acts.push_back(std::move(j));
  }
  return {{"person_id", s.person_id}, {"activities", std::move(acts)}};
}

inline ActivitySchedule schedule_from_json(const nlohmann::json& j) {
  ActivitySchedule s;
  s.person_id = j.at("person_id").get<std::string>();
  for (const auto& a : j.at("activities")) {
    s.activities.push_back(activity_from_json(a));
    s.tour.push_back(a.value("tour", 0));
  }
  return s;
}

}  // namespace actgen
