#pragma once

// Cascaded generation of a daily pattern from trained slot models:
// primary type -> start -> end, then stop-before, stop-after and sub-tour,
// then one secondary activity. Every correction applied to a model output
// is counted.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/error.hpp"
#include "actgen/ingest.hpp"
#include "actgen/rng.hpp"
#include "actgen/schedule.hpp"
#include "actgen/task_models.hpp"

namespace actgen {

/// Slot models of one person group, all in the variant used for generation.
struct GroupBundle {
  PersonGroup group = PersonGroup::Worker;
  std::map<Slot, SlotModel> models;

  const SlotModel& at(Slot s) const {
    auto it = models.find(s);
    if (it == models.end())
      throw Error(ErrorCode::ModelMissing, "generator",
                  std::string(to_string(group)) + " bundle has no " + std::string(to_string(s)) + " model");
    return it->second;
  }
};

struct ModelBundle {
  std::map<PersonGroup, GroupBundle> groups;

  const GroupBundle& for_group(PersonGroup g) const {
    auto it = groups.find(g);
    if (it == groups.end())
      throw Error(ErrorCode::ModelMissing, "generator", "no models for " + std::string(to_string(g)));
    return it->second;
  }
};

enum class TypeDecision { Argmax, Sample };

struct GenPolicy {
  TypeDecision types = TypeDecision::Sample;
  bool residual_noise = true;
  std::uint64_t seed = 1;
  double min_primary_duration = 15;
  std::size_t max_redraws = 8;  // noise redraws for a stop that does not fit before repairing it
};

struct RepairCounters {
  std::size_t primary_start_clamped = 0;
  std::size_t primary_end_raised = 0;
  std::size_t primary_end_clipped = 0;
  std::size_t stop_before_truncated = 0;
  std::size_t stop_before_dropped = 0;
  std::size_t stop_after_shifted = 0;
  std::size_t stop_after_dropped = 0;
  std::size_t sub_tour_clipped = 0;
  std::size_t sub_tour_dropped = 0;
  std::size_t secondary_shifted = 0;
  std::size_t secondary_dropped = 0;
  std::size_t resampled = 0;  // noise redraws; not a repair

  std::size_t total() const {
    return primary_start_clamped + primary_end_raised + primary_end_clipped + stop_before_truncated +
           stop_before_dropped + stop_after_shifted + stop_after_dropped + sub_tour_clipped + sub_tour_dropped +
           secondary_shifted + secondary_dropped;
  }

  RepairCounters& operator+=(const RepairCounters& o) {
    primary_start_clamped += o.primary_start_clamped;
    primary_end_raised += o.primary_end_raised;
    primary_end_clipped += o.primary_end_clipped;
    stop_before_truncated += o.stop_before_truncated;
    stop_before_dropped += o.stop_before_dropped;
    stop_after_shifted += o.stop_after_shifted;
    stop_after_dropped += o.stop_after_dropped;
    sub_tour_clipped += o.sub_tour_clipped;
    sub_tour_dropped += o.sub_tour_dropped;
    secondary_shifted += o.secondary_shifted;
    secondary_dropped += o.secondary_dropped;
    resampled += o.resampled;
    return *this;
  }

  nlohmann::json to_json() const {
    return {{"primary_start_clamped", primary_start_clamped}, {"primary_end_raised", primary_end_raised},
            {"primary_end_clipped", primary_end_clipped},     {"stop_before_truncated", stop_before_truncated},
            {"stop_before_dropped", stop_before_dropped},     {"stop_after_shifted", stop_after_shifted},
            {"stop_after_dropped", stop_after_dropped},       {"sub_tour_clipped", sub_tour_clipped},
            {"sub_tour_dropped", sub_tour_dropped},           {"secondary_shifted", secondary_shifted},
            {"secondary_dropped", secondary_dropped},         {"resampled", resampled},
            {"total", total()}};
  }
};

/// Every model query of one generation, in cascade order.
struct GenerationTrace {
  struct Query {
    Slot slot;
    Row row;
    std::vector<double> output;
  };
  std::vector<Query> queries;

  const Query* find(Slot s) const {
    for (const auto& q : queries)
      if (q.slot == s) return &q;
    return nullptr;
  }
};

struct Generation {
  DailyPattern pattern;
  RepairCounters repairs;
  GenerationTrace trace;
};

/// Raw type written for a generated activity.
inline std::string canonical_raw_type(ActivityGroup g, PersonGroup person) {
  switch (g) {
    case ActivityGroup::W: return person == PersonGroup::Student ? "Study" : "Work";
    case ActivityGroup::M: return "Shopping";
    case ActivityGroup::D: return "Recreation";
    case ActivityGroup::P: return "Pick up or Drop off";
    default: return std::string(to_string(g));
  }
}

/// Per-person random stream, independent of processing order.
inline Rng person_rng(const GenPolicy& policy, const std::string& person_id) {
  return Rng(derive_seed(policy.seed, fnv1a(person_id)));
}

namespace detail {

class Cascade {
 public:
  Cascade(const PersonRecord& p, const GroupBundle& bundle, const GenPolicy& policy, Rng& rng, Generation& out)
      : person_(p), group_(person_group(p)), bundle_(bundle), policy_(policy), rng_(rng), out_(out) {}

  std::vector<double> query(Slot s, const CascadeContext& ctx) {
    Row row = slot_row(s, person_, ctx);
    std::vector<double> output = bundle_.at(s).predict(row);
    out_.trace.queries.push_back({s, std::move(row), output});
    return output;
  }

  ActivityGroup decide(Slot s, std::vector<double> dist) {
    const auto classes = slot_classes(s);
    if (s == Slot::PrimaryType && group_ == PersonGroup::Nonworker) dist[class_index(s, ActivityGroup::W)] = 0.0;
    double total = 0.0;
    for (double v : dist) total += v;
    if (!(total > 0.0)) {
      // every allowed class has zero mass: fall back to the first allowed one
      for (std::size_t i = 0; i < classes.size(); ++i)
        if (!(s == Slot::PrimaryType && group_ == PersonGroup::Nonworker && classes[i] == ActivityGroup::W))
          return classes[i];
    }
    std::size_t k;
    if (policy_.types == TypeDecision::Sample)
      k = rng_.categorical(dist);
    else
      k = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    return classes[k];
  }

  double time_value(Slot s, const CascadeContext& ctx) { return noisy(s, query(s, ctx).front()); }

  double noisy(Slot s, double point) {
    if (policy_.residual_noise) point += rng_.normal(0.0, bundle_.at(s).residual_sigma);
    return std::round(point);
  }

  /// Start and duration of a stop; with residual noise the pair is redrawn
  /// until `fits` accepts it or the redraw budget runs out.
  template <typename Fits>
  std::pair<double, double> timed_stop(Slot start_slot, Slot duration_slot, const CascadeContext& ctx, Fits fits) {
    const double s0 = query(start_slot, ctx).front();
    const double d0 = query(duration_slot, ctx).front();
    double s = noisy(start_slot, s0), d = std::max(1.0, noisy(duration_slot, d0));
    for (std::size_t i = 0; policy_.residual_noise && i < policy_.max_redraws && !fits(s, d); ++i) {
      ++out_.repairs.resampled;
      s = noisy(start_slot, s0);
      d = std::max(1.0, noisy(duration_slot, d0));
    }
    return {s, d};
  }

  Activity activity(ActivityGroup g, double start, double end) const {
    return Activity{g, start, end, canonical_raw_type(g, group_)};
  }

  PersonGroup group() const { return group_; }
  Rng& rng() { return rng_; }
  RepairCounters& repairs() { return out_.repairs; }

 private:
  const PersonRecord& person_;
  PersonGroup group_;
  const GroupBundle& bundle_;
  const GenPolicy& policy_;
  Rng& rng_;
  Generation& out_;
};

}  // namespace detail

/// Stage 1: type, start and end of the primary activity.
inline Activity generate_primary_attributes(detail::Cascade& c, const GenPolicy& policy) {
  CascadeContext ctx;
  const ActivityGroup type = c.decide(Slot::PrimaryType, c.query(Slot::PrimaryType, ctx));
  ctx.primary_type = type;
  double start = c.time_value(Slot::PrimaryStart, ctx);
  const double latest_start = kDayMinutes - policy.min_primary_duration;
  if (start < 0 || start > latest_start) {
    start = std::clamp(start, 0.0, latest_start);
    ++c.repairs().primary_start_clamped;
  }
  ctx.primary_start = start;
  double end = c.time_value(Slot::PrimaryEnd, ctx);
  if (end <= start) {
    end = start + policy.min_primary_duration;
    ++c.repairs().primary_end_raised;
  }
  if (end > kMaxEndMinutes) {
    end = kMaxEndMinutes;
    ++c.repairs().primary_end_clipped;
  }
  return c.activity(type, start, end);
}

namespace detail {

inline double decode_duration(double d) { return std::max(1.0, d); }

}  // namespace detail

/// Stage 2: stop-before, stop-after and (for W primaries) the sub-tour.
inline PrimaryPattern generate_stops_and_subtour(detail::Cascade& c, const Activity& primary) {
  PrimaryPattern pp;
  pp.primary = primary;
  CascadeContext base;
  base.primary_type = primary.group;
  base.primary_start = primary.start;
  base.primary_end = primary.end;

  {
    CascadeContext ctx = base;
    ctx.primary_end.reset();
    const ActivityGroup g = c.decide(Slot::StopBeforeType, c.query(Slot::StopBeforeType, ctx));
    if (g != ActivityGroup::ZeroStop) {
      ctx.stop_type = g;
      auto [s, d] = c.timed_stop(Slot::StopBeforeStart, Slot::StopBeforeDuration, ctx,
                                 [&](double a, double b) { return a >= 0 && a + b <= primary.start; });
      double e = s + d;
      if (e > primary.start) {  // truncate to touch the primary, shift when nothing is left
        e = primary.start;
        if (s >= e) s = e - d;
        ++c.repairs().stop_before_truncated;
      }
      if (s < 0) {
        s = 0;
        ++c.repairs().stop_before_truncated;
      }
      if (s < e && s < kDayMinutes)
        pp.stop_before = c.activity(g, s, e);
      else
        ++c.repairs().stop_before_dropped;
    }
  }
  {
    CascadeContext ctx = base;
    ctx.primary_start.reset();
    const ActivityGroup g = c.decide(Slot::StopAfterType, c.query(Slot::StopAfterType, ctx));
    if (g != ActivityGroup::ZeroStop) {
      ctx.stop_type = g;
      auto [s, d] = c.timed_stop(Slot::StopAfterStart, Slot::StopAfterDuration, ctx,
                                 [&](double a, double) { return a >= primary.end && a < kDayMinutes; });
      if (s < primary.end) {
        s = primary.end;
        ++c.repairs().stop_after_shifted;
      }
      double e = std::min(s + d, kMaxEndMinutes);
      if (s < kDayMinutes && s < e)
        pp.stop_after = c.activity(g, s, e);
      else
        ++c.repairs().stop_after_dropped;
    }
  }
  if (primary.group == ActivityGroup::W) {
    CascadeContext ctx = base;
    const ActivityGroup g = c.decide(Slot::SubTourType, c.query(Slot::SubTourType, ctx));
    if (g != ActivityGroup::NoneSubTour) {
      ctx.stop_type = g;
      auto [s, d] = c.timed_stop(Slot::SubTourStart, Slot::SubTourDuration, ctx,
                                 [&](double a, double b) { return a > primary.start && a + b < primary.end; });
      double e = s + d;
      bool clipped = false;
      if (s <= primary.start) {
        s = primary.start + 1;
        e = s + d;
        clipped = true;
      }
      if (e >= primary.end) {
        e = primary.end - 1;
        clipped = true;
      }
      if (s < e) {
        pp.sub_tour = c.activity(g, s, e);
        if (clipped) ++c.repairs().sub_tour_clipped;
      } else {
        ++c.repairs().sub_tour_dropped;
      }
    }
  }
  return pp;
}

/// At most one secondary activity, placed outside the primary tour.
inline std::vector<Activity> generate_secondary(detail::Cascade& c, const PrimaryPattern& pp) {
  CascadeContext ctx;
  ctx.primary_type = pp.primary.group;
  ctx.tour_start = pp.tour_start();
  ctx.tour_end = pp.tour_end();
  const ActivityGroup g = c.decide(Slot::SecondaryType, c.query(Slot::SecondaryType, ctx));
  if (g == ActivityGroup::NoneSubTour) return {};
  ctx.stop_type = g;
  double s = c.time_value(Slot::SecondaryStart, ctx);
  const double d = detail::decode_duration(c.time_value(Slot::SecondaryDuration, ctx));
  if (s < 0) {
    s = 0;
    ++c.repairs().secondary_shifted;
  }
  const double lo = pp.tour_start(), hi = pp.tour_end();
  if (s < hi && s + d > lo) {  // shift later by the smallest offset that clears the tour
    s = hi;
    ++c.repairs().secondary_shifted;
  }
  if (s >= kDayMinutes || s + d > kMaxEndMinutes) {
    ++c.repairs().secondary_dropped;
    return {};
  }
  return {c.activity(g, s, s + d)};
}

/// Full cascade for one person with an explicit random stream.
inline Generation generate_schedule(const PersonRecord& person, const GroupBundle& bundle, const GenPolicy& policy,
                                    Rng& rng) {
  Generation out;
  detail::Cascade c(person, bundle, policy, rng, out);
  const Activity primary = generate_primary_attributes(c, policy);
  out.pattern.primary_pattern = generate_stops_and_subtour(c, primary);
  out.pattern.secondary = generate_secondary(c, out.pattern.primary_pattern);
  return out;
}

inline Generation generate_schedule(const PersonRecord& person, const ModelBundle& bundle, const GenPolicy& policy) {
  Rng rng = person_rng(policy, person.person_id);
  return generate_schedule(person, bundle.for_group(person_group(person)), policy, rng);
}

/// Aggregate statistics over many generated patterns.
struct GenerationReport {
  std::size_t persons = 0;
  std::size_t repaired_persons = 0;
  std::size_t invalid_patterns = 0;
  RepairCounters repairs;
  std::map<std::string, std::map<std::string, std::size_t>> class_counts;  // slot -> class -> count

  double repair_rate() const { return persons ? static_cast<double>(repaired_persons) / static_cast<double>(persons) : 0.0; }

  void add(const Generation& g) {
    ++persons;
    if (g.repairs.total() > 0) ++repaired_persons;
    if (!validate_pattern(g.pattern).empty()) ++invalid_patterns;
    repairs += g.repairs;
    const PrimaryPattern& pp = g.pattern.primary_pattern;
    auto count = [&](Slot s, std::string_view label) { ++class_counts[std::string(to_string(s))][std::string(label)]; };
    count(Slot::PrimaryType, to_string(pp.primary.group));
    count(Slot::StopBeforeType, pp.stop_before ? to_string(pp.stop_before->group) : to_string(ActivityGroup::ZeroStop));
    count(Slot::StopAfterType, pp.stop_after ? to_string(pp.stop_after->group) : to_string(ActivityGroup::ZeroStop));
    if (pp.primary.group == ActivityGroup::W)
      count(Slot::SubTourType, pp.sub_tour ? to_string(pp.sub_tour->group) : to_string(ActivityGroup::NoneSubTour));
    count(Slot::SecondaryType,
          g.pattern.secondary.empty() ? to_string(ActivityGroup::NoneSubTour) : to_string(g.pattern.secondary.front().group));
  }

  nlohmann::json to_json() const {
    return {{"persons", persons},
            {"repaired_persons", repaired_persons},
            {"repair_rate", repair_rate()},
            {"invalid_patterns", invalid_patterns},
            {"repairs", repairs.to_json()},
            {"class_counts", class_counts}};
  }
};

}  // namespace actgen
