#pragma once

// Seeded synthetic travel survey with planted structure: group-dependent
// person attributes, primary types driven by day of week, work-from-home
// and household composition, and time bands shifted by a latent region that
// is only visible through the home postcode.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/csv.hpp"
#include "actgen/ingest.hpp"
#include "actgen/rng.hpp"
#include "actgen/schedule.hpp"

namespace actgen {

struct SynthSpec {
  std::size_t n_persons = 1000;
  double worker_share = 0.57, student_share = 0.24, nonworker_share = 0.19;
  int first_year = 2012, last_year = 2018;
  double work_start_mean = 540, work_start_sd = 45;
  double work_end_mean = 1020, work_end_sd = 45;
  double school_start_mean = 525, school_start_sd = 20;
  double stop_before_kids_p = 0.7;  // pickup/dropoff before work when kids live at home
  double stop_after_p = 0.35;
  double sub_tour_p = 0.3;
  double evening_secondary_p = 0.4;
  double corruption_rate = 0.0;
  std::size_t latent_regions = 6;
  std::uint64_t seed = 1;

  void validate() const {
    const double total = worker_share + student_share + nonworker_share;
    if (std::abs(total - 1.0) > 1e-9 || worker_share < 0 || student_share < 0 || nonworker_share < 0)
      throw Error(ErrorCode::ConfigError, "synthdata", "group shares must be non-negative and sum to 1");
    if (first_year > last_year) throw Error(ErrorCode::ConfigError, "synthdata", "empty year range");
    if (corruption_rate < 0 || corruption_rate > 1)
      throw Error(ErrorCode::ConfigError, "synthdata", "corruption rate must be in [0, 1]");
    if (latent_regions == 0) throw Error(ErrorCode::ConfigError, "synthdata", "need at least one latent region");
  }
};

struct GroundTruth {
  std::string person_id;
  PersonGroup group = PersonGroup::Worker;
  DailyPattern pattern;
  bool corrupt = false;
  std::size_t region = 0;
  std::string corruption;  // kind of corruption applied, empty when clean
};

struct SynthSurvey {
  std::vector<PersonRecord> persons;
  std::vector<TripRecord> trips;
  std::vector<GroundTruth> truth;
};

/// Latent region of a postcode (index into the postcode vocabulary).
inline std::size_t latent_region(std::size_t postcode_index, std::size_t regions = 6) {
  return (postcode_index * 37 + 11) % regions;
}

/// Start-time offset of a latent region: symmetric around zero, 18 min apart.
inline double region_offset(std::size_t region, std::size_t regions = 6) {
  if (regions <= 1) return 0.0;
  return 18.0 * (static_cast<double>(region) - static_cast<double>(regions - 1) / 2.0);
}

namespace detail {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

inline double minutes(double v) { return std::round(v); }

struct SynthPerson {
  PersonRecord record;
  std::size_t region = 0;
  bool weekday = true;
  bool wfh = false;
};

inline SynthPerson draw_person(Rng& rng, const SynthSpec& spec, PersonGroup group, std::size_t index) {
  SynthPerson sp;
  PersonRecord& p = sp.record;
  auto vocab = [](const char* name) -> const std::vector<std::string>& { return person_column(name).vocab; };
  char id[32];
  std::snprintf(id, sizeof id, "P%06zu", index + 1);
  p.person_id = id;
  p.person_type = person_column("PersonType").vocab[static_cast<std::size_t>(group)];
  p.gender = pick(rng, vocab("Gender"));
  p.main_occupation = pick(rng, vocab("MainOccupation"));
  p.anzsco2 = pick(rng, vocab("ANZSCO2"));
  p.main_industry = pick(rng, vocab("MainIndustry"));
  p.anzsic2 = pick(rng, vocab("ANZSIC2"));
  p.own_dwell = pick(rng, vocab("OwnDwell"));
  p.travel_year = rng.integer(spec.first_year, spec.last_year);
  p.travel_month = rng.integer(1, 12);
  const auto& days = vocab("TravelDay");
  p.travel_day = days[rng.index(days.size())];
  sp.weekday = p.travel_day != "Saturday" && p.travel_day != "Sunday";
  p.num_persons = rng.integer(1, 6);
  p.num_kids = rng.bernoulli(0.45) ? rng.integer(1, std::min(3, static_cast<int>(p.num_persons))) : 0;
  if (p.num_kids >= p.num_persons) p.num_kids = p.num_persons - 1;
  p.num_fulltime_workers = rng.integer(0, std::min(2, static_cast<int>(p.num_persons)));
  p.num_parttime_workers = rng.integer(0, 1);
  p.num_casual_workers = rng.integer(0, 1);
  p.num_cars = rng.integer(0, 3);
  p.num_bikes = rng.integer(0, 4);
  p.hh_income = std::round(rng.uniform(300.0, 5000.0) * 10.0) / 10.0;
  p.years_lived = rng.integer(0, 40);
  p.home_lga = pick(rng, vocab("HomeLGA"));
  const auto& postcodes = vocab("HomePostcode");
  const std::size_t pc = rng.index(postcodes.size());
  p.home_postcode = postcodes[pc];
  p.home_region = pc < 200 ? "Metropolitan" : "Regional";
  sp.region = latent_region(pc, spec.latent_regions);

  switch (group) {
    case PersonGroup::Worker:
      p.age = rng.integer(18, 70);
      p.car_licence = rng.bernoulli(0.9) ? "Yes" : "No";
      p.main_role = rng.bernoulli(0.7) ? "Full-time worker" : "Part-time worker";
      sp.wfh = rng.bernoulli(0.1);
      p.work_type = sp.wfh ? "Work from home" : pick(rng, std::vector<std::string>{"Fixed hours", "Flexible hours", "Roster shifts"});
      p.emp_type = pick(rng, std::vector<std::string>{"Permanent", "Fixed-term", "Casual", "Self-employed"});
      p.income_level = vocab("PersonIncomeLevel")[static_cast<std::size_t>(rng.integer(2, 10))];
      break;
    case PersonGroup::Student:
      p.age = rng.integer(5, 30);
      p.car_licence = p.age >= 18 && rng.bernoulli(0.5) ? "Yes" : "No";
      p.main_role = p.age < 18 ? "Pupil" : "Student";
      p.work_type = "Not in workforce";
      p.emp_type = "Not employed";
      p.income_level = vocab("PersonIncomeLevel")[static_cast<std::size_t>(rng.integer(0, 2))];
      break;
    case PersonGroup::Nonworker:
      p.age = rng.integer(18, 95);
      p.car_licence = rng.bernoulli(0.7) ? "Yes" : "No";
      p.main_role = p.age >= 65 ? "Retired" : "Nonworker";
      p.work_type = "Not in workforce";
      p.emp_type = "Not employed";
      p.income_level = vocab("PersonIncomeLevel")[static_cast<std::size_t>(rng.integer(0, 4))];
      break;
  }
  return sp;
}

inline Activity act(ActivityGroup g, double start, double end, std::string raw) {
  return Activity{g, start, end, std::move(raw)};
}

inline std::string raw_for(ActivityGroup g, Rng& rng) {
  switch (g) {
    case ActivityGroup::M: return rng.bernoulli(0.5) ? "Shopping" : "Personal business";
    case ActivityGroup::D: return rng.bernoulli(0.5) ? "Recreation" : "Social";
    case ActivityGroup::P: return "Pick up or Drop off";
    default: return "Work";
  }
}

/// A person's planted day: the pattern, plus extra short stops that the
/// builder is expected to prune.
struct PlantedDay {
  DailyPattern pattern;
  std::vector<Activity> extra_after;  // after stop_after, in the primary tour
};

inline ActivityGroup planted_primary_type(const SynthPerson& sp, PersonGroup group, Rng& rng) {
  const bool kids = sp.record.num_kids > 0;
  auto leisure = [&](bool m_side) {
    return rng.bernoulli(0.9) == m_side ? ActivityGroup::M : ActivityGroup::D;
  };
  switch (group) {
    case PersonGroup::Worker:
      if (sp.weekday && !sp.wfh) return rng.bernoulli(0.97) ? ActivityGroup::W : leisure(kids);
      return leisure(kids);
    case PersonGroup::Student:
      if (sp.weekday) return rng.bernoulli(0.97) ? ActivityGroup::W : leisure(kids);
      return leisure(kids);
    case PersonGroup::Nonworker:
      return leisure(sp.region < 3);
  }
  return ActivityGroup::M;
}

inline PlantedDay plant_day(const SynthSpec& spec, const SynthPerson& sp, PersonGroup group, Rng& rng) {
  PlantedDay day;
  PrimaryPattern& pp = day.pattern.primary_pattern;
  const double offset = region_offset(sp.region, spec.latent_regions);
  const ActivityGroup type = planted_primary_type(sp, group, rng);
  const bool kids = sp.record.num_kids > 0;

  double start = 0, end = 0;
  std::string raw;
  if (type == ActivityGroup::W && group == PersonGroup::Worker) {
    // the region offsets carry part of the start-time variance
    const double offset_var = [&] {
      double v = 0;
      for (std::size_t r = 0; r < spec.latent_regions; ++r) v += region_offset(r, spec.latent_regions) * region_offset(r, spec.latent_regions);
      return v / static_cast<double>(spec.latent_regions);
    }();
    const double resid_sd = std::sqrt(std::max(spec.work_start_sd * spec.work_start_sd - offset_var, 1.0));
    start = minutes(std::clamp(spec.work_start_mean + offset + rng.normal(0, resid_sd), 300.0, 780.0));
    const double slope = 0.7;
    const double end_sd = std::sqrt(std::max(spec.work_end_sd * spec.work_end_sd -
                                                 slope * slope * spec.work_start_sd * spec.work_start_sd, 1.0));
    end = minutes(spec.work_end_mean + slope * (start - spec.work_start_mean) + rng.normal(0, end_sd));
    end = std::clamp(end, start + 240, 1320.0);
    raw = "Work";
  } else if (type == ActivityGroup::W) {
    start = minutes(std::clamp(rng.normal(spec.school_start_mean, spec.school_start_sd), 420.0, 660.0));
    end = minutes(std::clamp(rng.normal(930, 30), start + 240, 1080.0));
    raw = "Study";
  } else if (type == ActivityGroup::M) {
    start = minutes(std::clamp(rng.normal(600 + offset, 60), 420.0, 900.0));
    end = start + rng.integer(60, 180);
    raw = raw_for(ActivityGroup::M, rng);
  } else {
    start = minutes(std::clamp(rng.normal(780 + offset, 90), 480.0, 1080.0));
    end = start + rng.integer(90, 240);
    raw = raw_for(ActivityGroup::D, rng);
  }
  pp.primary = act(type, start, end, raw);
  const double primary_duration = end - start;

  // duration cap for M activities outside the primary: M must stay shorter
  // than an M primary, and below the maintenance threshold under a D primary
  auto m_duration = [&](Rng& r) -> double {
    if (type == ActivityGroup::D) return r.integer(10, 25);
    return r.integer(20, 50);
  };
  auto secondary_type = [&](Rng& r) {
    const double u = r.uniform();
    return u < 0.45 ? ActivityGroup::M : (u < 0.8 ? ActivityGroup::D : ActivityGroup::P);
  };
  auto duration_for = [&](ActivityGroup g, Rng& r) -> double {
    if (g == ActivityGroup::M) return m_duration(r);
    if (g == ActivityGroup::P) return r.integer(5, 15);
    // D stays shorter than a D primary
    const double hi = type == ActivityGroup::D ? std::min(60.0, primary_duration - 10) : 60.0;
    return r.integer(20, static_cast<int>(hi));
  };

  // stop before
  const double before_p = type == ActivityGroup::W ? (kids ? spec.stop_before_kids_p : 0.1) : 0.2;
  if (rng.bernoulli(before_p)) {
    const ActivityGroup g = type == ActivityGroup::W && kids ? ActivityGroup::P : (rng.bernoulli(0.5) ? ActivityGroup::P : ActivityGroup::M);
    const double dur = duration_for(g, rng);
    const double gap = rng.integer(10, 25);
    const double s = start - gap - dur;
    if (s >= 60) pp.stop_before = act(g, s, s + dur, raw_for(g, rng));
  }

  // sub-tour, only around a midday break of a work/study primary
  if (type == ActivityGroup::W && rng.bernoulli(group == PersonGroup::Worker ? spec.sub_tour_p : 0.1)) {
    const ActivityGroup g = rng.bernoulli(0.7) ? ActivityGroup::M : ActivityGroup::D;
    const double dur = g == ActivityGroup::M ? rng.integer(20, 45) : rng.integer(20, 45);
    const double s = minutes(rng.normal(730, 20));
    const double gap_in = rng.integer(5, 15), gap_out = rng.integer(5, 15);
    if (s - gap_in > start + 30 && s + dur + gap_out < end - 30) pp.sub_tour = act(g, s, s + dur, raw_for(g, rng));
  }

  // stop after
  if (rng.bernoulli(spec.stop_after_p)) {
    const ActivityGroup g = secondary_type(rng);
    const double dur = duration_for(g, rng);
    const double s = end + rng.integer(10, 25);
    if (s + dur <= 1380) {
      pp.stop_after = act(g, s, s + dur, raw_for(g, rng));
      if (dur > 15 && rng.bernoulli(0.15)) {
        const double es = s + dur + rng.integer(5, 10);
        const double ed = rng.integer(5, std::min(10, static_cast<int>(dur) - 1));
        day.extra_after.push_back(act(ActivityGroup::P, es, es + ed, "Pick up or Drop off"));
      }
    }
  }

  // one secondary tour in the evening (or afternoon after a morning primary)
  const double secondary_p = group == PersonGroup::Worker ? spec.evening_secondary_p : 0.3;
  if (rng.bernoulli(secondary_p)) {
    double tour_end = pp.tour_end();
    for (const auto& e : day.extra_after) tour_end = std::max(tour_end, e.end);
    const ActivityGroup g = type == ActivityGroup::W ? ActivityGroup::D : secondary_type(rng);
    const double dur = duration_for(g, rng);
    const double earliest = tour_end + 60;
    const double s = minutes(std::max(earliest, rng.normal(1230, 30)));
    if (s < 1400 && s + dur <= 1500) day.pattern.secondary.push_back(act(g, s, s + dur, raw_for(g, rng)));
  }
  return day;
}

/// Lays the planted day out as home-based trips with positive travel times.
inline std::vector<TripRecord> day_to_trips(const std::string& id, const PlantedDay& day, Rng& rng) {
  const PrimaryPattern& pp = day.pattern.primary_pattern;
  std::vector<std::vector<Activity>> tours;
  std::vector<Activity> main;
  if (pp.stop_before) main.push_back(*pp.stop_before);
  if (pp.sub_tour) {
    Activity first = pp.primary, second = pp.primary;
    first.end = pp.sub_tour->start - rng.integer(5, 15);
    second.start = pp.sub_tour->end + rng.integer(5, 15);
    main.push_back(first);
    main.push_back(*pp.sub_tour);
    main.push_back(second);
  } else {
    main.push_back(pp.primary);
  }
  if (pp.stop_after) main.push_back(*pp.stop_after);
  for (const auto& e : day.extra_after) main.push_back(e);
  tours.push_back(std::move(main));
  for (const auto& a : day.pattern.secondary) tours.push_back({a});
  std::stable_sort(tours.begin(), tours.end(), [](const auto& a, const auto& b) { return a.front().start < b.front().start; });

  std::vector<TripRecord> trips;
  for (const auto& tour : tours) {
    std::string where = "Home";
    for (std::size_t i = 0; i < tour.size(); ++i) {
      const Activity& a = tour[i];
      const double depart = i == 0 ? a.start - rng.integer(10, 30) : tour[i - 1].end;
      trips.push_back({id, where, a.raw_type, depart, a.start});
      where = a.raw_type;
    }
    const double back = tour.back().end;
    trips.push_back({id, where, "Home", back, back + rng.integer(10, 30)});
  }
  return trips;
}

/// Breaks one clean trip chain so that the cleaner must reject it.
inline std::string corrupt_trips(std::vector<TripRecord>& trips, Rng& rng) {
  const std::size_t kind = rng.index(4);
  switch (kind) {
    case 0:  // overlapping trips
      if (trips.size() >= 2) {
        trips[0].arrive = trips[1].depart + 5;
        return "Overlap";
      }
      [[fallthrough]];
    case 1:  // zero-length trip
      trips.back().arrive = trips.back().depart;
      return "NonPositiveTrip";
    case 2:  // day never returns home
      trips.back().dest_purpose = trips.back().origin_purpose == "Shopping" ? "Social" : "Shopping";
      return "NotHomeAnchored";
    default:  // purpose outside the lookup
      trips.front().dest_purpose = "Teleport";
      if (trips.size() > 1) trips[1].origin_purpose = "Teleport";
      return "UnknownPurpose";
  }
}

}  // namespace detail

inline SynthSurvey generate_synthetic_survey(const SynthSpec& spec) {
  spec.validate();
  SynthSurvey out;
  const std::vector<double> mix{spec.worker_share, spec.student_share, spec.nonworker_share};
  std::vector<std::vector<TripRecord>> per_person;
  for (std::size_t i = 0; i < spec.n_persons; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    const PersonGroup group = kAllPersonGroups[rng.categorical(mix)];
    detail::SynthPerson sp = detail::draw_person(rng, spec, group, i);
    detail::PlantedDay day = detail::plant_day(spec, sp, group, rng);
    per_person.push_back(detail::day_to_trips(sp.record.person_id, day, rng));
    out.truth.push_back({sp.record.person_id, group, day.pattern, false, sp.region, {}});
    out.persons.push_back(std::move(sp.record));
  }

  const std::size_t n_corrupt = static_cast<std::size_t>(std::floor(spec.corruption_rate * static_cast<double>(spec.n_persons)));
  std::vector<std::size_t> order(spec.n_persons);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng crng(derive_seed(spec.seed, 0x636f7272ULL));
  crng.shuffle(order);
  for (std::size_t k = 0; k < n_corrupt; ++k) {
    const std::size_t i = order[k];
    out.truth[i].corrupt = true;
    out.truth[i].corruption = detail::corrupt_trips(per_person[i], crng);
  }
  for (auto& trips : per_person) out.trips.insert(out.trips.end(), trips.begin(), trips.end());
  return out;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& g) {
  return {{"person_id", g.person_id},
          {"group", to_string(g.group)},
          {"corrupt", g.corrupt},
          {"corruption", g.corruption},
          {"latent_region", g.region},
          {"pattern", pattern_to_json(g.pattern)}};
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth g;
  g.person_id = j.at("person_id");
  g.group = person_group_from_string(j.at("group").get<std::string>());
  g.corrupt = j.at("corrupt");
  g.corruption = j.at("corruption");
  g.region = j.at("latent_region");
  g.pattern = pattern_from_json(j.at("pattern"));
  return g;
}

/// persons.csv, trips.csv and ground_truth.jsonl under `dir`.
inline void write_synthetic_survey(const std::filesystem::path& dir, const SynthSurvey& s) {
  std::ostringstream persons, trips, truth;
  write_persons_csv(persons, s.persons);
  write_trips_csv(trips, s.trips);
  for (const auto& g : s.truth) truth << ground_truth_to_json(g).dump() << '\n';
  write_text_file(dir / "persons.csv", persons.str());
  write_text_file(dir / "trips.csv", trips.str());
  write_text_file(dir / "ground_truth.jsonl", truth.str());
}

inline std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<GroundTruth> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(ground_truth_from_json(nlohmann::json::parse(line)));
  return out;
}

}  // namespace actgen
