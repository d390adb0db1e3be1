#include <gtest/gtest.h>

#include "actgen/ingest.hpp"
#include "actgen/schedule_builder.hpp"

using namespace actgen;

namespace {

Activity act(ActivityGroup g, double s, double e, std::string raw) { return {g, s, e, std::move(raw)}; }

// the worker day: drop-off, work with a lunchtime errand, shopping on the
// way home, an evening social outing in its own tour
std::vector<TripRecord> worker_day_trips() {
  return {
      {"w1", "Home", "Pick up or Drop off", 495, 510}, {"w1", "Pick up or Drop off", "Work", 515, 550},
      {"w1", "Work", "Shopping", 750, 770},             {"w1", "Shopping", "Work", 830, 850},
      {"w1", "Work", "Shopping", 1035, 1060},           {"w1", "Shopping", "Home", 1090, 1110},
      {"w1", "Home", "Social", 1215, 1230},             {"w1", "Social", "Home", 1290, 1305},
  };
}

ActivitySchedule schedule_of(std::vector<Activity> acts, std::vector<int> tours = {}) {
  ActivitySchedule s;
  s.person_id = "p";
  s.activities = std::move(acts);
  s.tour = std::move(tours);
  return s;
}

}  // namespace

TEST(ClassifyActivityGroup, Examples) {
  EXPECT_EQ(classify_activity_group("Work"), ActivityGroup::W);
  EXPECT_EQ(classify_activity_group("Study"), ActivityGroup::W);
  EXPECT_EQ(classify_activity_group("Recreation"), ActivityGroup::D);
  EXPECT_EQ(classify_activity_group("Personal business"), ActivityGroup::M);
  EXPECT_EQ(classify_activity_group("Pick up or Drop off"), ActivityGroup::P);
  try {
    classify_activity_group("Commuting");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPurpose);
  }
}

TEST(SelectPrimary, SubsistenceBeatsDuration) {
  auto s = schedule_of({act(ActivityGroup::W, 480, 540, "Work"), act(ActivityGroup::M, 600, 900, "Shopping")}, {0, 1});
  EXPECT_EQ(select_primary(s, {}, PersonGroup::Worker).group, ActivityGroup::W);
}

TEST(SelectPrimary, MaintenanceOutranksDiscretionary) {
  auto s = schedule_of({act(ActivityGroup::M, 480, 525, "Shopping"), act(ActivityGroup::D, 600, 690, "Social")}, {0, 1});
  EXPECT_EQ(select_primary(s, {30, 30}, PersonGroup::Nonworker).group, ActivityGroup::M);
}

TEST(SelectPrimary, FallbackLongestOfMD) {
  auto s = schedule_of({act(ActivityGroup::M, 480, 490, "Shopping"), act(ActivityGroup::D, 600, 620, "Social")}, {0, 1});
  EXPECT_EQ(select_primary(s, {30, 30}, PersonGroup::Nonworker).group, ActivityGroup::D);
}

TEST(SelectPrimary, OnlyPickupsHaveNoPrimary) {
  auto s = schedule_of({act(ActivityGroup::P, 480, 490, "Pick up")});
  try {
    select_primary(s, {}, PersonGroup::Worker);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPrimaryCandidate);
  }
}

TEST(SelectPrimary, TieGoesToEarliest) {
  auto s = schedule_of({act(ActivityGroup::D, 480, 540, "Social"), act(ActivityGroup::D, 600, 660, "Recreation")}, {0, 1});
  EXPECT_EQ(select_primary(s, {}, PersonGroup::Nonworker).start, 480);
}

TEST(SelectPrimary, RaisingThresholdNeverYieldsW) {
  auto s = schedule_of({act(ActivityGroup::M, 480, 530, "Shopping"), act(ActivityGroup::D, 600, 640, "Social")}, {0, 1});
  ActivityGroup last = select_primary(s, {30, 30}, PersonGroup::Nonworker).group;
  EXPECT_EQ(last, ActivityGroup::M);
  for (double t = 30; t < 100; t += 5) {
    const ActivityGroup g = select_primary(s, {t, 30}, PersonGroup::Nonworker).group;
    EXPECT_NE(g, ActivityGroup::W);
    if (last != ActivityGroup::M) {
      EXPECT_NE(g, ActivityGroup::M);
    }
    last = g;
  }
}

TEST(BuildDailyPattern, WorkerDay) {
  const ActivitySchedule s = trips_to_schedule(worker_day_trips());
  const DailyPattern d = build_daily_pattern(s, {}, PersonGroup::Worker);
  const PrimaryPattern& p = d.primary_pattern;
  EXPECT_EQ(p.primary, act(ActivityGroup::W, 550, 1035, "Work"));
  EXPECT_EQ(p.stop_before, act(ActivityGroup::P, 510, 515, "Pick up or Drop off"));
  EXPECT_EQ(p.sub_tour, act(ActivityGroup::M, 770, 830, "Shopping"));
  EXPECT_EQ(p.stop_after, act(ActivityGroup::M, 1060, 1090, "Shopping"));
  ASSERT_EQ(d.secondary.size(), 1u);
  EXPECT_EQ(d.secondary[0], act(ActivityGroup::D, 1230, 1290, "Social"));
  EXPECT_TRUE(validate_pattern(d).empty());
}

TEST(BuildPrimaryPattern, LongestStopBeforeWins) {
  auto s = schedule_of({act(ActivityGroup::P, 480, 490, "Pick up"), act(ActivityGroup::M, 500, 525, "Shopping"),
                        act(ActivityGroup::W, 540, 1000, "Work")});
  const DailyPattern d = build_daily_pattern(s, {}, PersonGroup::Worker);
  EXPECT_EQ(d.primary_pattern.stop_before, act(ActivityGroup::M, 500, 525, "Shopping"));
  EXPECT_TRUE(d.secondary.empty());
}

TEST(BuildPrimaryPattern, PrimaryOnly) {
  auto s = schedule_of({act(ActivityGroup::W, 540, 1000, "Work")});
  const DailyPattern d = build_daily_pattern(s, {}, PersonGroup::Worker);
  EXPECT_FALSE(d.primary_pattern.stop_before);
  EXPECT_FALSE(d.primary_pattern.stop_after);
  EXPECT_FALSE(d.primary_pattern.sub_tour);
  EXPECT_EQ(d.primary_pattern.stop_before_group(), ActivityGroup::ZeroStop);
  EXPECT_EQ(d.primary_pattern.sub_tour_group(), ActivityGroup::NoneSubTour);
  EXPECT_TRUE(d.secondary.empty());
}

TEST(ExtractSecondary, NonworkerTours) {
  auto s = schedule_of({act(ActivityGroup::M, 540, 660, "Shopping"), act(ActivityGroup::P, 800, 810, "Pick up"),
                        act(ActivityGroup::D, 1100, 1200, "Social")},
                       {0, 1, 2});
  const DailyPattern d = build_daily_pattern(s, {}, PersonGroup::Nonworker);
  EXPECT_EQ(d.primary_pattern.primary.group, ActivityGroup::M);
  ASSERT_EQ(d.secondary.size(), 2u);
  EXPECT_EQ(d.secondary[0].group, ActivityGroup::P);
  EXPECT_EQ(d.secondary[1].group, ActivityGroup::D);
}

TEST(ExtractSecondary, PrimaryTourOnly) {
  auto trips = worker_day_trips();
  trips.resize(6);
  const DailyPattern d = build_daily_pattern(trips_to_schedule(trips), {}, PersonGroup::Worker);
  EXPECT_TRUE(d.secondary.empty());
}

TEST(FlattenPattern, RoundTrip) {
  const DailyPattern d = build_daily_pattern(trips_to_schedule(worker_day_trips()), {}, PersonGroup::Worker);
  const ActivitySchedule flat = flatten_pattern(d, "w1");
  EXPECT_EQ(build_daily_pattern(flat, {}, PersonGroup::Worker), d);
}
