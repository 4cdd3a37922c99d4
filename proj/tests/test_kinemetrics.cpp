#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "signkin/error.hpp"
#include "signkin/kinemetrics.hpp"

using namespace signkin;

namespace {

std::vector<Point3> random_traj(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  std::vector<Point3> t(n);
  for (auto& p : t) p = {u(rng), u(rng), u(rng)};
  return t;
}

// 100 Hz; joints get the given trajectories, one position per frame.
KeypointSequence sequence_of(const std::vector<std::pair<Joint, std::vector<Point3>>>& tracks,
                             UpAxis axis = UpAxis::pos_y) {
  std::vector<Frame> frames(tracks.front().second.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].time_ms = 10.0 * static_cast<double>(i);
    for (const auto& [j, traj] : tracks) frames[i].at(j) = JointSample{traj[i], 1.0};
  }
  SequenceInfo info;
  info.frame_rate = 100.0;
  info.up_axis = axis;
  return KeypointSequence(info, std::move(frames));
}

SignInstance token(double s, double e) { return {"cell", "v1", "a", {s, e}, Condition::dialogue, "s1"}; }

const JointGroup kRightHand{GroupKind::hand, Side::right};
const JointGroup kRightArm{GroupKind::arm, Side::right};

}  // namespace

TEST(spatial_extent, examples) {
  EXPECT_DOUBLE_EQ(spatial_extent(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(spatial_extent(std::vector<Point3>{{0, 0, 0}, {3, 0, 0}, {3, 4, 0}}), 5.0);
}

TEST(spatial_extent, empty_is_undefined) {
  try {
    spatial_extent(std::vector<Point3>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::undefined_metric);
  }
  EXPECT_THROW(path_length(std::vector<Point3>{}), Error);
  EXPECT_THROW(mean_vertical(std::vector<Point3>{}, UpAxis::pos_y), Error);
}

TEST(spatial_extent, random_matches_min_max_scan) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_traj(rng, 20);
    EXPECT_NEAR(spatial_extent(t), oracle::bbox_diagonal(t), 1e-12 * oracle::bbox_diagonal(t));
  }
}

TEST(path_length, examples) {
  EXPECT_DOUBLE_EQ(path_length(std::vector<Point3>{{4, 5, 6}}), 0.0);
  EXPECT_DOUBLE_EQ(path_length(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}), 2.0);
}

TEST(path_length, random_matches_summation) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_traj(rng, 1 + rng() % 40);
    EXPECT_NEAR(path_length(t), oracle::path_sum(t), 1e-12 * (1.0 + oracle::path_sum(t)));
  }
}

TEST(average_velocity, examples) {
  EXPECT_DOUBLE_EQ(average_velocity(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(average_velocity(std::vector<Point3>{{1, 1, 1}, {1, 1, 1}}, 0.3), 0.0);
  EXPECT_THROW(average_velocity(std::vector<Point3>{{0, 0, 0}}, 0.0), Error);
  EXPECT_THROW(average_velocity(std::vector<Point3>{{0, 0, 0}}, -1.0), Error);
}

TEST(average_velocity, random_ratio) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.05, 3.0);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_traj(rng, 15);
    const double s = d(rng);
    EXPECT_NEAR(average_velocity(t, s), oracle::path_sum(t) / s, 1e-12 * oracle::path_sum(t) / s);
  }
}

TEST(mean_vertical, examples) {
  EXPECT_DOUBLE_EQ(mean_vertical(std::vector<Point3>{{0, 0.7, 0}, {1, 0.7, 0}}, UpAxis::neg_y), -0.7);
  EXPECT_DOUBLE_EQ(mean_vertical(std::vector<Point3>{{0, 1, 0}, {0, 2, 0}, {0, 3, 0}}, UpAxis::pos_y), 2.0);
  EXPECT_DOUBLE_EQ(mean_vertical(std::vector<Point3>{{0, 9, 1}, {0, 9, 3}}, UpAxis::pos_z), 2.0);
}

TEST(mean_vertical, random_mean) {
  std::mt19937_64 rng(4);
  for (const auto axis : {UpAxis::pos_y, UpAxis::neg_y, UpAxis::pos_z}) {
    for (int i = 0; i < 20; ++i) {
      const auto t = random_traj(rng, 25);
      EXPECT_NEAR(mean_vertical(t, axis), oracle::mean_height(t, axis), 1e-9);
    }
  }
}

TEST(metric_properties, translation_scale_reversal) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto t = random_traj(rng, 30);
    const Point3 off{17.0, -4.5, 80.0};
    std::vector<Point3> moved;
    std::vector<Point3> scaled;
    for (const auto& p : t) {
      moved.push_back(p + off);
      scaled.push_back(2.5 * p);
    }
    const std::vector<Point3> reversed(t.rbegin(), t.rend());
    const double ext = spatial_extent(t);
    const double len = path_length(t);
    EXPECT_NEAR(spatial_extent(moved), ext, 1e-9 * ext);
    EXPECT_NEAR(path_length(moved), len, 1e-9 * len);
    EXPECT_NEAR(mean_vertical(moved, UpAxis::pos_y), mean_vertical(t, UpAxis::pos_y) + off.y, 1e-9);
    EXPECT_NEAR(spatial_extent(scaled), 2.5 * ext, 1e-9 * ext);
    EXPECT_NEAR(path_length(scaled), 2.5 * len, 1e-9 * len);
    EXPECT_NEAR(spatial_extent(reversed), ext, 1e-9 * ext);
    EXPECT_NEAR(path_length(reversed), len, 1e-9 * len);
    EXPECT_LE(ext, len + 1e-9);
    EXPECT_GE(len + 1e-9, distance(t.front(), t.back()));
  }
}

TEST(compute_record, duration_from_interval) {
  std::vector<Point3> still(200, Point3{1, 2, 3});
  const auto seq = sequence_of({{Joint::RightHand, still}});
  const auto rec = compute_record(seq, token(1000, 1500), kRightHand);
  EXPECT_DOUBLE_EQ(rec.duration_s, 0.5);
  EXPECT_DOUBLE_EQ(rec.path_length, 0.0);
  EXPECT_DOUBLE_EQ(rec.avg_velocity, 0.0);
  EXPECT_DOUBLE_EQ(rec.mean_vertical, 2.0);
}

TEST(compute_record, single_member_equals_joint_metrics) {
  std::mt19937_64 rng(6);
  const auto t = random_traj(rng, 100);
  const auto seq = sequence_of({{Joint::RightHand, t}});
  const auto rec = compute_record(seq, token(100, 500), kRightHand);
  const std::vector<Point3> inside(t.begin() + 10, t.begin() + 51);
  EXPECT_DOUBLE_EQ(rec.spatial_extent, spatial_extent(inside));
  EXPECT_DOUBLE_EQ(rec.path_length, path_length(inside));
  EXPECT_DOUBLE_EQ(rec.mean_vertical, mean_vertical(inside, UpAxis::pos_y));
  EXPECT_NEAR(rec.avg_velocity * rec.duration_s, rec.path_length, 1e-9 * rec.path_length);
}

TEST(compute_record, group_mean_of_two_straight_paths) {
  std::vector<Point3> a(11);
  std::vector<Point3> b(11);
  for (std::size_t i = 0; i < 11; ++i) {
    a[i] = {0.1 * static_cast<double>(i), 0, 0};
    b[i] = {0, 0.3 * static_cast<double>(i), 0};
  }
  const auto seq = sequence_of({{Joint::RightHand, a}, {Joint::RightForeArm, b}, {Joint::RightArm, a}});
  const JointGroup fore{GroupKind::forearm, Side::right};
  const auto hand = compute_record(seq, token(0, 100), kRightHand);
  const auto forearm = compute_record(seq, token(0, 100), fore);
  EXPECT_NEAR(hand.path_length, 1.0, 1e-12);
  EXPECT_NEAR(forearm.path_length, 3.0, 1e-12);

  const auto fingers = JointGroup{GroupKind::fingers, Side::right}.members();
  ASSERT_GE(fingers.size(), 2u);
  const auto seq2 = sequence_of({{fingers[0], a}, {fingers[1], b}});
  const auto rec = compute_record(seq2, token(0, 100), JointGroup{GroupKind::fingers, Side::right});
  EXPECT_NEAR(rec.path_length, 2.0, 1e-12);
  EXPECT_NEAR(rec.path_length, (oracle::path_sum(a) + oracle::path_sum(b)) / 2.0, 1e-12);
}

TEST(compute_record, mean_trajectory_mode) {
  std::vector<Point3> a(11);
  std::vector<Point3> b(11);
  for (std::size_t i = 0; i < 11; ++i) {
    a[i] = {static_cast<double>(i), 0, 0};
    b[i] = {-static_cast<double>(i), 0, 0};
  }
  const auto fingers = JointGroup{GroupKind::fingers, Side::right}.members();
  const auto seq = sequence_of({{fingers[0], a}, {fingers[1], b}});
  MetricOptions opt;
  opt.aggregation = GroupAggregation::mean_trajectory;
  const auto rec = compute_record(seq, token(0, 100), JointGroup{GroupKind::fingers, Side::right}, opt);
  EXPECT_DOUBLE_EQ(rec.path_length, 0.0);
  EXPECT_DOUBLE_EQ(rec.spatial_extent, 0.0);
}

TEST(compute_record, distinct_errors) {
  std::vector<Point3> still(50, Point3{0, 0, 0});
  const auto seq = sequence_of({{Joint::RightHand, still}});
  try {
    compute_record(seq, token(200, 900), kRightHand);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::interval_not_covered);
  }
  try {
    compute_record(seq, token(0, 200), kRightArm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::members_absent);
  }
}

TEST(compute_record, interior_gap_interpolated) {
  std::vector<Point3> t(11);
  for (std::size_t i = 0; i < 11; ++i) t[i] = {static_cast<double>(i), 0, 0};
  auto seq = sequence_of({{Joint::RightHand, t}});
  auto frames = seq.frames();
  frames[4].at(Joint::RightHand)->confidence = 0.1;  // below floor
  frames[5].at(Joint::RightHand).reset();
  const KeypointSequence gappy(seq.info(), frames);
  const auto traj = joint_trajectory(gappy, Joint::RightHand, MetricOptions{});
  ASSERT_EQ(traj.size(), 11u);
  EXPECT_NEAR(traj[4].x, 4.0, 1e-12);
  EXPECT_NEAR(traj[5].x, 5.0, 1e-12);
  const auto rec = compute_record(gappy, token(0, 100), kRightHand);
  EXPECT_NEAR(rec.path_length, 10.0, 1e-12);
}

TEST(compute_record, edge_gaps_clamp) {
  std::vector<Point3> t(8);
  for (std::size_t i = 0; i < 8; ++i) t[i] = {static_cast<double>(i), 0, 0};
  auto frames = sequence_of({{Joint::RightHand, t}}).frames();
  frames[0].at(Joint::RightHand).reset();
  frames[7].at(Joint::RightHand).reset();
  SequenceInfo info;
  info.frame_rate = 100.0;
  const auto traj = joint_trajectory(KeypointSequence(info, frames), Joint::RightHand, MetricOptions{});
  EXPECT_DOUBLE_EQ(traj.front().x, 1.0);
  EXPECT_DOUBLE_EQ(traj.back().x, 6.0);
}

TEST(compute_record, too_many_gaps_rejected) {
  std::vector<Point3> t(11, Point3{});
  auto frames = sequence_of({{Joint::RightHand, t}}).frames();
  for (std::size_t i = 2; i < 6; ++i) frames[i].at(Joint::RightHand).reset();  // 4 of 11 > 25%
  SequenceInfo info;
  info.frame_rate = 100.0;
  try {
    compute_record(KeypointSequence(info, frames), token(0, 100), kRightHand);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::gap_ratio_exceeded);
  }
}
