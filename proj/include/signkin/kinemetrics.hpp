#pragma once

#include <span>
#include <vector>

#include "signkin/annotation.hpp"
#include "signkin/core.hpp"
#include "signkin/skeleton.hpp"

namespace signkin {

// Diagonal of the axis-aligned bounding box of the trajectory. 2D input
// carries z == 0, so its z range contributes nothing.
double spatial_extent(std::span<const Point3> traj);

// Sum of consecutive Euclidean steps; a single frame has length 0.
double path_length(std::span<const Point3> traj);

double average_velocity(std::span<const Point3> traj, double duration_s);

// Mean height, sign-corrected so that larger is higher.
double mean_vertical(std::span<const Point3> traj, UpAxis axis);

struct MetricRecord {
  SignInstance instance;
  int mention_index = 0;
  JointGroup group;
  double spatial_extent = 0.0;
  double path_length = 0.0;
  double avg_velocity = 0.0;
  double duration_s = 0.0;
  double mean_vertical = 0.0;
};

enum class GroupAggregation {
  per_joint_mean,   // metrics per member joint, then unweighted mean
  mean_trajectory,  // metrics of the frame-wise mean position of the members
};

struct MetricOptions {
  double confidence_floor = 0.5;
  double max_gap_ratio = 0.25;
  GroupAggregation aggregation = GroupAggregation::per_joint_mean;
};

// Gap-filled trajectory of one joint over every frame of `slice`. A frame is a
// gap when the joint is missing or its confidence is below the floor; interior
// gaps are linearly interpolated in time, leading/trailing gaps clamp to the
// nearest valid frame. Returns an empty vector when the joint never appears
// validly; throws gap_ratio_exceeded when gaps exceed the allowed share.
std::vector<Point3> joint_trajectory(const KeypointSequence& slice, Joint joint,
                                     const MetricOptions& options);

MetricRecord compute_record(const KeypointSequence& seq, const SignInstance& instance,
                            const JointGroup& group, const MetricOptions& options = {});

}  // namespace signkin
