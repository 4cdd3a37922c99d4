#include "signkin/kinemetrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "signkin/error.hpp"

namespace signkin {
namespace {

void require_nonempty(std::span<const Point3> traj, const char* metric) {
  if (traj.empty()) {
    throw Error(Errc::undefined_metric, std::string(metric) + " is undefined for an empty trajectory");
  }
}

bool is_valid(const std::optional<JointSample>& s, double floor) {
  return s && (!s->confidence || *s->confidence >= floor);
}

}  // namespace

double spatial_extent(std::span<const Point3> traj) {
  require_nonempty(traj, "spatial extent");
  Point3 lo = traj.front();
  Point3 hi = traj.front();
  for (const auto& p : traj) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  return distance(lo, hi);
}

double path_length(std::span<const Point3> traj) {
  require_nonempty(traj, "path length");
  double total = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    total += distance(traj[i - 1], traj[i]);
  }
  return total;
}

double average_velocity(std::span<const Point3> traj, double duration_s) {
  if (!(duration_s > 0.0)) {
    throw Error(Errc::invalid_argument, "average velocity needs a positive duration");
  }
  return path_length(traj) / duration_s;
}

double mean_vertical(std::span<const Point3> traj, UpAxis axis) {
  require_nonempty(traj, "mean vertical position");
  double sum = 0.0;
  for (const auto& p : traj) {
    sum += vertical_component(p, axis);
  }
  return sum / static_cast<double>(traj.size());
}

std::vector<Point3> joint_trajectory(const KeypointSequence& slice, Joint joint,
                                     const MetricOptions& options) {
  const auto& frames = slice.frames();
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (is_valid(frames[i].at(joint), options.confidence_floor)) {
      valid.push_back(i);
    }
  }
  if (valid.empty()) {
    return {};
  }
  const std::size_t gaps = frames.size() - valid.size();
  if (static_cast<double>(gaps) > options.max_gap_ratio * static_cast<double>(frames.size())) {
    throw Error(Errc::gap_ratio_exceeded,
                std::string(joint_name(joint)) + ": " + std::to_string(gaps) + " of " +
                    std::to_string(frames.size()) + " frames are gaps");
  }

  std::vector<Point3> out(frames.size());
  const auto pos = [&](std::size_t i) { return frames[i].at(joint)->position; };
  std::size_t next = 0;  // index into valid of the first valid frame >= i
  for (std::size_t i = 0; i < frames.size(); ++i) {
    while (next < valid.size() && valid[next] < i) {
      ++next;
    }
    if (next < valid.size() && valid[next] == i) {
      out[i] = pos(i);
    } else if (next == 0) {
      out[i] = pos(valid.front());
    } else if (next == valid.size()) {
      out[i] = pos(valid.back());
    } else {
      const std::size_t a = valid[next - 1];
      const std::size_t b = valid[next];
      const double w = (frames[i].time_ms - frames[a].time_ms) / (frames[b].time_ms - frames[a].time_ms);
      out[i] = pos(a) + w * (pos(b) - pos(a));
    }
  }
  return out;
}

MetricRecord compute_record(const KeypointSequence& seq, const SignInstance& instance,
                            const JointGroup& group, const MetricOptions& options) {
  const Interval& iv = instance.interval;
  if (!(iv.start_ms < iv.end_ms)) {
    throw Error(Errc::invalid_interval, "instance interval must satisfy start < end");
  }
  const double period = 1000.0 / seq.info().frame_rate;
  if (seq.empty() || iv.start_ms < seq.frames().front().time_ms - period ||
      iv.end_ms > seq.frames().back().time_ms + period) {
    throw Error(Errc::interval_not_covered, "keypoints do not cover '" + instance.gloss + "' at " +
                                                std::to_string(iv.start_ms) + "-" +
                                                std::to_string(iv.end_ms) + " ms");
  }
  const KeypointSequence slice = slice_interval(seq, iv);
  if (slice.empty()) {
    throw Error(Errc::interval_not_covered, "no frames inside '" + instance.gloss + "' interval");
  }

  std::vector<std::vector<Point3>> members;
  for (const Joint j : group.members()) {
    auto traj = joint_trajectory(slice, j, options);
    if (!traj.empty()) {
      members.push_back(std::move(traj));
    }
  }
  if (members.empty()) {
    throw Error(Errc::members_absent,
                "no member of " + group.label() + " present for '" + instance.gloss + "'");
  }

  MetricRecord rec;
  rec.instance = instance;
  rec.group = group;
  rec.duration_s = instance.duration_s();
  const UpAxis axis = seq.info().up_axis;

  if (options.aggregation == GroupAggregation::per_joint_mean) {
    for (const auto& traj : members) {
      rec.spatial_extent += spatial_extent(traj);
      rec.path_length += path_length(traj);
      rec.mean_vertical += mean_vertical(traj, axis);
    }
    const double n = static_cast<double>(members.size());
    rec.spatial_extent /= n;
    rec.path_length /= n;
    rec.mean_vertical /= n;
  } else {
    std::vector<Point3> centroid(slice.size());
    for (std::size_t i = 0; i < centroid.size(); ++i) {
      Point3 sum;
      for (const auto& traj : members) {
        sum = sum + traj[i];
      }
      centroid[i] = (1.0 / static_cast<double>(members.size())) * sum;
    }
    rec.spatial_extent = spatial_extent(centroid);
    rec.path_length = path_length(centroid);
    rec.mean_vertical = mean_vertical(centroid, axis);
  }
  rec.avg_velocity = rec.path_length / rec.duration_s;
  return rec;
}

}  // namespace signkin
