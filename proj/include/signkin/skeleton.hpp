#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "signkin/core.hpp"

namespace signkin {

// ------------------------------------------------------------- canonical joints
//
// 23 joints per side, in the order of the motion-capture / landmark table.
enum class Joint : std::uint8_t {
  RightArm,
  RightForeArm,
  RightHand,
  RightHandMiddle1,
  RightHandMiddle2,
  RightHandMiddle3,
  RightHandMiddle4,
  RightHandRing,
  RightHandRing1,
  RightHandRing2,
  RightHandRing4,
  RightHandPinky,
  RightHandPinky1,
  RightHandPinky2,
  RightHandPinky4,
  RightHandIndex,
  RightHandIndex1,
  RightHandIndex2,
  RightHandIndex4,
  RightHandThumb1,
  RightHandThumb2,
  RightHandThumb3,
  RightHandThumb4,
  LeftArm,
  LeftForeArm,
  LeftHand,
  LeftHandMiddle1,
  LeftHandMiddle2,
  LeftHandMiddle3,
  LeftHandMiddle4,
  LeftHandRing,
  LeftHandRing1,
  LeftHandRing2,
  LeftHandRing4,
  LeftHandPinky,
  LeftHandPinky1,
  LeftHandPinky2,
  LeftHandPinky4,
  LeftHandIndex,
  LeftHandIndex1,
  LeftHandIndex2,
  LeftHandIndex4,
  LeftHandThumb1,
  LeftHandThumb2,
  LeftHandThumb3,
  LeftHandThumb4,
};

inline constexpr std::size_t kJointCount = 46;
inline constexpr std::size_t kJointsPerSide = 23;

enum class Side : std::uint8_t { left, right };

constexpr std::size_t index_of(Joint j) noexcept { return static_cast<std::size_t>(j); }

const std::array<Joint, kJointCount>& all_joints() noexcept;
std::string_view joint_name(Joint j) noexcept;
std::optional<Joint> find_joint(std::string_view name) noexcept;
Side joint_side(Joint j) noexcept;

std::string_view side_name(Side s) noexcept;
std::optional<Side> find_side(std::string_view name) noexcept;

// ---------------------------------------------------------------- joint groups
//
enum class GroupKind : std::uint8_t { fingers, hand, forearm, arm };

struct JointGroup {
  GroupKind kind = GroupKind::hand;
  Side side = Side::right;

  // "Fingers (L)", "Hand (R)", ...
  std::string label() const;
  std::vector<Joint> members() const;

  friend auto operator<=>(const JointGroup&, const JointGroup&) = default;
};

// The eight groups in reporting row order: Fingers, Hand, Forearm, Arm; left before right.
const std::array<JointGroup, 8>& table_groups() noexcept;
std::optional<JointGroup> find_group(std::string_view label) noexcept;
std::size_t table_row(const JointGroup& g) noexcept;

// ------------------------------------------------------------ keypoint sequence
//
enum class SourceKind : std::uint8_t { mocap3d, pose2d };
enum class UpAxis : std::uint8_t { pos_y, neg_y, pos_z };

std::string_view source_kind_name(SourceKind k) noexcept;
std::string_view up_axis_name(UpAxis a) noexcept;

// Height of a point with larger meaning higher, whatever the file convention.
double vertical_component(const Point3& p, UpAxis axis) noexcept;

struct JointSample {
  Point3 position;
  std::optional<double> confidence;

  friend bool operator==(const JointSample&, const JointSample&) = default;
};

struct Frame {
  double time_ms = 0.0;
  std::array<std::optional<JointSample>, kJointCount> joints{};

  const std::optional<JointSample>& at(Joint j) const { return joints[index_of(j)]; }
  std::optional<JointSample>& at(Joint j) { return joints[index_of(j)]; }
  std::size_t present_count() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct SequenceInfo {
  double frame_rate = 120.0;
  SourceKind source = SourceKind::mocap3d;
  UpAxis up_axis = UpAxis::pos_y;
  std::string unit_label = "unspecified";
  std::string signer;
  std::string session;

  friend bool operator==(const SequenceInfo&, const SequenceInfo&) = default;
};

// Immutable once constructed. Construction enforces frame_rate > 0, strictly
// increasing timestamps, and z == 0 for every pose2d sample.
class KeypointSequence {
 public:
  KeypointSequence() = default;
  KeypointSequence(SequenceInfo info, std::vector<Frame> frames);

  const SequenceInfo& info() const noexcept { return info_; }
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }

  friend bool operator==(const KeypointSequence&, const KeypointSequence&) = default;

 private:
  SequenceInfo info_;
  std::vector<Frame> frames_;
};

// Keypoint file: `#key=value` header lines (frame_rate required; source_kind,
// up_axis, unit_label, signer, session, config_digest optional), an optional column header
// `time_ms,joint,x,y,z,confidence`, then one row per joint sample. Rows of one
// frame share a timestamp; timestamps never decrease.
KeypointSequence parse_keypoint_file(std::istream& in);
std::string serialize_keypoint_file(const KeypointSequence& seq);

// Frames with start_ms <= t <= end_ms. Throws invalid_interval unless start < end.
KeypointSequence slice_interval(const KeypointSequence& seq, const Interval& interval);

// --------------------------------------------------------------- pose landmarks
//
class LandmarkMapping {
 public:
  // Table of 46 landmark keys (pose_12, right_hand_9, ...) to canonical joints.
  static LandmarkMapping standard();
  // Throws incomplete_mapping unless the entries are a bijection onto all joints.
  static LandmarkMapping from_entries(const std::vector<std::pair<std::string, Joint>>& entries);

  std::optional<Joint> joint_for(std::string_view landmark_key) const;
  const std::string& landmark_for(Joint j) const { return by_joint_[index_of(j)]; }
  std::size_t size() const { return by_key_.size(); }

 private:
  std::map<std::string, Joint, std::less<>> by_key_;
  std::array<std::string, kJointCount> by_joint_;
};

// Two-column rows `landmark_key,joint_name`; an optional header row is skipped.
LandmarkMapping parse_landmark_mapping(std::istream& in);
std::string serialize_landmark_mapping(const LandmarkMapping& mapping);

struct RawLandmark {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> confidence;
};

struct RawPoseFrame {
  double time_ms = 0.0;
  std::map<std::string, RawLandmark> landmarks;
};

struct RawPoseSequence {
  double frame_rate = 30.0;
  std::string signer;
  std::string session;
  std::vector<RawPoseFrame> frames;
};

// Raw landmark file: `#frame_rate=`, optional `#signer=` / `#session=`, then
// rows `time_ms,landmark_key,x,y,confidence`.
RawPoseSequence parse_raw_landmarks(std::istream& in);

// Renames mapped landmarks to canonical joints, drops the rest. The result is
// a pose2d sequence in image coordinates (up axis -y).
KeypointSequence map_pose_landmarks(const RawPoseSequence& raw, const LandmarkMapping& mapping);

}  // namespace signkin
