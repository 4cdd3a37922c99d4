#include "signkin/skeleton.hpp"

#include <algorithm>
#include <sstream>

#include "signkin/error.hpp"
#include "signkin/table.hpp"

namespace signkin {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "RightArm",         "RightForeArm",     "RightHand",        "RightHandMiddle1",
    "RightHandMiddle2", "RightHandMiddle3", "RightHandMiddle4", "RightHandRing",
    "RightHandRing1",   "RightHandRing2",   "RightHandRing4",   "RightHandPinky",
    "RightHandPinky1",  "RightHandPinky2",  "RightHandPinky4",  "RightHandIndex",
    "RightHandIndex1",  "RightHandIndex2",  "RightHandIndex4",  "RightHandThumb1",
    "RightHandThumb2",  "RightHandThumb3",  "RightHandThumb4",  "LeftArm",
    "LeftForeArm",      "LeftHand",         "LeftHandMiddle1",  "LeftHandMiddle2",
    "LeftHandMiddle3",  "LeftHandMiddle4",  "LeftHandRing",     "LeftHandRing1",
    "LeftHandRing2",    "LeftHandRing4",    "LeftHandPinky",    "LeftHandPinky1",
    "LeftHandPinky2",   "LeftHandPinky4",   "LeftHandIndex",    "LeftHandIndex1",
    "LeftHandIndex2",   "LeftHandIndex4",   "LeftHandThumb1",   "LeftHandThumb2",
    "LeftHandThumb3",   "LeftHandThumb4",
};

// Hand-landmark index for the 20 finger joints of one side, in enum order
// starting at <Side>HandMiddle1.
constexpr std::array<int, 20> kFingerLandmark = {9,  10, 11, 12, 13, 14, 15, 16, 17, 18,
                                                 19, 20, 5,  6,  7,  8,  1,  2,  3,  4};

constexpr std::size_t kFirstFinger = 3;  // offset of <Side>HandMiddle1 within a side

Joint joint_at(std::size_t i) { return static_cast<Joint>(i); }

std::string bad_value(std::string_view key, std::string_view value) {
  return "invalid value '" + std::string(value) + "' for header key '" + std::string(key) + "'";
}

}  // namespace

const std::array<Joint, kJointCount>& all_joints() noexcept {
  static const auto joints = [] {
    std::array<Joint, kJointCount> out{};
    for (std::size_t i = 0; i < kJointCount; ++i) {
      out[i] = joint_at(i);
    }
    return out;
  }();
  return joints;
}

std::string_view joint_name(Joint j) noexcept { return kJointNames[index_of(j)]; }

std::optional<Joint> find_joint(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) {
      return joint_at(i);
    }
  }
  return std::nullopt;
}

Side joint_side(Joint j) noexcept { return index_of(j) < kJointsPerSide ? Side::right : Side::left; }

std::string_view side_name(Side s) noexcept { return s == Side::left ? "left" : "right"; }

std::optional<Side> find_side(std::string_view name) noexcept {
  if (name == "left" || name == "L") return Side::left;
  if (name == "right" || name == "R") return Side::right;
  return std::nullopt;
}

// ---------------------------------------------------------------- joint groups

std::string JointGroup::label() const {
  std::string base;
  switch (kind) {
    case GroupKind::fingers: base = "Fingers"; break;
    case GroupKind::hand: base = "Hand"; break;
    case GroupKind::forearm: base = "Forearm"; break;
    case GroupKind::arm: base = "Arm"; break;
  }
  return base + (side == Side::left ? " (L)" : " (R)");
}

std::vector<Joint> JointGroup::members() const {
  const std::size_t offset = side == Side::right ? 0 : kJointsPerSide;
  switch (kind) {
    case GroupKind::arm: return {joint_at(offset + 0)};
    case GroupKind::forearm: return {joint_at(offset + 1)};
    case GroupKind::hand: return {joint_at(offset + 2)};
    case GroupKind::fingers: {
      std::vector<Joint> out;
      for (std::size_t i = kFirstFinger; i < kJointsPerSide; ++i) {
        out.push_back(joint_at(offset + i));
      }
      return out;
    }
  }
  return {};
}

const std::array<JointGroup, 8>& table_groups() noexcept {
  static constexpr std::array<JointGroup, 8> groups = {{
      {GroupKind::fingers, Side::left},
      {GroupKind::fingers, Side::right},
      {GroupKind::hand, Side::left},
      {GroupKind::hand, Side::right},
      {GroupKind::forearm, Side::left},
      {GroupKind::forearm, Side::right},
      {GroupKind::arm, Side::left},
      {GroupKind::arm, Side::right},
  }};
  return groups;
}

std::optional<JointGroup> find_group(std::string_view label) noexcept {
  for (const auto& g : table_groups()) {
    if (g.label() == label) {
      return g;
    }
  }
  return std::nullopt;
}

std::size_t table_row(const JointGroup& g) noexcept {
  const auto& groups = table_groups();
  return static_cast<std::size_t>(std::find(groups.begin(), groups.end(), g) - groups.begin());
}

// ------------------------------------------------------------ keypoint sequence

std::string_view source_kind_name(SourceKind k) noexcept {
  return k == SourceKind::mocap3d ? "mocap3d" : "pose2d";
}

std::string_view up_axis_name(UpAxis a) noexcept {
  switch (a) {
    case UpAxis::pos_y: return "+y";
    case UpAxis::neg_y: return "-y";
    case UpAxis::pos_z: return "+z";
  }
  return "+y";
}

double vertical_component(const Point3& p, UpAxis axis) noexcept {
  switch (axis) {
    case UpAxis::pos_y: return p.y;
    case UpAxis::neg_y: return -p.y;
    case UpAxis::pos_z: return p.z;
  }
  return p.y;
}

std::size_t Frame::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(joints.begin(), joints.end(), [](const auto& s) { return s.has_value(); }));
}

KeypointSequence::KeypointSequence(SequenceInfo info, std::vector<Frame> frames)
    : info_(std::move(info)), frames_(std::move(frames)) {
  if (!(info_.frame_rate > 0.0)) {
    throw Error(Errc::invalid_argument, "frame_rate must be positive");
  }
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (!(frames_[i - 1].time_ms < frames_[i].time_ms)) {
      throw Error(Errc::non_monotone_timestamps,
                  "frame timestamps must be strictly increasing (frame " + std::to_string(i) + ")");
    }
  }
  if (info_.source == SourceKind::pose2d) {
    for (const auto& f : frames_) {
      for (const auto& s : f.joints) {
        if (s && s->position.z != 0.0) {
          throw Error(Errc::mixed_dimensionality, "pose2d samples cannot carry a z coordinate");
        }
      }
    }
  }
}

KeypointSequence parse_keypoint_file(std::istream& in) {
  SequenceInfo info;
  bool have_rate = false;
  std::optional<SourceKind> declared_kind;
  std::optional<UpAxis> declared_axis;
  std::optional<bool> rows_have_z;
  std::vector<Frame> frames;
  bool in_body = false;

  table::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (table::trim(line).empty()) {
      continue;
    }
    if (line.front() == '#') {
      if (in_body) {
        throw ParseError(Errc::malformed_header, ln, "header line after body rows");
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(Errc::malformed_header, ln, "expected '#key=value'");
      }
      const std::string key(table::trim(std::string_view(line).substr(1, eq - 1)));
      const std::string value(table::trim(std::string_view(line).substr(eq + 1)));
      if (key == "frame_rate") {
        const auto rate = table::parse_number(value);
        if (!rate || *rate <= 0.0) {
          throw ParseError(Errc::malformed_header, ln, bad_value(key, value));
        }
        info.frame_rate = *rate;
        have_rate = true;
      } else if (key == "source_kind") {
        if (value == "mocap3d") {
          declared_kind = SourceKind::mocap3d;
        } else if (value == "pose2d") {
          declared_kind = SourceKind::pose2d;
        } else {
          throw ParseError(Errc::malformed_header, ln, bad_value(key, value));
        }
      } else if (key == "up_axis") {
        if (value == "+y") {
          declared_axis = UpAxis::pos_y;
        } else if (value == "-y") {
          declared_axis = UpAxis::neg_y;
        } else if (value == "+z") {
          declared_axis = UpAxis::pos_z;
        } else {
          throw ParseError(Errc::malformed_header, ln, bad_value(key, value));
        }
      } else if (key == "unit_label") {
        info.unit_label = value;
      } else if (key == "signer") {
        info.signer = value;
      } else if (key == "session") {
        info.session = value;
      } else if (key != "config_digest") {
        throw ParseError(Errc::malformed_header, ln, "unknown header key '" + key + "'");
      }
      continue;
    }
    if (line.rfind("time_ms,", 0) == 0) {
      if (in_body) {
        throw ParseError(Errc::malformed_row, ln, "column header after body rows");
      }
      continue;
    }
    if (!have_rate) {
      throw ParseError(Errc::malformed_header, ln, "missing '#frame_rate=' header before body rows");
    }
    in_body = true;

    const auto fields = table::split(line);
    if (fields.size() != 6) {
      throw ParseError(Errc::malformed_row, ln,
                       "expected 6 fields time_ms,joint,x,y,z,confidence, got " +
                           std::to_string(fields.size()));
    }
    const auto t = table::parse_number(fields[0]);
    if (!t) {
      throw ParseError(Errc::malformed_row, ln, "bad timestamp '" + std::string(fields[0]) + "'");
    }
    const auto joint = find_joint(table::trim(fields[1]));
    if (!joint) {
      throw ParseError(Errc::unknown_joint, ln, "unknown joint '" + std::string(fields[1]) + "'");
    }
    const auto x = table::parse_number(fields[2]);
    const auto y = table::parse_number(fields[3]);
    if (!x || !y) {
      throw ParseError(Errc::malformed_row, ln, "bad coordinate");
    }
    const bool has_z = !table::trim(fields[4]).empty();
    std::optional<double> z;
    if (has_z) {
      z = table::parse_number(fields[4]);
      if (!z) {
        throw ParseError(Errc::malformed_row, ln, "bad z coordinate");
      }
    }
    if (!rows_have_z) {
      rows_have_z = has_z;
      if (declared_kind && (*declared_kind == SourceKind::mocap3d) != has_z) {
        throw ParseError(Errc::mixed_dimensionality, ln,
                         "row dimensionality contradicts source_kind header");
      }
    } else if (*rows_have_z != has_z) {
      throw ParseError(Errc::mixed_dimensionality, ln, "mixed 2D and 3D rows");
    }
    std::optional<double> confidence;
    if (!table::trim(fields[5]).empty()) {
      confidence = table::parse_number(fields[5]);
      if (!confidence || *confidence < 0.0 || *confidence > 1.0) {
        throw ParseError(Errc::malformed_row, ln, "confidence must lie in [0,1]");
      }
    }

    if (frames.empty() || *t > frames.back().time_ms) {
      frames.emplace_back();
      frames.back().time_ms = *t;
    } else if (*t < frames.back().time_ms) {
      throw ParseError(Errc::non_monotone_timestamps, ln,
                       "timestamp " + std::string(fields[0]) + " precedes previous frame");
    }
    auto& slot = frames.back().at(*joint);
    if (slot) {
      throw ParseError(Errc::duplicate_joint, ln,
                       "joint " + std::string(joint_name(*joint)) + " repeated within a frame");
    }
    slot = JointSample{{*x, *y, z.value_or(0.0)}, confidence};
  }
  if (!have_rate) {
    throw ParseError(Errc::malformed_header, reader.line_number() + 1, "missing '#frame_rate=' header");
  }

  if (declared_kind) {
    info.source = *declared_kind;
  } else {
    info.source = rows_have_z.value_or(true) ? SourceKind::mocap3d : SourceKind::pose2d;
  }
  info.up_axis = declared_axis.value_or(info.source == SourceKind::pose2d ? UpAxis::neg_y
                                                                          : UpAxis::pos_y);
  return KeypointSequence(std::move(info), std::move(frames));
}

std::string serialize_keypoint_file(const KeypointSequence& seq) {
  const auto& info = seq.info();
  std::ostringstream out;
  out << "#frame_rate=" << table::format_number(info.frame_rate) << '\n'
      << "#source_kind=" << source_kind_name(info.source) << '\n'
      << "#up_axis=" << up_axis_name(info.up_axis) << '\n'
      << "#unit_label=" << info.unit_label << '\n'
      << "#signer=" << info.signer << '\n';
  if (!info.session.empty()) {
    out << "#session=" << info.session << '\n';
  }
  out << "time_ms,joint,x,y,z,confidence\n";
  const bool three_d = info.source == SourceKind::mocap3d;
  for (const auto& frame : seq.frames()) {
    const std::string t = table::format_number(frame.time_ms);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto& s = frame.joints[j];
      if (!s) {
        continue;
      }
      out << t << ',' << kJointNames[j] << ',' << table::format_number(s->position.x) << ','
          << table::format_number(s->position.y) << ',';
      if (three_d) {
        out << table::format_number(s->position.z);
      }
      out << ',';
      if (s->confidence) {
        out << table::format_number(*s->confidence);
      }
      out << '\n';
    }
  }
  return out.str();
}

KeypointSequence slice_interval(const KeypointSequence& seq, const Interval& interval) {
  if (!(interval.start_ms < interval.end_ms)) {
    throw Error(Errc::invalid_interval, "slice interval must satisfy start < end");
  }
  const auto& frames = seq.frames();
  const auto first = std::lower_bound(
      frames.begin(), frames.end(), interval.start_ms,
      [](const Frame& f, double t) { return f.time_ms < t; });
  const auto last = std::upper_bound(
      first, frames.end(), interval.end_ms,
      [](double t, const Frame& f) { return t < f.time_ms; });
  return KeypointSequence(seq.info(), std::vector<Frame>(first, last));
}

// --------------------------------------------------------------- pose landmarks

LandmarkMapping LandmarkMapping::standard() {
  std::vector<std::pair<std::string, Joint>> entries;
  for (const Side side : {Side::right, Side::left}) {
    const std::size_t offset = side == Side::right ? 0 : kJointsPerSide;
    // arm, forearm, hand map to body-pose landmarks; right side has the even indices
    const std::array<int, 3> pose = side == Side::right ? std::array<int, 3>{12, 14, 16}
                                                        : std::array<int, 3>{11, 13, 15};
    for (std::size_t i = 0; i < 3; ++i) {
      entries.emplace_back("pose_" + std::to_string(pose[i]), joint_at(offset + i));
    }
    const std::string prefix = side == Side::right ? "right_hand_" : "left_hand_";
    for (std::size_t i = 0; i < kFingerLandmark.size(); ++i) {
      entries.emplace_back(prefix + std::to_string(kFingerLandmark[i]),
                           joint_at(offset + kFirstFinger + i));
    }
  }
  return from_entries(entries);
}

LandmarkMapping LandmarkMapping::from_entries(
    const std::vector<std::pair<std::string, Joint>>& entries) {
  LandmarkMapping m;
  std::array<bool, kJointCount> seen{};
  for (const auto& [key, joint] : entries) {
    if (!m.by_key_.emplace(key, joint).second) {
      throw Error(Errc::incomplete_mapping, "landmark key '" + key + "' mapped twice");
    }
    if (seen[index_of(joint)]) {
      throw Error(Errc::incomplete_mapping,
                  "joint " + std::string(joint_name(joint)) + " mapped from two landmarks");
    }
    seen[index_of(joint)] = true;
    m.by_joint_[index_of(joint)] = key;
  }
  std::string missing;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (!seen[i]) {
      missing += (missing.empty() ? "" : ", ") + std::string(kJointNames[i]);
    }
  }
  if (!missing.empty()) {
    throw Error(Errc::incomplete_mapping, "landmark mapping lacks joints: " + missing);
  }
  return m;
}

std::optional<Joint> LandmarkMapping::joint_for(std::string_view landmark_key) const {
  const auto it = by_key_.find(landmark_key);
  if (it == by_key_.end()) {
    return std::nullopt;
  }
  return it->second;
}

LandmarkMapping parse_landmark_mapping(std::istream& in) {
  std::vector<std::pair<std::string, Joint>> entries;
  table::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    if (table::trim(line).empty() || line.front() == '#') {
      continue;
    }
    const auto fields = table::split(line);
    if (fields.size() != 2) {
      throw ParseError(Errc::malformed_row, reader.line_number(),
                       "expected landmark_key,joint_name");
    }
    const auto key = table::trim(fields[0]);
    const auto name = table::trim(fields[1]);
    if (key == "landmark_key") {
      continue;
    }
    const auto joint = find_joint(name);
    if (!joint) {
      throw ParseError(Errc::unknown_joint, reader.line_number(),
                       "unknown joint '" + std::string(name) + "'");
    }
    entries.emplace_back(std::string(key), *joint);
  }
  return LandmarkMapping::from_entries(entries);
}

std::string serialize_landmark_mapping(const LandmarkMapping& mapping) {
  std::string out = "landmark_key,joint_name\n";
  for (const Joint j : all_joints()) {
    out += mapping.landmark_for(j) + "," + std::string(joint_name(j)) + "\n";
  }
  return out;
}

RawPoseSequence parse_raw_landmarks(std::istream& in) {
  RawPoseSequence raw;
  bool have_rate = false;
  table::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (table::trim(line).empty()) {
      continue;
    }
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(Errc::malformed_header, ln, "expected '#key=value'");
      }
      const std::string key(table::trim(std::string_view(line).substr(1, eq - 1)));
      const std::string value(table::trim(std::string_view(line).substr(eq + 1)));
      if (key == "frame_rate") {
        const auto rate = table::parse_number(value);
        if (!rate || *rate <= 0.0) {
          throw ParseError(Errc::malformed_header, ln, bad_value(key, value));
        }
        raw.frame_rate = *rate;
        have_rate = true;
      } else if (key == "signer") {
        raw.signer = value;
      } else if (key == "session") {
        raw.session = value;
      } else {
        throw ParseError(Errc::malformed_header, ln, "unknown header key '" + key + "'");
      }
      continue;
    }
    if (line.rfind("time_ms,", 0) == 0) {
      continue;
    }
    const auto fields = table::split(line);
    if (fields.size() != 5) {
      throw ParseError(Errc::malformed_row, ln, "expected time_ms,landmark_key,x,y,confidence");
    }
    const auto t = table::parse_number(fields[0]);
    const auto x = table::parse_number(fields[2]);
    const auto y = table::parse_number(fields[3]);
    if (!t || !x || !y) {
      throw ParseError(Errc::malformed_row, ln, "bad number");
    }
    std::optional<double> confidence;
    if (!table::trim(fields[4]).empty()) {
      confidence = table::parse_number(fields[4]);
      if (!confidence) {
        throw ParseError(Errc::malformed_row, ln, "bad confidence");
      }
    }
    if (raw.frames.empty() || *t > raw.frames.back().time_ms) {
      raw.frames.push_back({*t, {}});
    } else if (*t < raw.frames.back().time_ms) {
      throw ParseError(Errc::non_monotone_timestamps, ln, "timestamp precedes previous frame");
    }
    raw.frames.back().landmarks[std::string(table::trim(fields[1]))] = {*x, *y, confidence};
  }
  if (!have_rate) {
    throw ParseError(Errc::malformed_header, reader.line_number() + 1, "missing '#frame_rate=' header");
  }
  return raw;
}

KeypointSequence map_pose_landmarks(const RawPoseSequence& raw, const LandmarkMapping& mapping) {
  if (mapping.size() != kJointCount) {
    throw Error(Errc::incomplete_mapping, "landmark mapping must have 46 entries");
  }
  SequenceInfo info;
  info.frame_rate = raw.frame_rate;
  info.source = SourceKind::pose2d;
  info.up_axis = UpAxis::neg_y;
  info.unit_label = "normalized-image";
  info.signer = raw.signer;
  info.session = raw.session;

  std::vector<Frame> frames;
  frames.reserve(raw.frames.size());
  for (const auto& rf : raw.frames) {
    Frame f;
    f.time_ms = rf.time_ms;
    for (const auto& [key, lm] : rf.landmarks) {
      if (const auto joint = mapping.joint_for(key)) {
        f.at(*joint) = JointSample{{lm.x, lm.y, 0.0}, lm.confidence};
      }
    }
    frames.push_back(f);
  }
  return KeypointSequence(std::move(info), std::move(frames));
}

}  // namespace signkin
