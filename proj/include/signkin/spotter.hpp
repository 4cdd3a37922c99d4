#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signkin/core.hpp"
#include "signkin/entrain.hpp"
#include "signkin/skeleton.hpp"

namespace signkin {

inline constexpr double kDefaultWindowMs = 500.0;
inline constexpr double kDefaultIouThreshold = 0.3;

struct Window {
  Interval interval;
  Vector embedding;         // unit length unless stationary
  bool stationary = false;  // null direction, never ranked
};

// Windows starting at origin, origin + stride, ... while start + width fits in
// [origin, origin + total_ms]; a trailing partial span is dropped.
std::vector<Window> make_windows(double total_ms, double width_ms = kDefaultWindowMs,
                                 double stride_ms = kDefaultWindowMs, double origin_ms = 0.0);

// Temporal intersection over union; 0 for disjoint spans.
double interval_iou(const Interval& a, const Interval& b);

// Both hand joints plus all finger joints.
std::vector<Joint> default_embed_joints();

struct EmbedParams {
  std::size_t resample_frames = 16;
  std::vector<Joint> joints = default_embed_joints();
  double confidence_floor = 0.5;
};

struct KinematicEmbedding {
  Vector vector;  // zero vector when stationary
  bool stationary = false;
};

// Deterministic motion descriptor: slice the interval, linearly resample each
// joint to `resample_frames` evenly spaced times, subtract each joint's first
// resampled position, flatten (frame, joint, xyz) and L2-normalize.
KinematicEmbedding kinematic_embed(const KeypointSequence& seq, const Interval& interval,
                                   const EmbedParams& params = {});

struct ScoreOptions {
  std::vector<std::size_t> ks = {10, 50};
  double iou_threshold = kDefaultIouThreshold;
};

struct RankedWindow {
  std::size_t window_index = 0;
  Interval interval;
  double similarity = 0.0;
  double best_iou = 0.0;
  bool matched = false;
  std::size_t rank = 0;  // 1-based
};

struct QueryReport {
  std::string gloss;
  std::vector<RankedWindow> ranking;  // similarity descending, ties by earlier start
  std::size_t matching_windows = 0;
  double mrr = 0.0;                   // mean of 1/rank over matching windows
  std::vector<double> reciprocal_ranks;
  // matched windows within the top k, divided by k
  std::map<std::size_t, double> recall_at_k;
  // truth intervals hit by some top-k window, divided by the truth count
  std::map<std::size_t, double> truth_recall_at_k;
};

QueryReport rank_and_score(std::span<const double> query, std::span<const Window> windows,
                           std::span<const Interval> truth, const ScoreOptions& options = {});

enum class MrrMode {
  per_query,  // mean over queries of each query's MRR
  pooled,     // mean of 1/rank over every matching window of every query
};

struct SpotAggregate {
  std::string input;
  std::string model;
  std::size_t queries = 0;
  double mrr = 0.0;
  std::map<std::size_t, double> recall_at_k;
  std::map<std::size_t, double> truth_recall_at_k;
};

SpotAggregate aggregate_reports(std::span<const QueryReport> reports, std::string input,
                                std::string model, const ScoreOptions& options = {},
                                MrrMode mode = MrrMode::per_query);

}  // namespace signkin
