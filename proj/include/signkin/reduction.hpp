#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signkin/annotation.hpp"
#include "signkin/kinemetrics.hpp"
#include "signkin/stats.hpp"

namespace signkin {

enum class MetricKind { spatial_extent, path_length, avg_velocity, duration, mean_vertical };

std::string_view metric_name(MetricKind m) noexcept;
std::optional<MetricKind> find_metric(std::string_view name) noexcept;
double metric_value(const MetricRecord& r, MetricKind m) noexcept;

// ------------------------------------------------- vocabulary baseline deltas

struct DeltaKey {
  std::string signer;
  std::string session;
  std::string gloss;
  JointGroup group;
  MetricKind metric = MetricKind::path_length;

  friend auto operator<=>(const DeltaKey&, const DeltaKey&) = default;
};

struct DeltaPoint {
  int mention_index = 0;
  double delta = 0.0;  // dialogue - vocabulary; negative = more compact than citation form
};

struct DeltaSeries {
  DeltaKey key;
  std::vector<DeltaPoint> points;  // strictly increasing mention_index
};

// Mean with standard error across glosses at one mention index.
struct DeltaMeanPoint {
  std::string signer;
  JointGroup group;
  MetricKind metric = MetricKind::path_length;
  int mention_index = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;  // 0 when count == 1
};

// Dialogue-versus-citation comparison for one signer and metric. Duration is
// group independent and reported once per signer with group unset.
struct BaselineSummary {
  std::string signer;
  MetricKind metric = MetricKind::duration;
  std::optional<JointGroup> group;
  bool dominant_hand = false;  // group is Hand on the signer's dominant side
  std::size_t tokens = 0;
  std::size_t glosses = 0;
  double mean_percent_reduction = 0.0;  // mean over tokens of 100 (vocab - dialogue) / vocab
  double mean_delta = 0.0;              // mean over tokens of dialogue - vocab
  std::optional<double> p_value;        // paired test over per-gloss (vocab, mean dialogue)
};

struct DeltaOptions {
  stats::PairedTest test = stats::PairedTest::wilcoxon;
  std::map<std::string, Side> dominant_hand;  // missing signers default to right
};

struct DeltaAnalysis {
  std::vector<DeltaSeries> series;
  std::vector<DeltaMeanPoint> mean_series;
  std::vector<BaselineSummary> summaries;
  std::vector<std::string> warnings;
};

DeltaAnalysis vocab_delta_series(std::span<const MetricRecord> records,
                                 std::span<const BaselinePair> pairs,
                                 const DeltaOptions& options = {});

// ----------------------------------------------- repeated-mention correlations

enum class ReductionColumn { spatial_reduction, path_reduction, velocity_increase };

std::string_view column_name(ReductionColumn c) noexcept;
const std::array<ReductionColumn, 3>& reduction_columns() noexcept;

// Percent changes are rounded to this many percentage points before ranking,
// so rounding noise in otherwise equal changes does not break ties.
inline constexpr double kChangeResolution = 1e-9;

enum class CellStatus { ok, unavailable, degenerate };

std::string_view status_name(CellStatus s) noexcept;

enum class Pooling { pooled, per_gloss };

struct MentionChange {
  int mention_index = 0;
  double change = 0.0;  // percent, in the column's direction
};

struct GlossCorrelation {
  std::string gloss;
  std::string session;
  std::vector<MentionChange> changes;
  CellStatus status = CellStatus::unavailable;
  std::optional<stats::CorrelationResult> result;
};

// One (mention_index, percent change) sample pool and its Spearman summary.
struct CorrelationCell {
  CellStatus status = CellStatus::unavailable;
  std::optional<stats::CorrelationResult> pooled;
  std::size_t n_pairs = 0;
  double mean_change = 0.0;  // mean pooled percent change in the column's direction
  std::vector<GlossCorrelation> per_gloss;
  std::optional<double> per_gloss_mean_rho;  // over glosses with status ok
};

struct ReductionCell {
  JointGroup group;
  ReductionColumn column = ReductionColumn::spatial_reduction;
  CorrelationCell cell;
};

struct ReductionTable {
  std::string signer;
  Condition condition = Condition::dialogue;
  std::vector<ReductionCell> cells;  // 8 groups x 3 columns, table row order
  CorrelationCell duration;          // duration reduction, group independent

  const ReductionCell& at(const JointGroup& g, ReductionColumn c) const;
};

struct ReductionOptions {
  std::size_t min_tokens = 2;
  bool include_first_mention = false;  // adds (1, 0%) per gloss to the pool
  Pooling pooling = Pooling::pooled;   // which summary a reporter shows
};

// One table per (signer, condition) found in the records, vocabulary excluded,
// sorted by signer then condition.
std::vector<ReductionTable> repeated_mention_correlations(std::span<const MetricRecord> records,
                                                          const ReductionOptions& options = {});

}  // namespace signkin
