#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signkin/annotation.hpp"
#include "signkin/entrain.hpp"
#include "signkin/error.hpp"
#include "signkin/kinemetrics.hpp"
#include "signkin/reduction.hpp"
#include "signkin/skeleton.hpp"
#include "signkin/spotter.hpp"
#include "signkin/stats.hpp"
#include "signkin/synth.hpp"

namespace signkin {

enum class Command { ingest, metrics, reduce, entrain, spot, synth, report };

std::string_view command_name(Command c) noexcept;
std::optional<Command> find_command(std::string_view name) noexcept;
const std::vector<Command>& all_commands() noexcept;

struct RunConfig {
  std::filesystem::path out_dir = "out";

  // Inputs; empty means the conventional file under out_dir.
  std::vector<std::string> keypoints;
  std::vector<std::string> raw_landmarks;
  std::string annotations;
  std::string embeddings;
  std::string metrics_table;
  std::string mapping;  // empty: built-in table
  std::string query_embeddings;
  std::string window_embeddings;

  std::map<std::string, Side> dominant_hand;
  double confidence_floor = 0.5;
  double max_gap_ratio = 0.25;
  GroupAggregation aggregation = GroupAggregation::per_joint_mean;
  stats::PairedTest paired_test = stats::PairedTest::wilcoxon;

  double window_ms = kDefaultWindowMs;
  double stride_ms = kDefaultWindowMs;
  double iou_threshold = kDefaultIouThreshold;
  std::vector<std::size_t> ks = {10, 50};
  std::size_t resample_frames = 16;
  MrrMode mrr_mode = MrrMode::per_query;

  bool include_first_mention = false;
  bool literal_delta_cos = false;
  Pooling pooling = Pooling::pooled;
  VariationGrouping variation_grouping = VariationGrouping::base_term;
  MeanScope mean_scope = MeanScope::per_gloss;

  // Shared by synth (signer names) and entrain (the pair compared).
  std::string signer_a = "instructor";
  std::string signer_b = "student";
  SynthSpec synth;
};

// Every key accepted by apply_setting, in canonical order.
const std::vector<std::string>& config_keys();

// Throws config_error on an unknown key or unparsable value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// `key = value` lines; blank lines and lines starting with '#' are ignored.
void load_config(RunConfig& config, std::istream& in);

// Effective settings as `key=value` lines, out_dir excluded.
std::string canonical_config(const RunConfig& config);
std::string config_digest(const RunConfig& config);

// An error tied to an input file.
class FileError : public Error {
 public:
  FileError(Errc code, std::string path, std::size_t line, const std::string& message);

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }  // 0 when not line specific

 private:
  std::string path_;
  std::size_t line_;
};

// {"error": ..., "message": ..., "file": ..., "line": ...} on one line.
std::string error_record(const std::exception& e);

// Runs one command, writing its artifacts under config.out_dir. Returns the
// paths written, in order.
std::vector<std::filesystem::path> run_pipeline(Command command, const RunConfig& config);

// Table output of the commands, exposed for reuse and tests.
std::string format_metric_table(std::span<const MetricRecord> records);
std::vector<MetricRecord> parse_metric_table(std::istream& in);
// Pooled rho with stars, or the mean of per-gloss rho when pooling is per_gloss.
std::string render_reduction_grid(const std::string& reduction_csv, Pooling pooling = Pooling::pooled);
std::string render_retrieval_table(const std::string& spot_csv);

}  // namespace signkin
