#include "signkin/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "signkin/error.hpp"

namespace signkin {

std::string_view metric_name(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::spatial_extent: return "spatial_extent";
    case MetricKind::path_length: return "path_length";
    case MetricKind::avg_velocity: return "avg_velocity";
    case MetricKind::duration: return "duration_s";
    case MetricKind::mean_vertical: return "mean_vertical";
  }
  return "path_length";
}

std::optional<MetricKind> find_metric(std::string_view name) noexcept {
  for (const auto m : {MetricKind::spatial_extent, MetricKind::path_length, MetricKind::avg_velocity,
                       MetricKind::duration, MetricKind::mean_vertical}) {
    if (metric_name(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

double metric_value(const MetricRecord& r, MetricKind m) noexcept {
  switch (m) {
    case MetricKind::spatial_extent: return r.spatial_extent;
    case MetricKind::path_length: return r.path_length;
    case MetricKind::avg_velocity: return r.avg_velocity;
    case MetricKind::duration: return r.duration_s;
    case MetricKind::mean_vertical: return r.mean_vertical;
  }
  return 0.0;
}

namespace {

constexpr std::array<MetricKind, 5> kAllMetrics = {MetricKind::spatial_extent, MetricKind::path_length,
                                                   MetricKind::avg_velocity, MetricKind::duration,
                                                   MetricKind::mean_vertical};

struct RecordKeyLess {
  bool operator()(const std::pair<SignInstance, JointGroup>& a,
                  const std::pair<SignInstance, JointGroup>& b) const {
    if (instance_less(a.first, b.first)) return true;
    if (instance_less(b.first, a.first)) return false;
    return a.second < b.second;
  }
};

using RecordIndex = std::map<std::pair<SignInstance, JointGroup>, const MetricRecord*, RecordKeyLess>;

RecordIndex index_records(std::span<const MetricRecord> records) {
  RecordIndex index;
  for (const auto& r : records) {
    index.emplace(std::make_pair(r.instance, r.group), &r);
  }
  return index;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  MeanSe out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (const double x : v) {
      ss += (x - out.mean) * (x - out.mean);
    }
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

// Accumulates (vocabulary, dialogue) values for one summary row.
struct SummaryAccumulator {
  std::vector<double> percents;
  std::vector<double> deltas;
  std::map<std::string, std::pair<double, std::vector<double>>> per_gloss;  // vocab, dialogue values
  std::size_t tokens = 0;

  void add(const std::string& gloss, double vocab, double dialogue) {
    ++tokens;
    deltas.push_back(dialogue - vocab);
    if (vocab != 0.0) {
      percents.push_back(stats::percent_change(vocab, dialogue, stats::Direction::reduction));
    }
    auto& slot = per_gloss[gloss];
    slot.first = vocab;
    slot.second.push_back(dialogue);
  }
};

BaselineSummary summarize(const SummaryAccumulator& acc, const DeltaOptions& options,
                          std::vector<std::string>& warnings, const std::string& what) {
  BaselineSummary s;
  s.tokens = acc.tokens;
  s.glosses = acc.per_gloss.size();
  if (!acc.percents.empty()) {
    s.mean_percent_reduction =
        std::accumulate(acc.percents.begin(), acc.percents.end(), 0.0) / static_cast<double>(acc.percents.size());
  }
  if (!acc.deltas.empty()) {
    s.mean_delta = mean_se(acc.deltas).mean;
  }
  std::vector<stats::Pair> pairs;
  for (const auto& [gloss, slot] : acc.per_gloss) {
    const double dialogue_mean = std::accumulate(slot.second.begin(), slot.second.end(), 0.0) /
                                 static_cast<double>(slot.second.size());
    pairs.emplace_back(slot.first, dialogue_mean);
  }
  try {
    s.p_value = stats::paired_test(pairs, options.test);
  } catch (const Error& e) {
    warnings.push_back(what + ": no significance test (" + e.what() + ")");
  }
  return s;
}

}  // namespace

DeltaAnalysis vocab_delta_series(std::span<const MetricRecord> records,
                                 std::span<const BaselinePair> pairs, const DeltaOptions& options) {
  DeltaAnalysis out;
  const RecordIndex index = index_records(records);

  std::map<DeltaKey, std::vector<DeltaPoint>> series;
  // signer -> duration accumulator; (signer, group, metric) -> accumulator
  std::map<std::string, SummaryAccumulator> durations;
  std::map<std::tuple<std::string, JointGroup, MetricKind>, SummaryAccumulator> kinematic;

  for (const auto& pair : pairs) {
    const auto& d = pair.dialogue_token;
    const auto& v = pair.vocab_token;
    durations[d.signer].add(d.gloss, v.duration_s(), d.duration_s());
    for (const auto& group : table_groups()) {
      const auto dit = index.find({d, group});
      const auto vit = index.find({v, group});
      if (dit == index.end() || vit == index.end()) {
        continue;
      }
      const MetricRecord& dr = *dit->second;
      const MetricRecord& vr = *vit->second;
      for (const MetricKind m : kAllMetrics) {
        series[{d.signer, d.session, d.gloss, group, m}].push_back(
            {dr.mention_index, metric_value(dr, m) - metric_value(vr, m)});
        if (m != MetricKind::duration) {
          kinematic[{d.signer, group, m}].add(d.gloss, metric_value(vr, m), metric_value(dr, m));
        }
      }
    }
  }

  if (pairs.empty()) {
    out.warnings.push_back("no dialogue gloss overlaps the vocabulary baseline");
    return out;
  }

  std::map<std::tuple<std::string, JointGroup, MetricKind, int>, std::vector<double>> at_mention;
  for (auto& [key, points] : series) {
    std::sort(points.begin(), points.end(),
              [](const DeltaPoint& a, const DeltaPoint& b) { return a.mention_index < b.mention_index; });
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].mention_index == points[i - 1].mention_index) {
        throw Error(Errc::invalid_argument, "duplicate mention index " +
                                                std::to_string(points[i].mention_index) + " for '" +
                                                key.gloss + "' by " + key.signer);
      }
    }
    for (const auto& p : points) {
      at_mention[{key.signer, key.group, key.metric, p.mention_index}].push_back(p.delta);
    }
    out.series.push_back({key, points});
  }
  for (const auto& [key, deltas] : at_mention) {
    const auto [signer, group, metric, mention] = key;
    const auto ms = mean_se(deltas);
    out.mean_series.push_back({signer, group, metric, mention, deltas.size(), ms.mean, ms.se});
  }

  for (const auto& [signer, acc] : durations) {
    auto s = summarize(acc, options, out.warnings, signer + " duration");
    s.signer = signer;
    s.metric = MetricKind::duration;
    out.summaries.push_back(std::move(s));
  }
  for (const auto& [key, acc] : kinematic) {
    const auto& [signer, group, metric] = key;
    auto s = summarize(acc, options, out.warnings,
                       signer + " " + group.label() + " " + std::string(metric_name(metric)));
    s.signer = signer;
    s.metric = metric;
    s.group = group;
    const auto dom = options.dominant_hand.find(signer);
    const Side side = dom == options.dominant_hand.end() ? Side::right : dom->second;
    s.dominant_hand = group == JointGroup{GroupKind::hand, side};
    out.summaries.push_back(std::move(s));
  }
  std::stable_sort(out.summaries.begin(), out.summaries.end(),
                   [](const BaselineSummary& a, const BaselineSummary& b) {
                     return std::tie(a.signer, a.metric, a.group) < std::tie(b.signer, b.metric, b.group);
                   });
  return out;
}

// ----------------------------------------------- repeated-mention correlations

std::string_view column_name(ReductionColumn c) noexcept {
  switch (c) {
    case ReductionColumn::spatial_reduction: return "SpatialReduction";
    case ReductionColumn::path_reduction: return "PathReduction";
    case ReductionColumn::velocity_increase: return "VelocityIncrease";
  }
  return "SpatialReduction";
}

const std::array<ReductionColumn, 3>& reduction_columns() noexcept {
  static constexpr std::array<ReductionColumn, 3> cols = {
      ReductionColumn::spatial_reduction, ReductionColumn::path_reduction,
      ReductionColumn::velocity_increase};
  return cols;
}

std::string_view status_name(CellStatus s) noexcept {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::unavailable: return "unavailable";
    case CellStatus::degenerate: return "degenerate";
  }
  return "unavailable";
}

const ReductionCell& ReductionTable::at(const JointGroup& g, ReductionColumn c) const {
  for (const auto& cell : cells) {
    if (cell.group == g && cell.column == c) {
      return cell;
    }
  }
  throw Error(Errc::invalid_argument, "no cell for " + g.label());
}

namespace {

struct Sample {
  double mention = 0.0;
  double change = 0.0;
};

std::pair<CellStatus, std::optional<stats::CorrelationResult>> correlate(std::span<const Sample> samples) {
  if (samples.size() < 3) {
    return {CellStatus::unavailable, std::nullopt};
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : samples) {
    x.push_back(s.mention);
    y.push_back(s.change);
  }
  try {
    return {CellStatus::ok, stats::spearman(x, y)};
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_input) {
      return {CellStatus::degenerate, std::nullopt};
    }
    throw;
  }
}

// Changes that agree to within the resolution rank as ties.
double quantize(double change) { return std::round(change / kChangeResolution) * kChangeResolution; }

// Sequence of one gloss: mention index -> metric value.
struct GlossSeries {
  std::string gloss;
  std::string session;
  std::map<int, double> values;
};

CorrelationCell build_cell(std::span<const GlossSeries> glosses, stats::Direction direction,
                           const ReductionOptions& options) {
  CorrelationCell cell;
  std::vector<Sample> pool;
  for (const auto& g : glosses) {
    if (g.values.size() < options.min_tokens) {
      continue;
    }
    const auto first = g.values.find(1);
    if (first == g.values.end() || first->second == 0.0) {
      continue;
    }
    std::vector<Sample> own;
    if (options.include_first_mention) {
      own.push_back({1.0, 0.0});
    }
    for (const auto& [mention, value] : g.values) {
      if (mention >= 2) {
        own.push_back({static_cast<double>(mention), quantize(stats::percent_change(first->second, value, direction))});
      }
    }
    auto [status, result] = correlate(own);
    std::vector<MentionChange> changes;
    for (const auto& s : own) {
      changes.push_back({static_cast<int>(s.mention), s.change});
    }
    cell.per_gloss.push_back({g.gloss, g.session, std::move(changes), status, result});
    pool.insert(pool.end(), own.begin(), own.end());
  }
  cell.n_pairs = pool.size();
  if (!pool.empty()) {
    double sum = 0.0;
    for (const auto& s : pool) {
      sum += s.change;
    }
    cell.mean_change = sum / static_cast<double>(pool.size());
  }
  std::tie(cell.status, cell.pooled) = correlate(pool);

  std::vector<double> rhos;
  for (const auto& g : cell.per_gloss) {
    if (g.status == CellStatus::ok) {
      rhos.push_back(g.result->rho);
    }
  }
  if (!rhos.empty()) {
    cell.per_gloss_mean_rho = std::accumulate(rhos.begin(), rhos.end(), 0.0) / static_cast<double>(rhos.size());
  }
  return cell;
}

MetricKind column_metric(ReductionColumn c) {
  switch (c) {
    case ReductionColumn::spatial_reduction: return MetricKind::spatial_extent;
    case ReductionColumn::path_reduction: return MetricKind::path_length;
    case ReductionColumn::velocity_increase: return MetricKind::avg_velocity;
  }
  return MetricKind::path_length;
}

stats::Direction column_direction(ReductionColumn c) {
  return c == ReductionColumn::velocity_increase ? stats::Direction::increase : stats::Direction::reduction;
}

}  // namespace

std::vector<ReductionTable> repeated_mention_correlations(std::span<const MetricRecord> records,
                                                          const ReductionOptions& options) {
  // (signer, condition) -> records
  std::map<std::pair<std::string, Condition>, std::vector<const MetricRecord*>> by_table;
  for (const auto& r : records) {
    if (r.instance.condition != Condition::vocabulary) {
      by_table[{r.instance.signer, r.instance.condition}].push_back(&r);
    }
  }

  std::vector<ReductionTable> tables;
  for (const auto& [key, recs] : by_table) {
    ReductionTable table;
    table.signer = key.first;
    table.condition = key.second;

    // group -> (session, gloss) -> mention index -> record
    using Sequence = std::map<int, const MetricRecord*>;
    std::map<JointGroup, std::map<std::pair<std::string, std::string>, Sequence>> per_group;
    std::map<std::pair<std::string, std::string>, GlossSeries> durations;
    for (const MetricRecord* r : recs) {
      const std::pair<std::string, std::string> seq_key{r->instance.session, r->instance.gloss};
      if (!per_group[r->group][seq_key].emplace(r->mention_index, r).second) {
        throw Error(Errc::invalid_argument, "duplicate mention index " + std::to_string(r->mention_index) +
                                                " for '" + r->instance.gloss + "' (" + r->group.label() + ")");
      }
      auto& ds = durations[seq_key];
      ds.gloss = r->instance.gloss;
      ds.session = r->instance.session;
      ds.values.emplace(r->mention_index, r->duration_s);
    }

    for (const auto& group : table_groups()) {
      for (const auto column : reduction_columns()) {
        std::vector<GlossSeries> glosses;
        if (const auto it = per_group.find(group); it != per_group.end()) {
          for (const auto& [seq_key, seq] : it->second) {
            GlossSeries gs{seq_key.second, seq_key.first, {}};
            for (const auto& [mention, r] : seq) {
              gs.values.emplace(mention, metric_value(*r, column_metric(column)));
            }
            glosses.push_back(std::move(gs));
          }
        }
        table.cells.push_back({group, column, build_cell(glosses, column_direction(column), options)});
      }
    }

    std::vector<GlossSeries> dur;
    for (const auto& [k, gs] : durations) {
      dur.push_back(gs);
    }
    table.duration = build_cell(dur, stats::Direction::reduction, options);
    tables.push_back(std::move(table));
  }
  return tables;
}

}  // namespace signkin
