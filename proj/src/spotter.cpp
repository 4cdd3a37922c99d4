#include "signkin/spotter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "signkin/error.hpp"

namespace signkin {

std::vector<Window> make_windows(double total_ms, double width_ms, double stride_ms, double origin_ms) {
  if (!(width_ms > 0.0) || !(stride_ms > 0.0)) {
    throw Error(Errc::invalid_argument, "window width and stride must be positive");
  }
  if (total_ms < width_ms) {
    throw Error(Errc::empty_corpus, "recording of " + std::to_string(total_ms) +
                                        " ms is shorter than one window");
  }
  std::vector<Window> out;
  for (std::size_t k = 0;; ++k) {
    const double offset = static_cast<double>(k) * stride_ms;
    if (offset + width_ms > total_ms) {
      break;
    }
    out.push_back({{origin_ms + offset, origin_ms + offset + width_ms}, {}, false});
  }
  return out;
}

double interval_iou(const Interval& a, const Interval& b) {
  const double inter = overlap_ms(a, b);
  const double uni = std::max(a.end_ms, b.end_ms) - std::min(a.start_ms, b.start_ms);
  if (inter <= 0.0 || uni <= 0.0) {
    return 0.0;
  }
  // union of two overlapping spans is their hull
  return inter / uni;
}

std::vector<Joint> default_embed_joints() {
  std::vector<Joint> out;
  for (const Side side : {Side::right, Side::left}) {
    out.push_back(JointGroup{GroupKind::hand, side}.members().front());
    for (const Joint j : JointGroup{GroupKind::fingers, side}.members()) {
      out.push_back(j);
    }
  }
  return out;
}

KinematicEmbedding kinematic_embed(const KeypointSequence& seq, const Interval& interval,
                                   const EmbedParams& params) {
  if (params.resample_frames == 0 || params.joints.empty()) {
    throw Error(Errc::invalid_argument, "embedding needs at least one frame and one joint");
  }
  const KeypointSequence slice = slice_interval(seq, interval);
  if (slice.empty()) {
    throw Error(Errc::interval_not_covered, "no frames inside the embedding interval");
  }
  const auto& frames = slice.frames();
  const double t0 = frames.front().time_ms;
  const double t1 = frames.back().time_ms;
  const std::size_t count = params.resample_frames;

  std::vector<double> times(count, t0);
  if (count > 1) {
    for (std::size_t k = 0; k < count; ++k) {
      times[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(count - 1);
    }
  }

  // [frame][joint] positions
  std::vector<std::vector<Point3>> resampled(count, std::vector<Point3>(params.joints.size()));
  for (std::size_t j = 0; j < params.joints.size(); ++j) {
    std::vector<std::pair<double, Point3>> samples;
    for (const auto& f : frames) {
      const auto& s = f.at(params.joints[j]);
      if (s && (!s->confidence || *s->confidence >= params.confidence_floor)) {
        samples.emplace_back(f.time_ms, s->position);
      }
    }
    if (samples.empty()) {
      continue;  // absent joint contributes zeros
    }
    std::size_t hi = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = times[k];
      while (hi < samples.size() && samples[hi].first < t) {
        ++hi;
      }
      Point3 p;
      if (hi == 0) {
        p = samples.front().second;
      } else if (hi == samples.size()) {
        p = samples.back().second;
      } else if (samples[hi].first == t) {
        p = samples[hi].second;
      } else {
        const auto& [ta, pa] = samples[hi - 1];
        const auto& [tb, pb] = samples[hi];
        p = pa + ((t - ta) / (tb - ta)) * (pb - pa);
      }
      resampled[k][j] = p;
    }
  }

  KinematicEmbedding out;
  out.vector.reserve(count * params.joints.size() * 3);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t j = 0; j < params.joints.size(); ++j) {
      const Point3 d = resampled[k][j] - resampled[0][j];
      out.vector.push_back(d.x);
      out.vector.push_back(d.y);
      out.vector.push_back(d.z);
    }
  }
  const double norm = std::sqrt(std::inner_product(out.vector.begin(), out.vector.end(), out.vector.begin(), 0.0));
  if (norm <= 1e-12) {
    out.stationary = true;
    std::fill(out.vector.begin(), out.vector.end(), 0.0);
    return out;
  }
  for (auto& x : out.vector) {
    x /= norm;
  }
  return out;
}

QueryReport rank_and_score(std::span<const double> query, std::span<const Window> windows,
                           std::span<const Interval> truth, const ScoreOptions& options) {
  if (windows.empty()) {
    throw Error(Errc::empty_windows, "no candidate windows to rank");
  }
  QueryReport report;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Window& w = windows[i];
    if (w.stationary) {
      continue;
    }
    if (w.embedding.size() != query.size()) {
      throw Error(Errc::dimension_mismatch, "window " + std::to_string(i) + " has dimension " +
                                                std::to_string(w.embedding.size()) + ", query " +
                                                std::to_string(query.size()));
    }
    RankedWindow r;
    r.window_index = i;
    r.interval = w.interval;
    r.similarity = cosine(query, w.embedding);
    for (const auto& t : truth) {
      r.best_iou = std::max(r.best_iou, interval_iou(w.interval, t));
    }
    r.matched = r.best_iou >= options.iou_threshold;
    report.ranking.push_back(r);
  }
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [](const RankedWindow& a, const RankedWindow& b) {
    if (a.similarity != b.similarity) {
      return a.similarity > b.similarity;
    }
    return a.interval.start_ms < b.interval.start_ms;
  });
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    auto& r = report.ranking[i];
    r.rank = i + 1;
    if (r.matched) {
      ++report.matching_windows;
      report.reciprocal_ranks.push_back(1.0 / static_cast<double>(r.rank));
    }
  }
  if (!report.reciprocal_ranks.empty()) {
    report.mrr = std::accumulate(report.reciprocal_ranks.begin(), report.reciprocal_ranks.end(), 0.0) /
                 static_cast<double>(report.reciprocal_ranks.size());
  }
  for (const std::size_t k : options.ks) {
    if (k == 0) {
      throw Error(Errc::invalid_argument, "k must be positive");
    }
    const std::size_t top = std::min(k, report.ranking.size());
    std::size_t hits = 0;
    std::vector<bool> truth_hit(truth.size(), false);
    for (std::size_t i = 0; i < top; ++i) {
      const auto& r = report.ranking[i];
      hits += r.matched ? 1 : 0;
      for (std::size_t t = 0; t < truth.size(); ++t) {
        if (interval_iou(r.interval, truth[t]) >= options.iou_threshold) {
          truth_hit[t] = true;
        }
      }
    }
    report.recall_at_k[k] = static_cast<double>(hits) / static_cast<double>(k);
    report.truth_recall_at_k[k] =
        truth.empty() ? 0.0
                      : static_cast<double>(std::count(truth_hit.begin(), truth_hit.end(), true)) /
                            static_cast<double>(truth.size());
  }
  return report;
}

SpotAggregate aggregate_reports(std::span<const QueryReport> reports, std::string input, std::string model,
                                const ScoreOptions& options, MrrMode mode) {
  SpotAggregate agg;
  agg.input = std::move(input);
  agg.model = std::move(model);
  agg.queries = reports.size();
  if (reports.empty()) {
    return agg;
  }
  const double n = static_cast<double>(reports.size());
  if (mode == MrrMode::per_query) {
    for (const auto& r : reports) {
      agg.mrr += r.mrr / n;
    }
  } else {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : reports) {
      sum = std::accumulate(r.reciprocal_ranks.begin(), r.reciprocal_ranks.end(), sum);
      count += r.reciprocal_ranks.size();
    }
    agg.mrr = count == 0 ? 0.0 : sum / static_cast<double>(count);
  }
  for (const std::size_t k : options.ks) {
    double recall = 0.0;
    double truth_recall = 0.0;
    for (const auto& r : reports) {
      recall += r.recall_at_k.at(k);
      truth_recall += r.truth_recall_at_k.at(k);
    }
    agg.recall_at_k[k] = recall / n;
    agg.truth_recall_at_k[k] = truth_recall / n;
  }
  return agg;
}

}  // namespace signkin
