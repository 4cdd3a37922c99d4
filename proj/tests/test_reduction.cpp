#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "signkin/error.hpp"
#include "signkin/reduction.hpp"

using namespace signkin;

namespace {

const JointGroup kRightHand{GroupKind::hand, Side::right};

MetricRecord record(const std::string& gloss, int mention, const JointGroup& group, double value,
                    Condition c = Condition::dialogue, const std::string& signer = "instructor",
                    double duration_s = 0.5) {
  MetricRecord r;
  const double start = 10000.0 * mention + (c == Condition::vocabulary ? 1e6 : 0.0);
  r.instance = {gloss, "v1", signer, {start, start + duration_s * 1000.0}, c, "s1"};
  r.mention_index = mention;
  r.group = group;
  r.spatial_extent = value;
  r.path_length = value;
  r.duration_s = duration_s;
  r.avg_velocity = value / duration_s;
  r.mean_vertical = value;
  return r;
}

// Records for every group with the same values, one gloss.
std::vector<MetricRecord> all_groups(const std::string& gloss, const std::vector<double>& values) {
  std::vector<MetricRecord> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (const auto& g : table_groups()) out.push_back(record(gloss, static_cast<int>(k) + 1, g, values[k]));
  }
  return out;
}

}  // namespace

TEST(repeated_mention_correlations, halving_gives_perfect_reduction) {
  const auto recs = all_groups("cell", {16, 8, 4, 2, 1});
  const auto tables = repeated_mention_correlations(recs);
  ASSERT_EQ(tables.size(), 1u);
  const auto& t = tables[0];
  EXPECT_EQ(t.cells.size(), 24u);
  for (const auto& g : table_groups()) {
    const auto& s = t.at(g, ReductionColumn::spatial_reduction).cell;
    const auto& p = t.at(g, ReductionColumn::path_reduction).cell;
    ASSERT_EQ(s.status, CellStatus::ok);
    EXPECT_DOUBLE_EQ(s.pooled->rho, 1.0);
    EXPECT_DOUBLE_EQ(p.pooled->rho, 1.0);
    EXPECT_EQ(p.n_pairs, 4u);
  }
}

TEST(repeated_mention_correlations, constant_metrics_are_degenerate) {
  const auto t = repeated_mention_correlations(all_groups("cell", {3, 3, 3, 3, 3}))[0];
  for (const auto& c : t.cells) EXPECT_EQ(c.cell.status, CellStatus::degenerate);
  EXPECT_EQ(t.duration.status, CellStatus::degenerate);
}

TEST(repeated_mention_correlations, too_few_pairs_unavailable) {
  // Two mentions give one pooled pair.
  const auto t = repeated_mention_correlations(all_groups("cell", {3, 2}))[0];
  for (const auto& c : t.cells) EXPECT_EQ(c.cell.status, CellStatus::unavailable);
}

TEST(repeated_mention_correlations, single_token_gloss_excluded) {
  auto recs = all_groups("cell", {16, 8, 4, 2});
  for (const auto& g : table_groups()) recs.push_back(record("mitosis", 1, g, 5));
  const auto t = repeated_mention_correlations(recs)[0];
  const auto& c = t.at(kRightHand, ReductionColumn::path_reduction).cell;
  EXPECT_EQ(c.n_pairs, 3u);
  ASSERT_EQ(c.per_gloss.size(), 1u);
  EXPECT_EQ(c.per_gloss[0].gloss, "cell");
}

TEST(repeated_mention_correlations, missing_groups_marked_unavailable) {
  std::vector<MetricRecord> recs;
  for (int k = 1; k <= 5; ++k) recs.push_back(record("cell", k, kRightHand, 10.0 - k));
  const auto t = repeated_mention_correlations(recs)[0];
  EXPECT_EQ(t.cells.size(), 24u);
  for (const auto& c : t.cells) {
    EXPECT_EQ(c.cell.status, c.group == kRightHand ? CellStatus::ok : CellStatus::unavailable);
  }
}

TEST(repeated_mention_correlations, scale_invariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<MetricRecord> a;
  std::vector<MetricRecord> b;
  for (int g = 0; g < 3; ++g) {
    for (int k = 1; k <= 5; ++k) {
      const double v = u(rng);
      a.push_back(record("g" + std::to_string(g), k, kRightHand, v));
      b.push_back(record("g" + std::to_string(g), k, kRightHand, 7.5 * v));
    }
  }
  const auto ta = repeated_mention_correlations(a)[0];
  const auto tb = repeated_mention_correlations(b)[0];
  for (const auto col : reduction_columns()) {
    const auto& ca = ta.at(kRightHand, col).cell;
    const auto& cb = tb.at(kRightHand, col).cell;
    ASSERT_EQ(ca.status, CellStatus::ok);
    EXPECT_NEAR(ca.pooled->rho, cb.pooled->rho, 1e-12);
    EXPECT_NEAR(ca.pooled->p_value, cb.pooled->p_value, 1e-12);
  }
}

TEST(repeated_mention_correlations, velocity_uses_increase_direction) {
  std::vector<MetricRecord> recs;
  for (int k = 1; k <= 4; ++k) recs.push_back(record("cell", k, kRightHand, 1.0 * k));
  const auto t = repeated_mention_correlations(recs)[0];
  const auto& v = t.at(kRightHand, ReductionColumn::velocity_increase).cell;
  const auto& p = t.at(kRightHand, ReductionColumn::path_reduction).cell;
  EXPECT_DOUBLE_EQ(v.pooled->rho, 1.0);
  EXPECT_DOUBLE_EQ(p.pooled->rho, -1.0);
  EXPECT_NEAR(v.mean_change, (100.0 + 200.0 + 300.0) / 3.0, 1e-9);
}

TEST(repeated_mention_correlations, first_mention_option_adds_zero) {
  const auto recs = all_groups("cell", {16, 8, 4});
  ReductionOptions opt;
  opt.include_first_mention = true;
  const auto t = repeated_mention_correlations(recs, opt)[0];
  const auto& c = t.at(kRightHand, ReductionColumn::path_reduction).cell;
  EXPECT_EQ(c.n_pairs, 3u);
  EXPECT_DOUBLE_EQ(c.pooled->rho, 1.0);
}

TEST(repeated_mention_correlations, vocabulary_excluded_and_tables_split) {
  auto recs = all_groups("cell", {4, 3, 2});
  recs.push_back(record("cell", 1, kRightHand, 9, Condition::vocabulary));
  for (int k = 1; k <= 3; ++k) recs.push_back(record("cell", k, kRightHand, 1, Condition::dialogue, "student"));
  const auto tables = repeated_mention_correlations(recs);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].signer, "instructor");
  EXPECT_EQ(tables[1].signer, "student");
}

// Materialize the pooled (mention, change) pairs by hand and correlate them
// with the brute-force oracles.
TEST(repeated_mention_correlations, spreadsheet_oracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int glosses = 1 + static_cast<int>(rng() % 2);
    std::vector<MetricRecord> recs;
    std::map<int, std::vector<double>> values;
    for (int g = 0; g < glosses; ++g) {
      const int mentions = 4 + static_cast<int>(rng() % 2);
      for (int k = 1; k <= mentions; ++k) {
        const double v = u(rng);
        values[g].push_back(v);
        recs.push_back(record("g" + std::to_string(g), k, kRightHand, v));
      }
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [g, v] : values) {
      for (std::size_t k = 1; k < v.size(); ++k) {
        xs.push_back(static_cast<double>(k + 1));
        ys.push_back(100.0 * (v[0] - v[k]) / v[0]);
      }
    }
    const auto t = repeated_mention_correlations(recs)[0];
    const auto& c = t.at(kRightHand, ReductionColumn::path_reduction).cell;
    ASSERT_EQ(c.n_pairs, xs.size());
    ASSERT_EQ(c.status, CellStatus::ok);
    EXPECT_NEAR(c.pooled->rho, oracle::spearman_rho(xs, ys), 1e-12);
    if (xs.size() <= stats::kExactPermutationLimit) {
      EXPECT_NEAR(c.pooled->p_value, oracle::spearman_exact_p(xs, ys), 1e-12);
    }
    double mean = 0.0;
    for (const double y : ys) mean += y;
    EXPECT_NEAR(c.mean_change, mean / static_cast<double>(ys.size()), 1e-6);
  }
}

TEST(vocab_delta_series, examples) {
  const auto d = record("cell", 1, kRightHand, 0.8);
  const auto same = record("cell", 2, kRightHand, 1.0);
  const auto v = record("cell", 1, kRightHand, 1.0, Condition::vocabulary);
  const std::vector<MetricRecord> recs = {d, same, v};
  const std::vector<BaselinePair> pairs = {{d.instance, v.instance}, {same.instance, v.instance}};
  const auto out = vocab_delta_series(recs, pairs);
  bool found = false;
  for (const auto& s : out.series) {
    if (s.key.metric != MetricKind::path_length) continue;
    found = true;
    ASSERT_EQ(s.points.size(), 2u);
    EXPECT_NEAR(s.points[0].delta, -0.2, 1e-12);
    EXPECT_DOUBLE_EQ(s.points[1].delta, 0.0);
  }
  EXPECT_TRUE(found);
}

TEST(vocab_delta_series, linear_construction) {
  std::vector<MetricRecord> recs;
  std::vector<BaselinePair> pairs;
  const double base = 4.0;
  const auto v = record("cell", 1, kRightHand, base, Condition::vocabulary);
  recs.push_back(v);
  for (int k = 1; k <= 6; ++k) {
    recs.push_back(record("cell", k, kRightHand, base * (1.0 - 0.1 * k)));
    pairs.push_back({recs.back().instance, v.instance});
  }
  const auto out = vocab_delta_series(recs, pairs);
  for (const auto& s : out.series) {
    if (s.key.metric != MetricKind::path_length) continue;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : s.points) {
      xs.push_back(p.mention_index);
      ys.push_back(p.delta);
    }
    EXPECT_NEAR(stats::ls_slope(xs, ys), -0.1 * base, 1e-12);
  }
}

TEST(vocab_delta_series, summary_and_mean_series) {
  std::vector<MetricRecord> recs;
  std::vector<BaselinePair> pairs;
  for (int g = 0; g < 6; ++g) {
    const std::string gloss = "g" + std::to_string(g);
    const auto v = record(gloss, 1, kRightHand, 2.0 + g, Condition::vocabulary, "instructor", 1.0);
    recs.push_back(v);
    for (int k = 1; k <= 2; ++k) {
      recs.push_back(record(gloss, k, kRightHand, 1.0 + g, Condition::dialogue, "instructor", 0.75));
      pairs.push_back({recs.back().instance, v.instance});
    }
  }
  DeltaOptions opt;
  opt.dominant_hand["instructor"] = Side::right;
  const auto out = vocab_delta_series(recs, pairs, opt);
  bool saw_duration = false;
  for (const auto& s : out.summaries) {
    if (s.metric == MetricKind::duration) {
      saw_duration = true;
      EXPECT_NEAR(s.mean_percent_reduction, 25.0, 1e-9);
      EXPECT_EQ(s.tokens, 12u);
      EXPECT_EQ(s.glosses, 6u);
      ASSERT_TRUE(s.p_value.has_value());
      EXPECT_NEAR(*s.p_value, 2.0 / 64.0, 1e-12);
    }
    if (s.metric == MetricKind::path_length) {
      EXPECT_TRUE(s.dominant_hand);
      EXPECT_NEAR(s.mean_delta, -1.0, 1e-12);
    }
  }
  EXPECT_TRUE(saw_duration);
  for (const auto& m : out.mean_series) {
    if (m.metric != MetricKind::path_length) continue;
    EXPECT_EQ(m.count, 6u);
    EXPECT_NEAR(m.mean, -1.0, 1e-12);
    EXPECT_NEAR(m.std_error, 0.0, 1e-12);
  }
}

TEST(vocab_delta_series, vocabulary_against_itself_is_zero) {
  std::vector<MetricRecord> recs;
  std::vector<BaselinePair> pairs;
  for (int g = 0; g < 3; ++g) {
    recs.push_back(record("g" + std::to_string(g), 1, kRightHand, 1.5 + g, Condition::vocabulary));
    pairs.push_back({recs.back().instance, recs.back().instance});
  }
  const auto out = vocab_delta_series(recs, pairs);
  for (const auto& s : out.series) {
    for (const auto& p : s.points) EXPECT_EQ(p.delta, 0.0);
  }
}

TEST(vocab_delta_series, no_overlap_warns) {
  const std::vector<MetricRecord> recs = {record("cell", 1, kRightHand, 1.0)};
  const auto out = vocab_delta_series(recs, {});
  EXPECT_TRUE(out.series.empty());
  EXPECT_FALSE(out.warnings.empty());
}
