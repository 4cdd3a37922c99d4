#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "signkin/entrain.hpp"
#include "signkin/error.hpp"
#include "signkin/reduction.hpp"
#include "signkin/synth.hpp"

using namespace signkin;

namespace {

const KeypointSequence& recording_for(const SynthSession& s, const SignInstance& inst) {
  for (const auto& r : s.recordings) {
    if (r.info().signer == inst.signer && r.info().session == inst.session) return r;
  }
  throw std::runtime_error("no recording for " + inst.signer + "/" + inst.session);
}

void expect_near_rel(double got, double want, double rel) {
  EXPECT_NEAR(got, want, rel * std::max(1.0, std::fabs(want)));
}

}  // namespace

TEST(synth, validate_rejects_bad_fields) {
  SynthSpec s;
  s.reduction_rate = 1.0;
  EXPECT_THROW(validate(s), Error);
  s = {};
  s.reduction_rate = -0.1;
  EXPECT_THROW(validate(s), Error);
  s = {};
  s.mentions = 0;
  EXPECT_THROW(validate(s), Error);
  s = {};
  s.entrain_coupling = 1.5;
  EXPECT_THROW(validate(s), Error);
  s = {};
  s.signer_b = s.signer_a;
  EXPECT_THROW(validate(s), Error);
  EXPECT_NO_THROW(validate(SynthSpec{}));
}

TEST(synth, same_seed_is_identical) {
  SynthSpec spec;
  spec.weak_drop_mention = 3;
  const auto a = generate_session(spec);
  const auto b = generate_session(spec);
  ASSERT_EQ(a.recordings.size(), b.recordings.size());
  for (std::size_t i = 0; i < a.recordings.size(); ++i) {
    EXPECT_EQ(serialize_keypoint_file(a.recordings[i]), serialize_keypoint_file(b.recordings[i]));
  }
  EXPECT_EQ(serialize_annotations(a.annotations), serialize_annotations(b.annotations));
  EXPECT_EQ(serialize_embedding_tokens(a.embeddings), serialize_embedding_tokens(b.embeddings));
  spec.seed = 2;
  const auto c = generate_session(spec);
  EXPECT_NE(serialize_embedding_tokens(a.embeddings), serialize_embedding_tokens(c.embeddings));
}

TEST(synth, layout) {
  SynthSpec spec;
  const auto s = generate_session(spec);
  ASSERT_EQ(s.recordings.size(), 4u);
  std::size_t dialogue = 0;
  std::size_t vocab = 0;
  for (const auto& a : s.annotations) {
    (a.condition == Condition::vocabulary ? vocab : dialogue) += 1;
  }
  EXPECT_EQ(dialogue, static_cast<std::size_t>(2 * spec.glosses * spec.mentions));
  EXPECT_EQ(vocab, static_cast<std::size_t>(2 * spec.glosses));
  EXPECT_EQ(s.embeddings.tokens.size(), dialogue);
  EXPECT_EQ(s.embeddings.dim, static_cast<std::size_t>(spec.embedding_dim));
  EXPECT_EQ(s.truth.size(), s.annotations.size() * table_groups().size());
  EXPECT_TRUE(std::is_sorted(s.annotations.begin(), s.annotations.end(), instance_less));
}

TEST(synth, truth_matches_computed_metrics) {
  SynthSpec spec;
  spec.weak_drop_mention = 3;
  const auto s = generate_session(spec);
  const auto indices = mention_indices(s.annotations);
  std::map<std::pair<std::string, int>, int> seen;
  for (const auto& t : s.truth) {
    const auto rec = compute_record(recording_for(s, t.instance), t.instance, t.group);
    expect_near_rel(rec.spatial_extent, t.spatial_extent, 1e-6);
    expect_near_rel(rec.path_length, t.path_length, 1e-6);
    expect_near_rel(rec.avg_velocity, t.avg_velocity, 1e-6);
    expect_near_rel(rec.mean_vertical, t.mean_vertical, 1e-6);
    EXPECT_DOUBLE_EQ(rec.duration_s, t.duration_s);
  }
  for (std::size_t i = 0; i < s.annotations.size(); ++i) {
    for (const auto& t : s.truth) {
      if (t.instance == s.annotations[i]) {
        EXPECT_EQ(t.mention_index, indices[i]);
      }
    }
  }
}

TEST(synth, zero_rate_is_degenerate) {
  SynthSpec spec;
  spec.reduction_rate = 0.0;
  const auto s = generate_session(spec);
  for (const auto& table : repeated_mention_correlations(s.truth)) {
    for (const auto& c : table.cells) EXPECT_EQ(c.cell.status, CellStatus::degenerate) << c.group.label();
  }
}

TEST(synth, path_reductions_follow_closed_form) {
  SynthSpec spec;
  spec.mentions = 5;
  const double expected[5] = {0, 10, 19, 27.1, 34.39};
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(expected_path_reduction(spec, k), expected[k - 1], 1e-9);

  const auto s = generate_session(spec);
  const JointGroup hand{GroupKind::hand, Side::right};
  std::map<std::string, std::vector<double>> paths;
  for (const auto& a : s.annotations) {
    if (a.signer != spec.signer_a || a.condition != Condition::dialogue) continue;
    paths[a.gloss].push_back(compute_record(recording_for(s, a), a, hand).path_length);
  }
  ASSERT_EQ(paths.size(), static_cast<std::size_t>(spec.glosses));
  for (const auto& [gloss, p] : paths) {
    ASSERT_EQ(p.size(), 5u);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(100.0 * (p[0] - p[k]) / p[0], expected[k], 1e-6) << gloss;
  }
}

TEST(synth, full_coupling_delta_cos) {
  SynthSpec spec;
  spec.entrain_coupling = 1.0;
  const auto s = generate_session(spec);
  std::map<std::string, std::map<std::string, std::vector<Vector>>> seqs;
  for (const auto& t : s.embeddings.tokens) seqs[t.gloss][t.signer].push_back(t.vector);
  for (auto& [gloss, by] : seqs) {
    const auto& a = by[spec.signer_a];
    const auto& b = by[spec.signer_b];
    ASSERT_EQ(a.size(), static_cast<std::size_t>(spec.mentions));
    EXPECT_NEAR(delta_cos(a, b), 1.0 - cosine(a.front(), b.front()), 1e-12);
    EXPECT_NEAR(cosine(a.back(), b.back()), 1.0, 1e-12);
  }
}

TEST(synth, weak_drop_zeroes_left_side) {
  SynthSpec spec;
  spec.weak_drop_mention = 3;
  const auto s = generate_session(spec);
  for (const auto& t : s.truth) {
    if (t.instance.condition == Condition::vocabulary || t.group.side != Side::left) continue;
    if (t.mention_index >= 3) {
      EXPECT_EQ(t.path_length, 0.0);
      EXPECT_EQ(t.spatial_extent, 0.0);
    } else {
      EXPECT_GT(t.path_length, 0.0);
    }
  }
}
