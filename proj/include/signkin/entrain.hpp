#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "signkin/core.hpp"

namespace signkin {

using Vector = std::vector<double>;

struct EmbeddingToken {
  std::string gloss;
  std::string signer;
  int mention_index = 0;
  Interval interval;
  Vector vector;
};

struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<EmbeddingToken> tokens;
};

// Token file: `#dim=<d>`, an optional column header starting with `gloss,`,
// then rows `gloss,signer,mention_index,start_ms,end_ms,v1,...,vd`. Vectors are
// L2-normalized on load.
EmbeddingSet parse_embedding_tokens(std::istream& in);
std::string serialize_embedding_tokens(const EmbeddingSet& set);

// Mean over frames scaled to unit length. Throws normalization_failed when the
// mean vanishes and dimension_mismatch on ragged input.
Vector pool_normalize(std::span<const Vector> frames);

double cosine(std::span<const double> a, std::span<const double> b);

enum class DeltaCosMode {
  cross_signer,  // cos(last_a, last_b) - cos(first_a, first_b)
  literal,       // cos(first_a, last_b) - cos(first_a, first_a), as printed
};

// Per-signer token sequences are in mention order.
double delta_cos(std::span<const Vector> tokens_a, std::span<const Vector> tokens_b,
                 DeltaCosMode mode = DeltaCosMode::cross_signer);

// Least-squares slope of cos(a_i, b_1) over i = 1..T_a.
double cross_slope(std::span<const Vector> tokens_a, std::span<const Vector> tokens_b);

// cos(first, last)
double self_similarity(std::span<const Vector> tokens);

// 2 (x - mu_a).(mu_b - mu_a) / |mu_b - mu_a|^2 - 1: -1 at mu_a, +1 at mu_b.
double projection_similarity(std::span<const double> x, std::span<const double> mu_a,
                             std::span<const double> mu_b);

enum class MeanScope { per_gloss, global };

struct EntrainOptions {
  DeltaCosMode mode = DeltaCosMode::cross_signer;
  MeanScope mean_scope = MeanScope::per_gloss;
};

struct ProjectionPoint {
  std::string signer;
  int mention_index = 0;
  double sim = 0.0;
};

struct EntrainmentEntry {
  std::string gloss;
  std::size_t tokens_a = 0;
  std::size_t tokens_b = 0;
  double delta_cos = 0.0;
  double slope_a_to_b = 0.0;
  double slope_b_to_a = 0.0;
  double selfsim_a = 0.0;
  double selfsim_b = 0.0;
  std::vector<ProjectionPoint> projection;  // signer a tokens first, each in mention order
};

struct EntrainmentReport {
  std::string signer_a;  // the side at -1 in the projection
  std::string signer_b;
  std::vector<EntrainmentEntry> entries;  // sorted by gloss
  std::vector<std::string> skipped;       // glosses lacking two tokens from each signer
};

EntrainmentReport analyze_entrainment(const EmbeddingSet& set, const std::string& signer_a,
                                      const std::string& signer_b, const EntrainOptions& options = {});

}  // namespace signkin
