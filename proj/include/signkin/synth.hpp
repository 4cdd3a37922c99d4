#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signkin/annotation.hpp"
#include "signkin/entrain.hpp"
#include "signkin/kinemetrics.hpp"
#include "signkin/skeleton.hpp"

namespace signkin {

struct SynthSpec {
  int glosses = 5;
  int mentions = 6;
  double reduction_rate = 0.1;  // amplitude shrinks by this fraction per mention
  double entrain_coupling = 0.5;
  std::optional<int> weak_drop_mention;  // left side at the origin from this mention on
  std::uint64_t seed = 1;

  double frame_rate = 120.0;
  double dialogue_duration_ratio = 0.75;  // dialogue token length over citation length
  int embedding_dim = 16;
  std::string signer_a = "instructor";
  std::string signer_b = "student";
};

// Throws invalid_argument on out-of-range fields.
void validate(const SynthSpec& spec);

struct SynthSession {
  // Per signer: the dialogue recording, then the citation recording.
  std::vector<KeypointSequence> recordings;
  std::vector<SignInstance> annotations;  // sorted by instance_less
  EmbeddingSet embeddings;                // one token per dialogue instance
  // Closed-form metrics of every instance and group, per-joint-mean aggregation.
  std::vector<MetricRecord> truth;
};

inline constexpr const char* kDialogueSession = "s1";
inline constexpr const char* kVocabSession = "vocab";

// Every gloss token is an out-and-back stroke base + a (1 - cos 2 pi tau) / 2 u
// along a per-gloss unit direction u, with amplitude a shrinking by
// (1 - reduction_rate)^(k - 1) at mention k. Signer B's embedding for mention k
// is the normalized blend (1 - w) b + w a with w = 1 - (1 - coupling)^(k - 1).
SynthSession generate_session(const SynthSpec& spec);

// Percent reduction of path length at mention k relative to mention 1.
double expected_path_reduction(const SynthSpec& spec, int mention);

}  // namespace signkin
