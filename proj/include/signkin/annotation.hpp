#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signkin/core.hpp"

namespace signkin {

enum class Condition { dialogue, vocabulary, monologue, interpreter };

std::string_view condition_name(Condition c) noexcept;
std::optional<Condition> find_condition(std::string_view name) noexcept;

struct SignInstance {
  std::string gloss;
  std::string variation;
  std::string signer;
  Interval interval;
  Condition condition = Condition::dialogue;
  std::string session;

  double duration_s() const { return interval.length_ms() / 1000.0; }

  friend bool operator==(const SignInstance&, const SignInstance&) = default;
};

// Total order used for deterministic output: session, signer, gloss, start,
// end, variation, condition.
bool instance_less(const SignInstance& a, const SignInstance& b);

struct AnnotationWarning {
  std::size_t line = 0;
  std::string message;
};

struct AnnotationSet {
  std::vector<SignInstance> instances;
  // Same-signer overlaps (coarticulation) are kept but reported here.
  std::vector<AnnotationWarning> warnings;
};

// Header row `gloss,variation,signer,start_ms,end_ms,condition,session` required.
AnnotationSet parse_annotations(std::istream& in);
std::string serialize_annotations(std::span<const SignInstance> instances);

// ----------------------------------------------------------- mention ordering

enum class VariationGrouping {
  base_term,  // variation labels are metadata only
  strict,     // each variation forms its own sequence
};

struct MentionKey {
  Condition condition = Condition::dialogue;
  std::string signer;
  std::string gloss;
  std::string session;
  std::string variation;  // empty unless strict grouping

  friend auto operator<=>(const MentionKey&, const MentionKey&) = default;
};

struct MentionSequence {
  MentionKey key;
  std::vector<SignInstance> tokens;  // ordered by start, then end, then input order

  // 1-based
  int mention_index(std::size_t position) const { return static_cast<int>(position) + 1; }
};

MentionKey mention_key(const SignInstance& s, VariationGrouping grouping);

// Sequences are grouped per condition as well, so vocabulary productions never
// interleave with dialogue mentions of the same gloss.
std::vector<MentionSequence> mention_sequences(std::span<const SignInstance> instances,
                                               std::size_t min_tokens,
                                               VariationGrouping grouping = VariationGrouping::base_term);

// Mention index of every input instance, aligned with the input order.
std::vector<int> mention_indices(std::span<const SignInstance> instances,
                                 VariationGrouping grouping = VariationGrouping::base_term);

// ---------------------------------------------------------- baseline matching

struct BaselinePair {
  SignInstance dialogue_token;
  SignInstance vocab_token;
};

struct BaselineMatch {
  std::vector<BaselinePair> pairs;        // sorted by dialogue token
  std::vector<std::string> unmatched;     // sorted, unique glosses
};

// Pairs each dialogue token with the earliest vocabulary production of its gloss.
BaselineMatch match_vocab_baseline(std::span<const SignInstance> dialogue,
                                   std::span<const SignInstance> vocab);

}  // namespace signkin
