#include "signkin/annotation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "signkin/error.hpp"
#include "signkin/table.hpp"

namespace signkin {

std::string_view condition_name(Condition c) noexcept {
  switch (c) {
    case Condition::dialogue: return "dialogue";
    case Condition::vocabulary: return "vocabulary";
    case Condition::monologue: return "monologue";
    case Condition::interpreter: return "interpreter";
  }
  return "dialogue";
}

std::optional<Condition> find_condition(std::string_view name) noexcept {
  for (const auto c : {Condition::dialogue, Condition::vocabulary, Condition::monologue,
                       Condition::interpreter}) {
    if (condition_name(c) == name) {
      return c;
    }
  }
  return std::nullopt;
}

bool instance_less(const SignInstance& a, const SignInstance& b) {
  return std::tie(a.session, a.signer, a.gloss, a.interval, a.variation, a.condition) <
         std::tie(b.session, b.signer, b.gloss, b.interval, b.variation, b.condition);
}

AnnotationSet parse_annotations(std::istream& in) {
  static constexpr std::string_view kHeader = "gloss,variation,signer,start_ms,end_ms,condition,session";
  AnnotationSet out;
  std::vector<std::size_t> lines;
  table::LineReader reader(in);
  std::string line;
  bool have_header = false;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (table::trim(line).empty() || line.front() == '#') {
      continue;
    }
    if (!have_header) {
      if (table::trim(line) != kHeader) {
        throw ParseError(Errc::malformed_header, ln,
                         "expected header row '" + std::string(kHeader) + "'");
      }
      have_header = true;
      continue;
    }
    const auto f = table::split(line);
    if (f.size() != 7) {
      throw ParseError(Errc::malformed_row, ln, "expected 7 fields, got " + std::to_string(f.size()));
    }
    SignInstance s;
    s.gloss = std::string(table::trim(f[0]));
    s.variation = std::string(table::trim(f[1]));
    s.signer = std::string(table::trim(f[2]));
    const auto start = table::parse_number(f[3]);
    const auto end = table::parse_number(f[4]);
    if (s.gloss.empty() || !start || !end) {
      throw ParseError(Errc::malformed_row, ln, "missing gloss or bad interval bounds");
    }
    if (!(*start < *end)) {
      throw ParseError(Errc::invalid_interval, ln, "end_ms must exceed start_ms");
    }
    s.interval = {*start, *end};
    const auto cond = find_condition(table::trim(f[5]));
    if (!cond) {
      throw ParseError(Errc::unknown_condition, ln, "unknown condition '" + std::string(f[5]) + "'");
    }
    s.condition = *cond;
    s.session = std::string(table::trim(f[6]));
    out.instances.push_back(std::move(s));
    lines.push_back(ln);
  }
  if (!have_header) {
    throw ParseError(Errc::malformed_header, reader.line_number() + 1, "missing header row");
  }

  // overlap scan per (session, signer)
  std::vector<std::size_t> order(out.instances.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& inst = out.instances;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(inst[a].session, inst[a].signer, inst[a].interval.start_ms) <
           std::tie(inst[b].session, inst[b].signer, inst[b].interval.start_ms);
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& prev = inst[order[i - 1]];
    const auto& cur = inst[order[i]];
    if (prev.session == cur.session && prev.signer == cur.signer &&
        cur.interval.start_ms < prev.interval.end_ms) {
      out.warnings.push_back({lines[order[i]], "overlaps '" + prev.gloss + "' at line " +
                                                   std::to_string(lines[order[i - 1]]) +
                                                   " for signer " + cur.signer});
    }
  }
  std::sort(out.warnings.begin(), out.warnings.end(),
            [](const auto& a, const auto& b) { return a.line < b.line; });
  return out;
}

std::string serialize_annotations(std::span<const SignInstance> instances) {
  std::string out = "gloss,variation,signer,start_ms,end_ms,condition,session\n";
  for (const auto& s : instances) {
    out += s.gloss + "," + s.variation + "," + s.signer + "," +
           table::format_number(s.interval.start_ms) + "," +
           table::format_number(s.interval.end_ms) + "," + std::string(condition_name(s.condition)) +
           "," + s.session + "\n";
  }
  return out;
}

MentionKey mention_key(const SignInstance& s, VariationGrouping grouping) {
  return {s.condition, s.signer, s.gloss, s.session,
          grouping == VariationGrouping::strict ? s.variation : std::string{}};
}

namespace {

// Input positions grouped by key, each group ordered by (start, end, input order).
std::map<MentionKey, std::vector<std::size_t>> group_positions(std::span<const SignInstance> instances,
                                                                VariationGrouping grouping) {
  std::map<MentionKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    groups[mention_key(instances[i], grouping)].push_back(i);
  }
  for (auto& [key, positions] : groups) {
    std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
      return instances[a].interval < instances[b].interval;
    });
  }
  return groups;
}

}  // namespace

std::vector<MentionSequence> mention_sequences(std::span<const SignInstance> instances,
                                               std::size_t min_tokens,
                                               VariationGrouping grouping) {
  std::vector<MentionSequence> out;
  for (const auto& [key, positions] : group_positions(instances, grouping)) {
    if (positions.size() < min_tokens) {
      continue;
    }
    MentionSequence seq{key, {}};
    for (const auto p : positions) {
      seq.tokens.push_back(instances[p]);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<int> mention_indices(std::span<const SignInstance> instances, VariationGrouping grouping) {
  std::vector<int> out(instances.size(), 0);
  for (const auto& [key, positions] : group_positions(instances, grouping)) {
    for (std::size_t k = 0; k < positions.size(); ++k) {
      out[positions[k]] = static_cast<int>(k) + 1;
    }
  }
  return out;
}

BaselineMatch match_vocab_baseline(std::span<const SignInstance> dialogue,
                                   std::span<const SignInstance> vocab) {
  // earliest production per gloss; ties resolved by the full instance order
  std::map<std::string, const SignInstance*> baseline;
  for (const auto& v : vocab) {
    auto [it, inserted] = baseline.emplace(v.gloss, &v);
    if (!inserted) {
      const auto& cur = *it->second;
      if (v.interval.start_ms < cur.interval.start_ms ||
          (v.interval.start_ms == cur.interval.start_ms && instance_less(v, cur))) {
        it->second = &v;
      }
    }
  }

  BaselineMatch out;
  std::set<std::string> unmatched;
  for (const auto& d : dialogue) {
    const auto it = baseline.find(d.gloss);
    if (it == baseline.end()) {
      unmatched.insert(d.gloss);
      continue;
    }
    out.pairs.push_back({d, *it->second});
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const BaselinePair& a, const BaselinePair& b) {
    return instance_less(a.dialogue_token, b.dialogue_token);
  });
  out.unmatched.assign(unmatched.begin(), unmatched.end());
  return out;
}

}  // namespace signkin
