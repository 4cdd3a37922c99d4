#include "signkin/entrain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "signkin/error.hpp"
#include "signkin/stats.hpp"
#include "signkin/table.hpp"

namespace signkin {
namespace {

double norm(std::span<const double> v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::dimension_mismatch, "vector dimensions differ: " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()));
  }
}

Vector mean_of(std::span<const Vector> vs) {
  Vector m(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    require_same_dim(m, v);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] += v[i];
    }
  }
  for (auto& x : m) {
    x /= static_cast<double>(vs.size());
  }
  return m;
}

void require_tokens(std::span<const Vector> tokens, std::size_t n, const char* who) {
  if (tokens.size() < n) {
    throw Error(Errc::insufficient_tokens, std::string(who) + " needs at least " + std::to_string(n) +
                                               " tokens, got " + std::to_string(tokens.size()));
  }
}

}  // namespace

EmbeddingSet parse_embedding_tokens(std::istream& in) {
  EmbeddingSet set;
  bool have_dim = false;
  table::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (table::trim(line).empty()) {
      continue;
    }
    if (line.front() == '#') {
      const auto eq = line.find('=');
      const auto key = eq == std::string::npos ? std::string_view{} : table::trim(std::string_view(line).substr(1, eq - 1));
      if (key == "dim") {
        const auto d = table::parse_integer(std::string_view(line).substr(eq + 1));
        if (!d || *d <= 0) {
          throw ParseError(Errc::malformed_header, ln, "invalid '#dim=' value");
        }
        set.dim = static_cast<std::size_t>(*d);
        have_dim = true;
      } else if (key != "config_digest") {
        throw ParseError(Errc::malformed_header, ln, "expected '#dim=<d>'");
      }
      continue;
    }
    if (!have_dim) {
      throw ParseError(Errc::malformed_header, ln, "missing '#dim=<d>' header");
    }
    if (line.rfind("gloss,", 0) == 0) {
      continue;
    }
    const auto f = table::split(line);
    if (f.size() != 5 + set.dim) {
      throw ParseError(Errc::dimension_mismatch, ln,
                       "expected " + std::to_string(5 + set.dim) + " fields, got " + std::to_string(f.size()));
    }
    EmbeddingToken t;
    t.gloss = std::string(table::trim(f[0]));
    t.signer = std::string(table::trim(f[1]));
    const auto mention = table::parse_integer(f[2]);
    const auto start = table::parse_number(f[3]);
    const auto end = table::parse_number(f[4]);
    if (!mention || !start || !end) {
      throw ParseError(Errc::malformed_row, ln, "bad mention index or interval");
    }
    if (!(*start < *end)) {
      throw ParseError(Errc::invalid_interval, ln, "end_ms must exceed start_ms");
    }
    t.mention_index = static_cast<int>(*mention);
    t.interval = {*start, *end};
    t.vector.reserve(set.dim);
    for (std::size_t i = 0; i < set.dim; ++i) {
      const auto v = table::parse_number(f[5 + i]);
      if (!v) {
        throw ParseError(Errc::malformed_row, ln, "bad vector component " + std::to_string(i + 1));
      }
      t.vector.push_back(*v);
    }
    const double n = norm(t.vector);
    if (n == 0.0) {
      throw ParseError(Errc::normalization_failed, ln, "zero embedding vector");
    }
    for (auto& x : t.vector) {
      x /= n;
    }
    set.tokens.push_back(std::move(t));
  }
  if (!have_dim) {
    throw ParseError(Errc::malformed_header, reader.line_number() + 1, "missing '#dim=<d>' header");
  }
  return set;
}

std::string serialize_embedding_tokens(const EmbeddingSet& set) {
  std::ostringstream out;
  out << "#dim=" << set.dim << '\n' << "gloss,signer,mention_index,start_ms,end_ms";
  for (std::size_t i = 1; i <= set.dim; ++i) {
    out << ",v" << i;
  }
  out << '\n';
  for (const auto& t : set.tokens) {
    out << t.gloss << ',' << t.signer << ',' << t.mention_index << ','
        << table::format_number(t.interval.start_ms) << ',' << table::format_number(t.interval.end_ms);
    for (const double v : t.vector) {
      out << ',' << table::format_number(v);
    }
    out << '\n';
  }
  return out.str();
}

Vector pool_normalize(std::span<const Vector> frames) {
  if (frames.empty()) {
    throw Error(Errc::normalization_failed, "cannot pool zero frames");
  }
  Vector m = mean_of(frames);
  const double n = norm(m);
  if (!(n > 0.0)) {
    throw Error(Errc::normalization_failed, "mean embedding is the zero vector");
  }
  for (auto& x : m) {
    x /= n;
  }
  return m;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw Error(Errc::normalization_failed, "cosine with a zero vector");
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb);
}

double delta_cos(std::span<const Vector> tokens_a, std::span<const Vector> tokens_b, DeltaCosMode mode) {
  require_tokens(tokens_a, 2, "delta_cos signer A");
  require_tokens(tokens_b, 2, "delta_cos signer B");
  if (mode == DeltaCosMode::literal) {
    return cosine(tokens_a.front(), tokens_b.back()) - cosine(tokens_a.front(), tokens_a.front());
  }
  return cosine(tokens_a.back(), tokens_b.back()) - cosine(tokens_a.front(), tokens_b.front());
}

double cross_slope(std::span<const Vector> tokens_a, std::span<const Vector> tokens_b) {
  require_tokens(tokens_a, 2, "cross_slope signer A");
  require_tokens(tokens_b, 1, "cross_slope signer B");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < tokens_a.size(); ++i) {
    xs.push_back(static_cast<double>(i + 1));
    ys.push_back(cosine(tokens_a[i], tokens_b.front()));
  }
  return stats::ls_slope(xs, ys);
}

double self_similarity(std::span<const Vector> tokens) {
  require_tokens(tokens, 2, "self_similarity");
  return cosine(tokens.front(), tokens.back());
}

double projection_similarity(std::span<const double> x, std::span<const double> mu_a,
                             std::span<const double> mu_b) {
  require_same_dim(x, mu_a);
  require_same_dim(x, mu_b);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double axis = mu_b[i] - mu_a[i];
    num += (x[i] - mu_a[i]) * axis;
    den += axis * axis;
  }
  if (den == 0.0) {
    throw Error(Errc::degenerate_axis, "signer means coincide");
  }
  return 2.0 * num / den - 1.0;
}

EntrainmentReport analyze_entrainment(const EmbeddingSet& set, const std::string& signer_a,
                                      const std::string& signer_b, const EntrainOptions& options) {
  // gloss -> signer -> tokens
  std::map<std::string, std::map<std::string, std::vector<const EmbeddingToken*>>> by_gloss;
  std::map<std::string, std::vector<Vector>> all_by_signer;
  for (const auto& t : set.tokens) {
    if (t.vector.size() != set.dim) {
      throw Error(Errc::dimension_mismatch, "token of '" + t.gloss + "' has the wrong dimension");
    }
    if (t.signer != signer_a && t.signer != signer_b) {
      continue;
    }
    by_gloss[t.gloss][t.signer].push_back(&t);
    all_by_signer[t.signer].push_back(t.vector);
  }

  EntrainmentReport report;
  report.signer_a = signer_a;
  report.signer_b = signer_b;
  for (auto& [gloss, signers] : by_gloss) {
    auto& ta = signers[signer_a];
    auto& tb = signers[signer_b];
    if (ta.size() < 2 || tb.size() < 2) {
      report.skipped.push_back(gloss);
      continue;
    }
    const auto by_mention = [](const EmbeddingToken* x, const EmbeddingToken* y) {
      return std::tie(x->mention_index, x->interval) < std::tie(y->mention_index, y->interval);
    };
    std::stable_sort(ta.begin(), ta.end(), by_mention);
    std::stable_sort(tb.begin(), tb.end(), by_mention);
    std::vector<Vector> va;
    std::vector<Vector> vb;
    for (const auto* t : ta) va.push_back(t->vector);
    for (const auto* t : tb) vb.push_back(t->vector);

    EntrainmentEntry e;
    e.gloss = gloss;
    e.tokens_a = va.size();
    e.tokens_b = vb.size();
    e.delta_cos = delta_cos(va, vb, options.mode);
    e.slope_a_to_b = cross_slope(va, vb);
    e.slope_b_to_a = cross_slope(vb, va);
    e.selfsim_a = self_similarity(va);
    e.selfsim_b = self_similarity(vb);

    const Vector mu_a = options.mean_scope == MeanScope::per_gloss ? mean_of(va) : mean_of(all_by_signer[signer_a]);
    const Vector mu_b = options.mean_scope == MeanScope::per_gloss ? mean_of(vb) : mean_of(all_by_signer[signer_b]);
    try {
      for (const auto* seq : {&ta, &tb}) {
        for (const auto* t : *seq) {
          e.projection.push_back({t->signer, t->mention_index, projection_similarity(t->vector, mu_a, mu_b)});
        }
      }
    } catch (const Error& err) {
      if (err.code() != Errc::degenerate_axis) {
        throw;
      }
      e.projection.clear();  // identical signer means leave no axis to project on
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace signkin
