#include "signkin/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <tuple>

#include "signkin/error.hpp"

namespace signkin {
namespace {

// Portable draws; the std distributions are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

Vector unit_vector(Rng& rng, std::size_t dim) {
  for (;;) {
    Vector v(dim);
    double n2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
    if (n2 > 1e-12) {
      const double n = std::sqrt(n2);
      for (auto& x : v) {
        x /= n;
      }
      return v;
    }
  }
}

Vector normalized(Vector v) {
  double n2 = 0.0;
  for (const double x : v) {
    n2 += x * x;
  }
  const double n = std::sqrt(n2);
  for (auto& x : v) {
    x /= n;
  }
  return v;
}

struct JointLayout {
  Point3 base;
  double scale = 1.0;
};

// Rest pose in millimetres, y up; the left side mirrors x and moves less.
std::array<JointLayout, kJointCount> layout() {
  std::array<JointLayout, kJointCount> out{};
  for (const Side side : {Side::right, Side::left}) {
    const double sx = side == Side::right ? 1.0 : -1.0;
    const double side_scale = side == Side::right ? 1.0 : 0.8;
    const auto put = [&](Joint j, Point3 p, double s) {
      out[index_of(j)] = {{sx * p.x, p.y, p.z}, s * side_scale};
    };
    put(JointGroup{GroupKind::arm, side}.members().front(), {180.0, 1400.0, 0.0}, 0.25);
    put(JointGroup{GroupKind::forearm, side}.members().front(), {260.0, 1130.0, 60.0}, 0.6);
    put(JointGroup{GroupKind::hand, side}.members().front(), {300.0, 960.0, 180.0}, 1.0);
    const auto fingers = JointGroup{GroupKind::fingers, side}.members();
    for (std::size_t m = 0; m < fingers.size(); ++m) {
      const double chain = static_cast<double>(m / 4);
      const double link = static_cast<double>(m % 4);
      put(fingers[m], {290.0 + 12.0 * chain, 930.0 - 18.0 * link, 200.0 + 6.0 * chain},
          1.0 + 0.01 * static_cast<double>(m + 1));
    }
  }
  return out;
}

struct GlossModel {
  std::string name;
  double amplitude = 0.0;  // millimetres at mention 1 for scale 1
  Point3 direction;        // unit, right side
  long dialogue_frames = 0;
  long vocab_frames = 0;
  Vector embed_a;
  Vector embed_b;
};

long even_frames(double ms, double frame_rate) {
  const long half = std::lround(ms * frame_rate / 2000.0);
  return std::max(2L, 2 * half);
}

double frame_time(long i, double frame_rate) { return static_cast<double>(i) * 1000.0 / frame_rate; }

struct Token {
  std::size_t gloss = 0;
  int mention = 1;
  long start = 0;   // frame index
  long frames = 0;  // even
  double amplitude_factor = 1.0;
  bool weak_dropped = false;
};

Point3 mirrored(const Point3& u, Side side) { return side == Side::right ? u : Point3{-u.x, u.y, u.z}; }

KeypointSequence render(const SynthSpec& spec, const std::string& signer, const std::string& session,
                        const std::vector<Token>& tokens, const std::vector<GlossModel>& glosses,
                        double signer_scale, long total_frames, std::optional<long> drop_from) {
  const auto rig = layout();
  std::vector<Frame> frames(static_cast<std::size_t>(total_frames) + 1);
  for (long i = 0; i <= total_frames; ++i) {
    Frame& f = frames[static_cast<std::size_t>(i)];
    f.time_ms = frame_time(i, spec.frame_rate);
    for (const Joint j : all_joints()) {
      f.at(j) = JointSample{rig[index_of(j)].base, std::nullopt};
    }
  }
  for (const auto& t : tokens) {
    const GlossModel& g = glosses[t.gloss];
    for (long i = 0; i <= t.frames; ++i) {
      const double tau = static_cast<double>(i) / static_cast<double>(t.frames);
      const double lift = (1.0 - std::cos(2.0 * std::numbers::pi * tau)) / 2.0;
      Frame& f = frames[static_cast<std::size_t>(t.start + i)];
      for (const Joint j : all_joints()) {
        const auto& jl = rig[index_of(j)];
        const double amp = g.amplitude * jl.scale * signer_scale * t.amplitude_factor;
        f.at(j)->position = jl.base + (amp * lift) * mirrored(g.direction, joint_side(j));
      }
    }
  }
  if (drop_from) {
    for (long i = *drop_from; i <= total_frames; ++i) {
      for (const Joint j : all_joints()) {
        if (joint_side(j) == Side::left) {
          frames[static_cast<std::size_t>(i)].at(j)->position = Point3{};
        }
      }
    }
  }
  SequenceInfo info;
  info.frame_rate = spec.frame_rate;
  info.source = SourceKind::mocap3d;
  info.up_axis = UpAxis::pos_y;
  info.unit_label = "mm";
  info.signer = signer;
  info.session = session;
  return KeypointSequence(std::move(info), std::move(frames));
}

MetricRecord truth_record(const SignInstance& inst, int mention,
                          const JointGroup& group, const GlossModel& g, const Token& t, double signer_scale) {
  const auto rig = layout();
  const auto members = group.members();
  const double n = static_cast<double>(t.frames);
  const double mean_lift = n / (2.0 * (n + 1.0));
  MetricRecord r;
  r.instance = inst;
  r.mention_index = mention;
  r.group = group;
  r.duration_s = inst.duration_s();
  double extent = 0.0;
  double vertical = 0.0;
  for (const Joint j : members) {
    if (t.weak_dropped && joint_side(j) == Side::left) {
      continue;  // parked at the origin
    }
    const auto& jl = rig[index_of(j)];
    const double amp = g.amplitude * jl.scale * signer_scale * t.amplitude_factor;
    extent += amp;
    vertical += jl.base.y + amp * g.direction.y * mean_lift;
  }
  const double count = static_cast<double>(members.size());
  r.spatial_extent = extent / count;
  r.path_length = 2.0 * extent / count;
  r.avg_velocity = r.path_length / r.duration_s;
  r.mean_vertical = vertical / count;
  return r;
}

}  // namespace

void validate(const SynthSpec& spec) {
  const auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, "synth: " + what); };
  if (spec.glosses < 1) fail("glosses must be at least 1");
  if (spec.mentions < 1) fail("mentions must be at least 1");
  if (!(spec.reduction_rate >= 0.0 && spec.reduction_rate < 1.0)) fail("reduction_rate must lie in [0, 1)");
  if (!(spec.entrain_coupling >= 0.0 && spec.entrain_coupling <= 1.0)) fail("entrain_coupling must lie in [0, 1]");
  if (spec.weak_drop_mention && *spec.weak_drop_mention < 1) fail("weak_drop_mention must be at least 1");
  if (!(spec.frame_rate > 0.0)) fail("frame_rate must be positive");
  if (!(spec.dialogue_duration_ratio > 0.0 && spec.dialogue_duration_ratio <= 1.0)) {
    fail("dialogue_duration_ratio must lie in (0, 1]");
  }
  if (spec.embedding_dim < 2) fail("embedding_dim must be at least 2");
  if (spec.signer_a.empty() || spec.signer_b.empty() || spec.signer_a == spec.signer_b) {
    fail("signer names must be distinct and non-empty");
  }
}

double expected_path_reduction(const SynthSpec& spec, int mention) {
  return 100.0 * (1.0 - std::pow(1.0 - spec.reduction_rate, mention - 1));
}

SynthSession generate_session(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const auto dim = static_cast<std::size_t>(spec.embedding_dim);

  std::vector<GlossModel> glosses(static_cast<std::size_t>(spec.glosses));
  for (std::size_t g = 0; g < glosses.size(); ++g) {
    auto& m = glosses[g];
    char name[32];
    std::snprintf(name, sizeof name, "GLOSS%02zu", g + 1);
    m.name = name;
    m.amplitude = 60.0 + 60.0 * rng.uniform();
    const Vector u = unit_vector(rng, 3);
    m.direction = {u[0], u[1], u[2]};
    const double vocab_ms = 800.0 + 200.0 * static_cast<double>(g % 3);
    m.vocab_frames = even_frames(vocab_ms, spec.frame_rate);
    m.dialogue_frames = even_frames(vocab_ms * spec.dialogue_duration_ratio, spec.frame_rate);
    m.embed_a = unit_vector(rng, dim);
    m.embed_b = unit_vector(rng, dim);
  }

  const long rest = std::max(1L, std::lround(250.0 * spec.frame_rate / 1000.0));
  const long lead = std::max(1L, std::lround(500.0 * spec.frame_rate / 1000.0));
  const std::array<std::string, 2> signers = {spec.signer_a, spec.signer_b};
  const std::array<double, 2> signer_scale = {1.0, 0.9};

  SynthSession out;
  out.embeddings.dim = dim;

  // Dialogue: mentions in rounds, the two signers alternating on each gloss.
  std::array<std::vector<Token>, 2> dialogue;
  std::array<std::optional<long>, 2> drop_from;
  long cursor = lead;
  for (int k = 1; k <= spec.mentions; ++k) {
    for (std::size_t g = 0; g < glosses.size(); ++g) {
      for (std::size_t s = 0; s < 2; ++s) {
        Token t;
        t.gloss = g;
        t.mention = k;
        t.start = cursor;
        t.frames = glosses[g].dialogue_frames;
        t.amplitude_factor = std::pow(1.0 - spec.reduction_rate, k - 1);
        t.weak_dropped = spec.weak_drop_mention && k >= *spec.weak_drop_mention;
        if (t.weak_dropped && !drop_from[s]) {
          drop_from[s] = t.start;
        }
        dialogue[s].push_back(t);
        cursor += t.frames + rest;
      }
    }
  }
  const long dialogue_total = cursor - rest + lead;

  // Citation forms: each gloss once, unreduced.
  std::vector<Token> vocab;
  cursor = lead;
  for (std::size_t g = 0; g < glosses.size(); ++g) {
    Token t;
    t.gloss = g;
    t.start = cursor;
    t.frames = glosses[g].vocab_frames;
    vocab.push_back(t);
    cursor += t.frames + rest;
  }
  const long vocab_total = cursor - rest + lead;

  const auto instance = [&](const Token& t, std::size_t s, Condition c, const char* session) {
    SignInstance inst;
    inst.gloss = glosses[t.gloss].name;
    inst.signer = signers[s];
    inst.interval = {frame_time(t.start, spec.frame_rate), frame_time(t.start + t.frames, spec.frame_rate)};
    inst.condition = c;
    inst.session = session;
    return inst;
  };

  for (std::size_t s = 0; s < 2; ++s) {
    out.recordings.push_back(render(spec, signers[s], kDialogueSession, dialogue[s], glosses, signer_scale[s],
                                    dialogue_total, drop_from[s]));
    out.recordings.push_back(
        render(spec, signers[s], kVocabSession, vocab, glosses, signer_scale[s], vocab_total, std::nullopt));

    for (const auto& t : dialogue[s]) {
      const SignInstance inst = instance(t, s, Condition::dialogue, kDialogueSession);
      out.annotations.push_back(inst);
      for (const auto& group : table_groups()) {
        out.truth.push_back(truth_record(inst, t.mention, group, glosses[t.gloss], t, signer_scale[s]));
      }
      const GlossModel& g = glosses[t.gloss];
      Vector v = g.embed_a;
      if (s == 1) {
        const double w = 1.0 - std::pow(1.0 - spec.entrain_coupling, t.mention - 1);
        for (std::size_t i = 0; i < dim; ++i) {
          v[i] = (1.0 - w) * g.embed_b[i] + w * g.embed_a[i];
        }
        v = normalized(std::move(v));
      }
      out.embeddings.tokens.push_back({inst.gloss, inst.signer, t.mention, inst.interval, std::move(v)});
    }
    for (const auto& t : vocab) {
      const SignInstance inst = instance(t, s, Condition::vocabulary, kVocabSession);
      out.annotations.push_back(inst);
      for (const auto& group : table_groups()) {
        out.truth.push_back(truth_record(inst, 1, group, glosses[t.gloss], t, signer_scale[s]));
      }
    }
  }

  std::sort(out.annotations.begin(), out.annotations.end(), instance_less);
  std::stable_sort(out.embeddings.tokens.begin(), out.embeddings.tokens.end(),
                   [](const EmbeddingToken& a, const EmbeddingToken& b) {
                     return std::tie(a.signer, a.gloss, a.mention_index) < std::tie(b.signer, b.gloss, b.mention_index);
                   });
  std::stable_sort(out.truth.begin(), out.truth.end(), [](const MetricRecord& a, const MetricRecord& b) {
    if (instance_less(a.instance, b.instance)) return true;
    if (instance_less(b.instance, a.instance)) return false;
    return table_row(a.group) < table_row(b.group);
  });
  return out;
}

}  // namespace signkin
