#include "signkin/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <tuple>

#include "signkin/table.hpp"

namespace signkin {

namespace fs = std::filesystem;

std::string_view command_name(Command c) noexcept {
  switch (c) {
    case Command::ingest: return "ingest";
    case Command::metrics: return "metrics";
    case Command::reduce: return "reduce";
    case Command::entrain: return "entrain";
    case Command::spot: return "spot";
    case Command::synth: return "synth";
    case Command::report: return "report";
  }
  return "report";
}

const std::vector<Command>& all_commands() noexcept {
  static const std::vector<Command> commands = {Command::ingest, Command::metrics, Command::reduce, Command::entrain,
                                                Command::spot,   Command::synth,   Command::report};
  return commands;
}

std::optional<Command> find_command(std::string_view name) noexcept {
  for (const auto c : all_commands()) {
    if (command_name(c) == name) {
      return c;
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------------- settings

namespace {

[[noreturn]] void bad_setting(std::string_view key, std::string_view value) {
  throw Error(Errc::config_error, "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  const auto v = table::parse_number(table::trim(value));
  if (!v) bad_setting(key, value);
  return *v;
}

long long to_integer(std::string_view key, std::string_view value) {
  const auto v = table::parse_integer(table::trim(value));
  if (!v) bad_setting(key, value);
  return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
  const auto v = table::trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_setting(key, value);
}

std::vector<std::string> to_list(std::string_view value) {
  std::vector<std::string> out;
  if (table::trim(value).empty()) {
    return out;
  }
  for (const auto part : table::split(value)) {
    out.emplace_back(table::trim(part));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i ? "," : "") + items[i];
  }
  return out;
}

std::string num(double v) { return table::format_number(v); }

// Two-way binding between a key and a label-valued enum field.
template <typename E>
struct Choice {
  std::vector<std::pair<std::string_view, E>> labels;

  E parse(std::string_view key, std::string_view value) const {
    for (const auto& [label, e] : labels) {
      if (label == table::trim(value)) return e;
    }
    bad_setting(key, value);
  }
  std::string name(E e) const {
    for (const auto& [label, v] : labels) {
      if (v == e) return std::string(label);
    }
    return {};
  }
};

const Choice<GroupAggregation> kAggregation{{{"per_joint_mean", GroupAggregation::per_joint_mean},
                                             {"mean_trajectory", GroupAggregation::mean_trajectory}}};
const Choice<stats::PairedTest> kPairedTest{{{"wilcoxon", stats::PairedTest::wilcoxon},
                                             {"t_test", stats::PairedTest::t_test}}};
const Choice<MrrMode> kMrrMode{{{"per_query", MrrMode::per_query}, {"pooled", MrrMode::pooled}}};
const Choice<Pooling> kPooling{{{"pooled", Pooling::pooled}, {"per_gloss", Pooling::per_gloss}}};
const Choice<VariationGrouping> kGrouping{{{"base_term", VariationGrouping::base_term},
                                           {"strict", VariationGrouping::strict}}};
const Choice<MeanScope> kMeanScope{{{"per_gloss", MeanScope::per_gloss}, {"global", MeanScope::global}}};

struct Setting {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> s;
    const auto text = [&s](std::string key, std::string RunConfig::*field) {
      s.push_back({key, [field](RunConfig& c, std::string_view v) { c.*field = std::string(table::trim(v)); },
                   [field](const RunConfig& c) { return c.*field; }});
    };
    const auto list = [&s](std::string key, std::vector<std::string> RunConfig::*field) {
      s.push_back({key, [field](RunConfig& c, std::string_view v) { c.*field = to_list(v); },
                   [field](const RunConfig& c) { return join(c.*field); }});
    };
    const auto real = [&s](std::string key, std::function<double&(RunConfig&)> field) {
      s.push_back({key, [key, field](RunConfig& c, std::string_view v) { field(c) = to_double(key, v); },
                   [field](const RunConfig& c) { return num(field(const_cast<RunConfig&>(c))); }});
    };
    const auto flag = [&s](std::string key, bool RunConfig::*field) {
      s.push_back({key, [key, field](RunConfig& c, std::string_view v) { c.*field = to_bool(key, v); },
                   [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }});
    };
    const auto choice = [&s](std::string key, const auto& options, auto RunConfig::*field) {
      s.push_back({key, [key, &options, field](RunConfig& c, std::string_view v) { c.*field = options.parse(key, v); },
                   [&options, field](const RunConfig& c) { return options.name(c.*field); }});
    };
    const auto integer = [&s](std::string key, std::function<void(RunConfig&, long long)> set,
                              std::function<long long(const RunConfig&)> get) {
      s.push_back({key, [key, set](RunConfig& c, std::string_view v) { set(c, to_integer(key, v)); },
                   [get](const RunConfig& c) { return std::to_string(get(c)); }});
    };

    list("keypoints", &RunConfig::keypoints);
    list("raw_landmarks", &RunConfig::raw_landmarks);
    text("annotations", &RunConfig::annotations);
    text("embeddings", &RunConfig::embeddings);
    text("metrics_table", &RunConfig::metrics_table);
    text("mapping", &RunConfig::mapping);
    text("query_embeddings", &RunConfig::query_embeddings);
    text("window_embeddings", &RunConfig::window_embeddings);
    s.push_back({"dominant_hand",
                 [](RunConfig& c, std::string_view v) {
                   c.dominant_hand.clear();
                   for (const auto& item : to_list(v)) {
                     const auto colon = item.find(':');
                     const auto side = colon == std::string::npos ? std::nullopt
                                                                  : find_side(std::string_view(item).substr(colon + 1));
                     if (!side || colon == 0) bad_setting("dominant_hand", item);
                     c.dominant_hand[item.substr(0, colon)] = *side;
                   }
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> items;
                   for (const auto& [signer, side] : c.dominant_hand) {
                     items.push_back(signer + ":" + std::string(side_name(side)));
                   }
                   return join(items);
                 }});
    real("confidence_floor", [](RunConfig& c) -> double& { return c.confidence_floor; });
    real("max_gap_ratio", [](RunConfig& c) -> double& { return c.max_gap_ratio; });
    choice("aggregation", kAggregation, &RunConfig::aggregation);
    choice("paired_test", kPairedTest, &RunConfig::paired_test);
    real("window_ms", [](RunConfig& c) -> double& { return c.window_ms; });
    real("stride_ms", [](RunConfig& c) -> double& { return c.stride_ms; });
    real("iou_threshold", [](RunConfig& c) -> double& { return c.iou_threshold; });
    s.push_back({"ks",
                 [](RunConfig& c, std::string_view v) {
                   c.ks.clear();
                   for (const auto& item : to_list(v)) {
                     const auto k = to_integer("ks", item);
                     if (k <= 0) bad_setting("ks", item);
                     c.ks.push_back(static_cast<std::size_t>(k));
                   }
                   if (c.ks.empty()) bad_setting("ks", v);
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> items;
                   for (const auto k : c.ks) items.push_back(std::to_string(k));
                   return join(items);
                 }});
    integer(
        "resample_frames",
        [](RunConfig& c, long long v) {
          if (v < 1) bad_setting("resample_frames", std::to_string(v));
          c.resample_frames = static_cast<std::size_t>(v);
        },
        [](const RunConfig& c) { return static_cast<long long>(c.resample_frames); });
    choice("mrr_mode", kMrrMode, &RunConfig::mrr_mode);
    flag("include_first_mention", &RunConfig::include_first_mention);
    flag("literal_delta_cos", &RunConfig::literal_delta_cos);
    choice("pooling", kPooling, &RunConfig::pooling);
    choice("variation_grouping", kGrouping, &RunConfig::variation_grouping);
    choice("mean_scope", kMeanScope, &RunConfig::mean_scope);
    text("signer_a", &RunConfig::signer_a);
    text("signer_b", &RunConfig::signer_b);
    integer(
        "synth.glosses", [](RunConfig& c, long long v) { c.synth.glosses = static_cast<int>(v); },
        [](const RunConfig& c) { return static_cast<long long>(c.synth.glosses); });
    integer(
        "synth.mentions", [](RunConfig& c, long long v) { c.synth.mentions = static_cast<int>(v); },
        [](const RunConfig& c) { return static_cast<long long>(c.synth.mentions); });
    real("synth.reduction_rate", [](RunConfig& c) -> double& { return c.synth.reduction_rate; });
    real("synth.entrain_coupling", [](RunConfig& c) -> double& { return c.synth.entrain_coupling; });
    s.push_back({"synth.weak_drop_mention",
                 [](RunConfig& c, std::string_view v) {
                   const auto t = table::trim(v);
                   if (t.empty() || t == "none") {
                     c.synth.weak_drop_mention.reset();
                   } else {
                     c.synth.weak_drop_mention = static_cast<int>(to_integer("synth.weak_drop_mention", t));
                   }
                 },
                 [](const RunConfig& c) {
                   return c.synth.weak_drop_mention ? std::to_string(*c.synth.weak_drop_mention) : std::string("none");
                 }});
    integer(
        "synth.seed",
        [](RunConfig& c, long long v) {
          if (v < 0) bad_setting("synth.seed", std::to_string(v));
          c.synth.seed = static_cast<std::uint64_t>(v);
        },
        [](const RunConfig& c) { return static_cast<long long>(c.synth.seed); });
    real("synth.frame_rate", [](RunConfig& c) -> double& { return c.synth.frame_rate; });
    real("synth.dialogue_duration_ratio", [](RunConfig& c) -> double& { return c.synth.dialogue_duration_ratio; });
    integer(
        "synth.embedding_dim", [](RunConfig& c, long long v) { c.synth.embedding_dim = static_cast<int>(v); },
        [](const RunConfig& c) { return static_cast<long long>(c.synth.embedding_dim); });
    s.push_back({"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(table::trim(v)); },
                 [](const RunConfig& c) { return c.out_dir.string(); }});
    return s;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& s : settings()) out.push_back(s.key);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(config, value);
      return;
    }
  }
  throw Error(Errc::config_error, "unknown config key '" + std::string(key) + "'");
}

void load_config(RunConfig& config, std::istream& in) {
  table::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const auto t = table::trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(Errc::config_error, reader.line_number(), "expected 'key = value'");
    }
    try {
      apply_setting(config, table::trim(t.substr(0, eq)), table::trim(t.substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.code(), reader.line_number(), e.what());
    }
  }
}

std::string canonical_config(const RunConfig& config) {
  std::string out;
  for (const auto& s : settings()) {
    if (s.key != "out_dir") {
      out += s.key + "=" + s.get(config) + "\n";
    }
  }
  return out;
}

std::string config_digest(const RunConfig& config) { return table::fnv1a_hex(canonical_config(config)); }

// --------------------------------------------------------------------- errors

FileError::FileError(Errc code, std::string path, std::size_t line, const std::string& message)
    : Error(code, message), path_(std::move(path)), line_(line) {}

std::string error_record(const std::exception& e) {
  nlohmann::ordered_json j;
  if (const auto* fe = dynamic_cast<const FileError*>(&e)) {
    j["error"] = errc_name(fe->code());
    j["message"] = fe->what();
    j["file"] = fe->path();
    j["line"] = fe->line() ? nlohmann::ordered_json(fe->line()) : nlohmann::ordered_json(nullptr);
  } else if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    j["error"] = errc_name(pe->code());
    j["message"] = pe->what();
    j["file"] = nullptr;
    j["line"] = pe->line();
  } else if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["error"] = errc_name(err->code());
    j["message"] = err->what();
    j["file"] = nullptr;
    j["line"] = nullptr;
  } else {
    j["error"] = "internal";
    j["message"] = e.what();
    j["file"] = nullptr;
    j["line"] = nullptr;
  }
  return j.dump();
}

// ---------------------------------------------------------------- metric table

namespace {

constexpr std::string_view kMetricHeader =
    "gloss,variation,signer,condition,session,mention_index,group,spatial_extent,path_length,avg_velocity,"
    "duration_s,mean_vertical,start_ms,end_ms";

}  // namespace

std::string format_metric_table(std::span<const MetricRecord> records) {
  std::ostringstream out;
  out << kMetricHeader << '\n';
  for (const auto& r : records) {
    const auto& i = r.instance;
    out << i.gloss << ',' << i.variation << ',' << i.signer << ',' << condition_name(i.condition) << ','
        << i.session << ',' << r.mention_index << ',' << r.group.label() << ',' << num(r.spatial_extent) << ','
        << num(r.path_length) << ',' << num(r.avg_velocity) << ',' << num(r.duration_s) << ','
        << num(r.mean_vertical) << ',' << num(i.interval.start_ms) << ',' << num(i.interval.end_ms) << '\n';
  }
  return out.str();
}

std::vector<MetricRecord> parse_metric_table(std::istream& in) {
  std::vector<MetricRecord> out;
  table::LineReader reader(in);
  std::string line;
  bool have_header = false;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (table::trim(line).empty() || line.front() == '#') {
      continue;
    }
    if (!have_header) {
      if (line != kMetricHeader) {
        throw ParseError(Errc::malformed_header, ln, "expected header row '" + std::string(kMetricHeader) + "'");
      }
      have_header = true;
      continue;
    }
    const auto f = table::split(line);
    if (f.size() != 14) {
      throw ParseError(Errc::malformed_row, ln, "expected 14 fields, got " + std::to_string(f.size()));
    }
    MetricRecord r;
    r.instance.gloss = std::string(f[0]);
    r.instance.variation = std::string(f[1]);
    r.instance.signer = std::string(f[2]);
    const auto cond = find_condition(f[3]);
    if (!cond) {
      throw ParseError(Errc::unknown_condition, ln, "unknown condition '" + std::string(f[3]) + "'");
    }
    r.instance.condition = *cond;
    r.instance.session = std::string(f[4]);
    const auto mention = table::parse_integer(f[5]);
    const auto group = find_group(f[6]);
    if (!mention || *mention < 1) {
      throw ParseError(Errc::malformed_row, ln, "bad mention_index");
    }
    if (!group) {
      throw ParseError(Errc::malformed_row, ln, "unknown group '" + std::string(f[6]) + "'");
    }
    r.mention_index = static_cast<int>(*mention);
    r.group = *group;
    std::array<double, 7> v{};
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto x = table::parse_number(f[7 + k]);
      if (!x) {
        throw ParseError(Errc::malformed_row, ln, "bad number in column " + std::to_string(8 + k));
      }
      v[k] = *x;
    }
    r.spatial_extent = v[0];
    r.path_length = v[1];
    r.avg_velocity = v[2];
    r.duration_s = v[3];
    r.mean_vertical = v[4];
    r.instance.interval = {v[5], v[6]};
    if (!(v[5] < v[6])) {
      throw ParseError(Errc::invalid_interval, ln, "end_ms must exceed start_ms");
    }
    out.push_back(std::move(r));
  }
  if (!have_header) {
    throw ParseError(Errc::malformed_header, reader.line_number() + 1, "missing header row");
  }
  return out;
}

// -------------------------------------------------------------------- files

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileError(Errc::missing_input, path.string(), 0, "cannot open input file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Parse>
auto parse_file(const fs::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileError(Errc::missing_input, path.string(), 0, "cannot open input file");
  }
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw FileError(e.code(), path.string(), e.line(), e.what());
  } catch (const FileError&) {
    throw;
  } catch (const Error& e) {
    throw FileError(e.code(), path.string(), 0, e.what());
  }
}

class Outputs {
 public:
  Outputs(const RunConfig& config) : dir_(config.out_dir), digest_(config_digest(config)) {}

  void write(const fs::path& relative, const std::string& body) {
    const fs::path path = dir_ / relative;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FileError(Errc::io_error, path.string(), 0, "cannot write output file");
    }
    out << "#config_digest=" << digest_ << '\n' << body;
    if (!out) {
      throw FileError(Errc::io_error, path.string(), 0, "write failed");
    }
    written_.push_back(path);
  }

  const fs::path& dir() const { return dir_; }
  std::vector<fs::path> take() { return std::move(written_); }

 private:
  fs::path dir_;
  std::string digest_;
  std::vector<fs::path> written_;
};

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

std::vector<fs::path> keypoint_paths(const RunConfig& config) {
  std::vector<fs::path> out;
  if (!config.keypoints.empty()) {
    for (const auto& p : config.keypoints) out.emplace_back(p);
    return out;
  }
  const fs::path dir = config.out_dir / "keypoints";
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        out.push_back(entry.path());
      }
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) {
    throw FileError(Errc::missing_input, dir.string(), 0, "no keypoint files");
  }
  return out;
}

using RecordingKey = std::pair<std::string, std::string>;  // signer, session

struct Recording {
  fs::path path;
  KeypointSequence seq;
};

std::map<RecordingKey, Recording> load_recordings(const RunConfig& config) {
  std::map<RecordingKey, Recording> out;
  for (const auto& path : keypoint_paths(config)) {
    auto seq = parse_file(path, [](std::istream& in) { return parse_keypoint_file(in); });
    RecordingKey key{seq.info().signer, seq.info().session};
    if (out.count(key)) {
      throw FileError(Errc::config_error, path.string(), 0,
                      "second recording for signer '" + key.first + "' session '" + key.second + "'");
    }
    out.emplace(std::move(key), Recording{path, std::move(seq)});
  }
  return out;
}

AnnotationSet load_annotations(const RunConfig& config, fs::path& path) {
  path = or_default(config.annotations, config.out_dir / "annotations.csv");
  auto set = parse_file(path, [](std::istream& in) { return parse_annotations(in); });
  for (const auto& w : set.warnings) {
    warn(path.string() + ":" + std::to_string(w.line) + ": " + w.message);
  }
  return set;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string k_columns(const std::vector<std::size_t>& ks, std::string_view prefix) {
  std::string out;
  for (const auto k : ks) out += "," + std::string(prefix) + "@" + std::to_string(k);
  return out;
}

// ------------------------------------------------------------------ commands

void run_synth(const RunConfig& config, Outputs& out) {
  SynthSpec spec = config.synth;
  spec.signer_a = config.signer_a;
  spec.signer_b = config.signer_b;
  const SynthSession session = generate_session(spec);
  for (const auto& rec : session.recordings) {
    out.write(fs::path("keypoints") / (rec.info().signer + "_" + rec.info().session + ".csv"),
              serialize_keypoint_file(rec));
  }
  out.write("annotations.csv", serialize_annotations(session.annotations));
  out.write("embeddings.csv", serialize_embedding_tokens(session.embeddings));
  out.write("truth.csv", format_metric_table(session.truth));
}

void run_ingest(const RunConfig& config, Outputs& out) {
  const LandmarkMapping mapping =
      config.mapping.empty()
          ? LandmarkMapping::standard()
          : parse_file(config.mapping, [](std::istream& in) { return parse_landmark_mapping(in); });
  std::ostringstream summary;
  summary << "file,signer,session,source_kind,up_axis,frames,joint_samples\n";
  const auto describe = [&summary](const std::string& name, const KeypointSequence& seq) {
    std::size_t samples = 0;
    for (const auto& f : seq.frames()) samples += f.present_count();
    summary << name << ',' << seq.info().signer << ',' << seq.info().session << ','
            << source_kind_name(seq.info().source) << ',' << up_axis_name(seq.info().up_axis) << ',' << seq.size()
            << ',' << samples << '\n';
  };

  std::size_t described = 0;
  for (const auto& raw_path : config.raw_landmarks) {
    const auto raw = parse_file(raw_path, [](std::istream& in) { return parse_raw_landmarks(in); });
    KeypointSequence seq = map_pose_landmarks(raw, mapping);
    const std::string stem = fs::path(raw_path).stem().string();
    const std::string name = (raw.signer.empty() ? stem : raw.signer) + "_" + (raw.session.empty() ? stem : raw.session);
    out.write(fs::path("keypoints") / (name + ".csv"), serialize_keypoint_file(seq));
    describe(name + ".csv", seq);
    ++described;
  }
  if (!config.keypoints.empty()) {
    for (const auto& p : config.keypoints) {
      const auto seq = parse_file(p, [](std::istream& in) { return parse_keypoint_file(in); });
      describe(fs::path(p).filename().string(), seq);
      ++described;
    }
  }
  if (described == 0) {
    throw Error(Errc::missing_input, "nothing to ingest: set raw_landmarks or keypoints");
  }
  out.write("ingest.csv", summary.str());
}

void run_metrics(const RunConfig& config, Outputs& out) {
  const auto recordings = load_recordings(config);
  fs::path ann_path;
  const AnnotationSet ann = load_annotations(config, ann_path);
  const std::vector<int> mentions = mention_indices(ann.instances, config.variation_grouping);

  MetricOptions options;
  options.confidence_floor = config.confidence_floor;
  options.max_gap_ratio = config.max_gap_ratio;
  options.aggregation = config.aggregation;

  std::vector<MetricRecord> records;
  std::ostringstream skipped;
  skipped << "gloss,signer,session,condition,start_ms,end_ms,group,error\n";
  std::vector<std::size_t> order(ann.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance_less(ann.instances[a], ann.instances[b]);
  });
  for (const std::size_t i : order) {
    const SignInstance& inst = ann.instances[i];
    const auto rec = recordings.find({inst.signer, inst.session});
    if (rec == recordings.end()) {
      throw FileError(Errc::missing_input, ann_path.string(), 0,
                      "no keypoint recording for signer '" + inst.signer + "' session '" + inst.session + "'");
    }
    for (const auto& group : table_groups()) {
      try {
        MetricRecord r = compute_record(rec->second.seq, inst, group, options);
        r.mention_index = mentions[i];
        records.push_back(std::move(r));
      } catch (const Error& e) {
        if (e.code() != Errc::interval_not_covered && e.code() != Errc::members_absent &&
            e.code() != Errc::gap_ratio_exceeded) {
          throw FileError(e.code(), rec->second.path.string(), 0, e.what());
        }
        skipped << inst.gloss << ',' << inst.signer << ',' << inst.session << ',' << condition_name(inst.condition)
                << ',' << num(inst.interval.start_ms) << ',' << num(inst.interval.end_ms) << ',' << group.label()
                << ',' << errc_name(e.code()) << '\n';
      }
    }
  }
  out.write("metrics.csv", format_metric_table(records));
  out.write("metrics_skipped.csv", skipped.str());
}

void run_reduce(const RunConfig& config, Outputs& out) {
  const fs::path path = or_default(config.metrics_table, config.out_dir / "metrics.csv");
  const auto records = parse_file(path, [](std::istream& in) { return parse_metric_table(in); });

  ReductionOptions ropt;
  ropt.include_first_mention = config.include_first_mention;
  ropt.pooling = config.pooling;
  const auto tables = repeated_mention_correlations(records, ropt);

  std::ostringstream grid;
  grid << "signer,condition,group,column,status,n,rho,p_value,method,stars,mean_change,per_gloss_mean_rho\n";
  std::ostringstream changes;
  changes << "signer,condition,group,column,session,gloss,mention_index,percent_change\n";
  const auto emit = [&](const ReductionTable& t, const std::string& group, std::string_view column,
                        const CorrelationCell& c) {
    const auto& p = c.pooled;
    grid << t.signer << ',' << condition_name(t.condition) << ',' << group << ',' << column << ','
         << status_name(c.status) << ',' << c.n_pairs << ',' << (p ? num(p->rho) : "") << ','
         << (p ? num(p->p_value) : "") << ',' << (p ? std::string(stats::method_name(p->method)) : "") << ','
         << (p ? stats::significance_stars(p->p_value) : "") << ',' << num(c.mean_change) << ','
         << opt_num(c.per_gloss_mean_rho) << '\n';
    for (const auto& g : c.per_gloss) {
      for (const auto& ch : g.changes) {
        changes << t.signer << ',' << condition_name(t.condition) << ',' << group << ',' << column << ','
                << g.session << ',' << g.gloss << ',' << ch.mention_index << ',' << num(ch.change) << '\n';
      }
    }
  };
  for (const auto& t : tables) {
    for (const auto& cell : t.cells) {
      emit(t, cell.group.label(), column_name(cell.column), cell.cell);
    }
    emit(t, "All", "DurationReduction", t.duration);
  }

  // Dialogue tokens against the same signer's citation forms.
  std::set<std::string> signers;
  for (const auto& r : records) signers.insert(r.instance.signer);
  std::vector<BaselinePair> pairs;
  for (const auto& signer : signers) {
    std::vector<SignInstance> dialogue;
    std::vector<SignInstance> vocab;
    for (const auto& r : records) {
      if (r.instance.signer != signer || r.group != table_groups().front()) continue;
      if (r.instance.condition == Condition::dialogue) dialogue.push_back(r.instance);
      if (r.instance.condition == Condition::vocabulary) vocab.push_back(r.instance);
    }
    if (dialogue.empty()) continue;
    const auto match = match_vocab_baseline(dialogue, vocab);
    for (const auto& g : match.unmatched) {
      warn("no vocabulary baseline for '" + g + "' by " + signer);
    }
    pairs.insert(pairs.end(), match.pairs.begin(), match.pairs.end());
  }
  DeltaOptions dopt;
  dopt.test = config.paired_test;
  dopt.dominant_hand = config.dominant_hand;
  const DeltaAnalysis delta = vocab_delta_series(records, pairs, dopt);
  for (const auto& w : delta.warnings) warn(w);

  std::ostringstream series;
  series << "signer,session,gloss,group,metric,mention_index,delta\n";
  for (const auto& s : delta.series) {
    for (const auto& p : s.points) {
      series << s.key.signer << ',' << s.key.session << ',' << s.key.gloss << ',' << s.key.group.label() << ','
             << metric_name(s.key.metric) << ',' << p.mention_index << ',' << num(p.delta) << '\n';
    }
  }
  std::ostringstream means;
  means << "signer,group,metric,mention_index,count,mean,std_error\n";
  for (const auto& m : delta.mean_series) {
    means << m.signer << ',' << m.group.label() << ',' << metric_name(m.metric) << ',' << m.mention_index << ','
          << m.count << ',' << num(m.mean) << ',' << num(m.std_error) << '\n';
  }
  std::ostringstream summary;
  summary << "signer,metric,group,dominant_hand,tokens,glosses,mean_percent_reduction,mean_delta,p_value,stars\n";
  for (const auto& s : delta.summaries) {
    summary << s.signer << ',' << metric_name(s.metric) << ',' << (s.group ? s.group->label() : "All") << ','
            << (s.dominant_hand ? "true" : "false") << ',' << s.tokens << ',' << s.glosses << ','
            << num(s.mean_percent_reduction) << ',' << num(s.mean_delta) << ',' << opt_num(s.p_value) << ','
            << (s.p_value ? stats::significance_stars(*s.p_value) : "") << '\n';
  }

  out.write("reduction_table.csv", grid.str());
  out.write("mention_changes.csv", changes.str());
  out.write("delta_series.csv", series.str());
  out.write("delta_means.csv", means.str());
  out.write("baseline_summary.csv", summary.str());
}

void run_entrain(const RunConfig& config, Outputs& out) {
  const fs::path path = or_default(config.embeddings, config.out_dir / "embeddings.csv");
  const auto set = parse_file(path, [](std::istream& in) { return parse_embedding_tokens(in); });
  EntrainOptions options;
  options.mode = config.literal_delta_cos ? DeltaCosMode::literal : DeltaCosMode::cross_signer;
  options.mean_scope = config.mean_scope;
  const auto report = analyze_entrainment(set, config.signer_a, config.signer_b, options);
  for (const auto& g : report.skipped) {
    warn("entrainment skips '" + g + "': fewer than two tokens from a signer");
  }

  std::ostringstream entries;
  entries << "signer_a,signer_b,gloss,tokens_a,tokens_b,delta_cos,slope_a_to_b,slope_b_to_a,selfsim_a,selfsim_b\n";
  std::ostringstream projection;
  projection << "gloss,signer,mention_index,sim\n";
  for (const auto& e : report.entries) {
    entries << report.signer_a << ',' << report.signer_b << ',' << e.gloss << ',' << e.tokens_a << ','
            << e.tokens_b << ',' << num(e.delta_cos) << ',' << num(e.slope_a_to_b) << ',' << num(e.slope_b_to_a)
            << ',' << num(e.selfsim_a) << ',' << num(e.selfsim_b) << '\n';
    for (const auto& p : e.projection) {
      projection << e.gloss << ',' << p.signer << ',' << p.mention_index << ',' << num(p.sim) << '\n';
    }
  }
  out.write("entrainment.csv", entries.str());
  out.write("projection.csv", projection.str());
}

struct SpotRun {
  std::string input;
  std::string model;
  std::string signer;
  std::string session;
  std::string gloss;
  Interval query;
  std::size_t windows = 0;
  QueryReport report;
};

std::vector<SpotRun> spot_kinematic(const RunConfig& config, const ScoreOptions& score) {
  const auto recordings = load_recordings(config);
  fs::path ann_path;
  const AnnotationSet ann = load_annotations(config, ann_path);

  std::vector<SignInstance> queries;
  std::map<RecordingKey, std::vector<const SignInstance*>> corpus;  // searched recording -> its tokens
  for (const auto& inst : ann.instances) {
    if (inst.condition == Condition::vocabulary) {
      queries.push_back(inst);
    } else {
      corpus[{inst.signer, inst.session}].push_back(&inst);
    }
  }
  if (queries.empty()) {
    throw FileError(Errc::no_queries, ann_path.string(), 0, "no queries");
  }
  std::sort(queries.begin(), queries.end(), instance_less);

  EmbedParams params;
  params.resample_frames = config.resample_frames;
  params.confidence_floor = config.confidence_floor;

  std::map<RecordingKey, std::vector<Window>> windows;
  for (const auto& [key, tokens] : corpus) {
    const auto rec = recordings.find(key);
    if (rec == recordings.end()) {
      throw FileError(Errc::missing_input, ann_path.string(), 0,
                      "no keypoint recording for signer '" + key.first + "' session '" + key.second + "'");
    }
    const auto& frames = rec->second.seq.frames();
    const double origin = frames.front().time_ms;
    auto ws = make_windows(frames.back().time_ms - origin, config.window_ms, config.stride_ms, origin);
    for (auto& w : ws) {
      const auto e = kinematic_embed(rec->second.seq, w.interval, params);
      w.embedding = e.vector;
      w.stationary = e.stationary;
    }
    windows.emplace(key, std::move(ws));
  }

  std::vector<SpotRun> runs;
  for (const auto& q : queries) {
    const auto rec = recordings.find({q.signer, q.session});
    if (rec == recordings.end()) {
      throw FileError(Errc::missing_input, ann_path.string(), 0,
                      "no keypoint recording for signer '" + q.signer + "' session '" + q.session + "'");
    }
    const auto qe = kinematic_embed(rec->second.seq, q.interval, params);
    if (qe.stationary) {
      warn("query '" + q.gloss + "' by " + q.signer + " is stationary; skipped");
      continue;
    }
    bool searched = false;
    for (const auto& [key, ws] : windows) {
      if (key.first != q.signer) continue;
      std::vector<Interval> truth;
      for (const auto* t : corpus.at(key)) {
        if (t->gloss == q.gloss) truth.push_back(t->interval);
      }
      SpotRun run;
      run.input = std::string(source_kind_name(recordings.at(key).seq.info().source));
      run.model = "kinematic";
      run.signer = q.signer;
      run.session = key.second;
      run.gloss = q.gloss;
      run.query = q.interval;
      run.windows = ws.size();
      run.report = rank_and_score(qe.vector, ws, truth, score);
      run.report.gloss = q.gloss;
      runs.push_back(std::move(run));
      searched = true;
    }
    if (!searched) {
      warn("no recording to search for '" + q.gloss + "' by " + q.signer);
    }
  }
  return runs;
}

std::vector<SpotRun> spot_external(const RunConfig& config, const ScoreOptions& score) {
  const auto parse = [](std::istream& in) { return parse_embedding_tokens(in); };
  const auto qset = parse_file(config.query_embeddings, parse);
  const auto wset = parse_file(config.window_embeddings, parse);
  if (qset.dim != wset.dim) {
    throw FileError(Errc::dimension_mismatch, config.window_embeddings, 0,
                    "window dimension " + std::to_string(wset.dim) + " differs from query dimension " +
                        std::to_string(qset.dim));
  }
  if (qset.tokens.empty()) {
    throw FileError(Errc::no_queries, config.query_embeddings, 0, "no queries");
  }
  fs::path ann_path;
  const AnnotationSet ann = load_annotations(config, ann_path);

  std::map<std::string, std::vector<Window>> windows;  // per signer, by start
  for (const auto& t : wset.tokens) {
    windows[t.signer].push_back({t.interval, t.vector, false});
  }
  for (auto& [signer, ws] : windows) {
    std::stable_sort(ws.begin(), ws.end(),
                     [](const Window& a, const Window& b) { return a.interval.start_ms < b.interval.start_ms; });
  }

  std::vector<SpotRun> runs;
  for (const auto& q : qset.tokens) {
    const auto it = windows.find(q.signer);
    if (it == windows.end()) {
      warn("no windows to search for '" + q.gloss + "' by " + q.signer);
      continue;
    }
    std::vector<Interval> truth;
    for (const auto& inst : ann.instances) {
      if (inst.condition != Condition::vocabulary && inst.signer == q.signer && inst.gloss == q.gloss) {
        truth.push_back(inst.interval);
      }
    }
    SpotRun run;
    run.input = "embeddings";
    run.model = "external";
    run.signer = q.signer;
    run.gloss = q.gloss;
    run.query = q.interval;
    run.windows = it->second.size();
    run.report = rank_and_score(q.vector, it->second, truth, score);
    run.report.gloss = q.gloss;
    runs.push_back(std::move(run));
  }
  return runs;
}

void run_spot(const RunConfig& config, Outputs& out) {
  ScoreOptions score;
  score.ks = config.ks;
  score.iou_threshold = config.iou_threshold;
  const bool external = !config.query_embeddings.empty() || !config.window_embeddings.empty();
  if (external && (config.query_embeddings.empty() || config.window_embeddings.empty())) {
    throw Error(Errc::config_error, "query_embeddings and window_embeddings must be set together");
  }
  const auto runs = external ? spot_external(config, score) : spot_kinematic(config, score);
  if (runs.empty()) {
    throw Error(Errc::no_queries, "no queries");
  }

  std::ostringstream per_query;
  per_query << "input,model,signer,session,gloss,query_start_ms,query_end_ms,windows,matching_windows,mrr"
            << k_columns(config.ks, "r") << k_columns(config.ks, "truth_r") << '\n';
  std::map<std::pair<std::string, std::string>, std::vector<QueryReport>> grouped;
  for (const auto& r : runs) {
    per_query << r.input << ',' << r.model << ',' << r.signer << ',' << r.session << ',' << r.gloss << ','
              << num(r.query.start_ms) << ',' << num(r.query.end_ms) << ',' << r.windows << ','
              << r.report.matching_windows << ',' << num(r.report.mrr);
    for (const auto k : config.ks) per_query << ',' << num(r.report.recall_at_k.at(k));
    for (const auto k : config.ks) per_query << ',' << num(r.report.truth_recall_at_k.at(k));
    per_query << '\n';
    grouped[{r.input, r.model}].push_back(r.report);
  }

  std::ostringstream summary;
  summary << "input,model,mrr" << k_columns(config.ks, "r") << k_columns(config.ks, "truth_r") << ",queries\n";
  for (const auto& [key, reports] : grouped) {
    const auto agg = aggregate_reports(reports, key.first, key.second, score, config.mrr_mode);
    summary << agg.input << ',' << agg.model << ',' << num(agg.mrr);
    for (const auto k : config.ks) summary << ',' << num(agg.recall_at_k.at(k));
    for (const auto k : config.ks) summary << ',' << num(agg.truth_recall_at_k.at(k));
    summary << ',' << agg.queries << '\n';
  }
  out.write("spot_queries.csv", per_query.str());
  out.write("spot_report.csv", summary.str());
}

// Rows of one of our own csv outputs, digest and header removed.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::vector<std::string>* header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  table::LineReader reader(in);
  std::string line;
  bool have_header = false;
  while (reader.next(line)) {
    if (table::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    for (const auto f : table::split(line)) fields.emplace_back(f);
    if (!have_header) {
      have_header = true;
      if (header) *header = std::move(fields);
      continue;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string fixed(std::string_view text, int digits) {
  const auto v = table::parse_number(text);
  if (!v) return std::string(text);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

void run_report(const RunConfig& config, Outputs& out) {
  std::string text;
  text += render_reduction_grid(read_text(config.out_dir / "reduction_table.csv"), config.pooling);
  const fs::path baseline = config.out_dir / "baseline_summary.csv";
  if (fs::exists(baseline)) {
    std::vector<std::string> header;
    const auto rows = csv_rows(read_text(baseline), &header);
    text += "\nDialogue against vocabulary (mean percent reduction)\n";
    for (const auto& r : rows) {
      if (r.size() < 10) continue;
      const bool duration = r[1] == "duration_s";
      const bool dominant = r[3] == "true";
      if (!duration && !(dominant && (r[1] == "spatial_extent" || r[1] == "path_length" || r[1] == "mean_vertical"))) {
        continue;
      }
      text += "  " + pad(r[0], 14) + pad(r[1], 16) + pad(r[2], 12) + fixed(r[6], 2) + "%  p=" +
              (r[8].empty() ? std::string("n/a") : fixed(r[8], 4)) + r[9] + "\n";
    }
  }
  const fs::path spot = config.out_dir / "spot_report.csv";
  if (fs::exists(spot)) {
    text += "\n" + render_retrieval_table(read_text(spot));
  }
  out.write("report.txt", text);
}

}  // namespace

std::string render_reduction_grid(const std::string& reduction_csv, Pooling pooling) {
  std::vector<std::string> header;
  const auto rows = csv_rows(reduction_csv, &header);
  // signer -> condition -> (group, column) -> row
  std::map<std::string, std::map<Condition, std::map<std::pair<std::string, std::string>, const std::vector<std::string>*>>>
      cells;
  for (const auto& r : rows) {
    if (r.size() < 12) {
      throw Error(Errc::malformed_row, "reduction table row with " + std::to_string(r.size()) + " fields");
    }
    const auto cond = find_condition(r[1]);
    if (!cond) {
      throw Error(Errc::unknown_condition, "unknown condition '" + r[1] + "'");
    }
    cells[r[0]][*cond][{r[2], r[3]}] = &r;
  }

  constexpr std::size_t kLabel = 14;
  constexpr std::size_t kCell = 14;
  const bool per_gloss = pooling == Pooling::per_gloss;
  std::string out = per_gloss ? "Repeated-mention correlations (mean per-gloss Spearman rho)\n"
                              : "Repeated-mention correlations (Spearman rho, pooled)\n";
  for (const auto& [signer, by_cond] : cells) {
    out += "\nSigner: " + signer + "\n";
    std::string line1 = pad("", kLabel);
    std::string line2 = pad("Group", kLabel);
    for (const auto& [cond, _] : by_cond) {
      line1 += pad(std::string(condition_name(cond)), kCell * 3);
      line2 += pad("Spatial", kCell) + pad("Path", kCell) + pad("Velocity", kCell);
    }
    for (auto* l : {&line1, &line2}) {
      while (!l->empty() && l->back() == ' ') l->pop_back();
    }
    out += line1 + "\n" + line2 + "\n";
    for (const auto& group : table_groups()) {
      std::string line = pad(group.label(), kLabel);
      for (const auto& [cond, row_map] : by_cond) {
        for (const auto column : reduction_columns()) {
          std::string cell = "(-)";
          const auto it = row_map.find({group.label(), std::string(column_name(column))});
          if (it != row_map.end()) {
            const auto& r = *it->second;
            if (per_gloss) {
              if (!r[11].empty()) cell = fixed(r[11], 2);
            } else if (r[4] == "ok") {
              cell = fixed(r[6], 2) + r[9];
            } else if (r[4] == "degenerate") {
              cell = "const";
            }
          }
          if (cond == Condition::interpreter && cell != "(-)") {
            cell = "(" + cell + ")";
          }
          line += pad(cell, kCell);
        }
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
    }
    for (const auto& [cond, row_map] : by_cond) {
      const auto it = row_map.find({"All", "DurationReduction"});
      if (it == row_map.end()) continue;
      const auto& r = *it->second;
      out += "Duration (" + std::string(condition_name(cond)) + "): ";
      out += r[4] == "ok" ? "rho=" + fixed(r[6], 2) + r[9] + " p=" + fixed(r[7], 4) + " n=" + r[5] : r[4];
      out += "\n";
    }
  }
  return out;
}

std::string render_retrieval_table(const std::string& spot_csv) {
  std::vector<std::string> header;
  const auto rows = csv_rows(spot_csv, &header);
  std::vector<std::size_t> width(header.size());
  std::vector<std::vector<std::string>> shown;
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < r.size() && i < header.size(); ++i) {
      const bool numeric = i >= 2 && header[i] != "queries";
      cells.push_back(numeric ? fixed(r[i], 3) : r[i]);
    }
    shown.push_back(std::move(cells));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = header[i].size();
    for (const auto& r : shown) {
      if (i < r.size()) width[i] = std::max(width[i], r[i].size());
    }
  }
  const auto render_row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      line += (i ? "  " : "") + pad(cells[i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };
  std::string out = "Retrieval (mean reciprocal rank, recall@k)\n";
  out += render_row(header);
  for (const auto& r : shown) out += render_row(r);
  return out;
}

std::vector<fs::path> run_pipeline(Command command, const RunConfig& config) {
  Outputs out(config);
  switch (command) {
    case Command::synth: run_synth(config, out); break;
    case Command::ingest: run_ingest(config, out); break;
    case Command::metrics: run_metrics(config, out); break;
    case Command::reduce: run_reduce(config, out); break;
    case Command::entrain: run_entrain(config, out); break;
    case Command::spot: run_spot(config, out); break;
    case Command::report: run_report(config, out); break;
  }
  return out.take();
}

}  // namespace signkin
