#include "procnets/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "procnets/errors.hpp"

namespace procnets {

namespace fs = std::filesystem;
using nlohmann::json;

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw Error(ErrorKind::invalid_argument,
              "unknown split '" + name + "' (expected train, val or test)");
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path + ": " + e.what());
  }
}

[[noreturn]] void bad_field(const std::string& video_id, const std::string& field,
                            const std::string& why) {
  throw Error(ErrorKind::parse,
              "video '" + video_id + "': field '" + field + "' " + why);
}

}  // namespace

std::vector<AnnotatedVideo> load_annotations(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_object() || !doc.contains("videos") || !doc["videos"].is_array()) {
    throw Error(ErrorKind::parse, path + ": expected top-level {\"videos\": [...]}");
  }
  std::vector<AnnotatedVideo> out;
  for (size_t i = 0; i < doc["videos"].size(); ++i) {
    const json& rec = doc["videos"][i];
    std::string id = "#" + std::to_string(i);
    if (rec.contains("id") && rec["id"].is_string()) {
      id = rec["id"].get<std::string>();
    } else {
      bad_field(id, "id", "missing or not a string");
    }
    if (!rec.contains("duration") || !rec["duration"].is_number()) {
      bad_field(id, "duration", "missing or not a number");
    }
    const double duration = rec["duration"].get<double>();
    if (duration <= 0.0) bad_field(id, "duration", "must be positive");
    if (!rec.contains("num_frames") || !rec["num_frames"].is_number_integer()) {
      bad_field(id, "num_frames", "missing or not an integer");
    }
    const int num_frames = rec["num_frames"].get<int>();
    if (num_frames < 1) bad_field(id, "num_frames", "must be at least 1");
    if (!rec.contains("split") || !rec["split"].is_string()) {
      bad_field(id, "split", "missing or not a string");
    }
    AnnotatedVideo video;
    video.id = id;
    video.num_frames = num_frames;
    try {
      video.split = parse_split(rec["split"].get<std::string>());
    } catch (const Error& e) {
      bad_field(id, "split", e.what());
    }
    if (!rec.contains("segments") || !rec["segments"].is_array()) {
      bad_field(id, "segments", "missing or not an array");
    }
    for (const json& seg : rec["segments"]) {
      if (!seg.is_object() || !seg.contains("start") || !seg.contains("end") ||
          !seg["start"].is_number() || !seg["end"].is_number()) {
        bad_field(id, "segments", "entries need numeric start/end");
      }
      const double start_s = seg["start"].get<double>();
      const double end_s = seg["end"].get<double>();
      int64_t start = std::llround(start_s * num_frames / duration);
      int64_t end = std::llround(end_s * num_frames / duration);
      if (end > num_frames) {
        warn("video '" + id + "': segment end beyond duration, clipping to " +
             std::to_string(num_frames) + " frames");
        end = num_frames;
      }
      if (start < 0) {
        warn("video '" + id + "': negative segment start, clipping to 0");
        start = 0;
      }
      if (end <= start) {
        warn("video '" + id + "': segment [" + std::to_string(start_s) + "s, " +
             std::to_string(end_s) + "s) collapsed after rounding, dropped");
        continue;
      }
      video.segments.emplace_back(static_cast<int>(start),
                                  static_cast<int>(end));
    }
    if (video.segments.empty()) {
      warn("video '" + id + "': no usable segments, skipped");
      continue;
    }
    std::stable_sort(video.segments.begin(), video.segments.end(),
                     [](const Segment& a, const Segment& b) {
                       if (a.start != b.start) return a.start < b.start;
                       return a.end < b.end;
                     });
    for (size_t s = 1; s < video.segments.size(); ++s) {
      if (video.segments[s].start < video.segments[s - 1].end) {
        warn("video '" + id + "': overlapping segments at index " +
             std::to_string(s));
      }
    }
    if (video.segments.size() > 16) {
      warn("video '" + id + "': " + std::to_string(video.segments.size()) +
           " segments exceeds the expected maximum of 16");
    }
    out.push_back(std::move(video));
  }
  return out;
}

void save_annotations(const std::vector<AnnotatedVideo>& videos,
                      const std::string& path) {
  json doc;
  doc["videos"] = json::array();
  for (const AnnotatedVideo& video : videos) {
    json rec;
    rec["id"] = video.id;
    // 1 fps: durations in seconds equal frame counts, so loading is exact.
    rec["duration"] = video.num_frames;
    rec["num_frames"] = video.num_frames;
    rec["split"] = split_name(video.split);
    rec["segments"] = json::array();
    for (const Segment& seg : video.segments) {
      rec["segments"].push_back({{"start", seg.start}, {"end", seg.end}});
    }
    doc["videos"].push_back(std::move(rec));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

namespace {

constexpr char kFeatureMagic[4] = {'P', 'S', 'F', '1'};

void put_u32(std::ostream& out, uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.write(bytes, 4);
}

}  // namespace

Array2 load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  char header[16];
  in.read(header, 16);
  if (in.gcount() != 16) {
    throw Error(ErrorKind::format,
                path + ": truncated header at byte offset " +
                    std::to_string(in.gcount()));
  }
  if (std::memcmp(header, kFeatureMagic, 4) != 0) {
    throw Error(ErrorKind::format, path + ": bad magic at byte offset 0");
  }
  uint32_t frames = 0, dim = 0;
  std::memcpy(&frames, header + 4, 4);
  std::memcpy(&dim, header + 8, 4);
  if (frames < 1 || dim < 1 || frames > (1u << 24) || dim > (1u << 24)) {
    throw Error(ErrorKind::format,
                path + ": implausible dimensions " + std::to_string(frames) +
                    "x" + std::to_string(dim));
  }
  Array2 out(static_cast<int>(frames), static_cast<int>(dim));
  const size_t count = static_cast<size_t>(frames) * dim;
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  const auto got = in.gcount();
  if (static_cast<size_t>(got) != count * sizeof(float)) {
    throw Error(ErrorKind::format,
                path + ": truncated payload at byte offset " +
                    std::to_string(16 + got));
  }
  for (size_t i = 0; i < count; ++i) out.data[i] = static_cast<double>(raw[i]);
  return out;
}

void save_features(const Array2& features, const std::string& path) {
  if (features.rows < 1 || features.cols < 1) {
    throw Error(ErrorKind::invalid_argument, "cannot save an empty feature matrix");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out.write(kFeatureMagic, 4);
  put_u32(out, static_cast<uint32_t>(features.rows));
  put_u32(out, static_cast<uint32_t>(features.cols));
  put_u32(out, 0);  // reserved
  std::vector<float> raw(features.data.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<float>(features.data[i]);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw Error(ErrorKind::io, "short write to " + path);
}

void SynthConfig::validate() const {
  if (num_videos < 1) throw Error(ErrorKind::config, "num_videos must be >= 1");
  if (num_val < 0 || num_test < 0 || num_val + num_test >= num_videos) {
    throw Error(ErrorKind::config, "val/test counts must leave at least one train video");
  }
  if (min_segments < 1 || max_segments < min_segments) {
    throw Error(ErrorKind::config, "invalid segments-per-video range");
  }
  if (num_frames < 2 * max_segments) {
    throw Error(ErrorKind::config,
                "num_frames must be at least twice the maximum segment count");
  }
  if (feature_dim < 1) throw Error(ErrorKind::config, "feature_dim must be >= 1");
  if (num_prototypes < 1) throw Error(ErrorKind::config, "num_prototypes must be >= 1");
  if (segment_noise < 0.0 || background_noise < 0.0) {
    throw Error(ErrorKind::config, "noise scales must be non-negative");
  }
  if (num_shifts < 1) throw Error(ErrorKind::config, "num_shifts must be >= 1");
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& value) {
  if (doc.contains(key)) value = doc[key].get<T>();
}

}  // namespace

SynthConfig SynthConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("synth config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::parse, "synth config: expected a JSON object");
  }
  SynthConfig cfg;
  const std::vector<std::string> known = {
      "num_videos",   "num_val",        "num_test",       "L",
      "D",            "num_prototypes", "min_segments",   "max_segments",
      "segment_noise", "background_noise", "num_shifts",  "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::config, "synth config: unknown key '" + key + "'");
    }
  }
  read_field(doc, "num_videos", cfg.num_videos);
  read_field(doc, "num_val", cfg.num_val);
  read_field(doc, "num_test", cfg.num_test);
  read_field(doc, "L", cfg.num_frames);
  read_field(doc, "D", cfg.feature_dim);
  read_field(doc, "num_prototypes", cfg.num_prototypes);
  read_field(doc, "min_segments", cfg.min_segments);
  read_field(doc, "max_segments", cfg.max_segments);
  read_field(doc, "segment_noise", cfg.segment_noise);
  read_field(doc, "background_noise", cfg.background_noise);
  read_field(doc, "num_shifts", cfg.num_shifts);
  read_field(doc, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

std::string SynthConfig::to_json_text() const {
  json doc;
  doc["num_videos"] = num_videos;
  doc["num_val"] = num_val;
  doc["num_test"] = num_test;
  doc["L"] = num_frames;
  doc["D"] = feature_dim;
  doc["num_prototypes"] = num_prototypes;
  doc["min_segments"] = min_segments;
  doc["max_segments"] = max_segments;
  doc["segment_noise"] = segment_noise;
  doc["background_noise"] = background_noise;
  doc["num_shifts"] = num_shifts;
  doc["seed"] = seed;
  return doc.dump(2);
}

namespace {

int ending_zone_start(int num_frames) {
  const int zone = (num_frames + 19) / 20;  // ceil(5%)
  return num_frames - zone;
}

// Largest number of length-1 segments with single-frame gaps that fit.
int max_segments_in(int capacity) { return std::max(0, (capacity + 1) / 2); }

// n non-overlapping segments inside [lo, hi), separated by at least one
// background frame.
std::vector<Segment> place_in_region(int lo, int hi, int n, Rng& rng) {
  std::vector<Segment> out;
  if (n == 0) return out;
  const int cap = hi - lo;
  const int fit_max = (cap - (n - 1)) / n;
  int len_hi = std::min(fit_max, std::max(3, (2 * cap) / (3 * n)));
  len_hi = std::max(1, len_hi);
  const int len_lo = std::min(3, len_hi);
  std::vector<int> lengths(n);
  int total = n - 1;
  for (int i = 0; i < n; ++i) {
    lengths[i] = static_cast<int>(rng.range_inclusive(len_lo, len_hi));
    total += lengths[i];
  }
  int free_frames = cap - total;
  std::vector<int> gaps(n + 1, 0);
  while (free_frames > 0) {
    gaps[rng.below(n + 1)] += 1;
    --free_frames;
  }
  int cursor = lo + gaps[0];
  for (int i = 0; i < n; ++i) {
    out.emplace_back(cursor, cursor + lengths[i]);
    cursor += lengths[i] + 1 + gaps[i + 1];
  }
  return out;
}

}  // namespace

SynthDataset synth_generate(const SynthConfig& config) {
  config.validate();
  SynthDataset data;
  data.config = config;
  Rng rng(config.seed);
  data.step_prototypes = Array2(config.num_prototypes, config.feature_dim);
  for (double& v : data.step_prototypes.data) v = rng.normal();
  data.background_prototype.resize(config.feature_dim);
  for (double& v : data.background_prototype) v = rng.normal();
  data.ending_prototype.resize(config.feature_dim);
  for (double& v : data.ending_prototype) v = rng.normal();

  const int frames = config.num_frames;
  const int half = frames / 2;
  // Keep one frame of slack below the cut so neighboring segments across the
  // two regions always have a background gap; the tail region stays clear of
  // the ending zone.
  const int region_a_end = half - 1;
  const int region_b_end = std::max(half + 1, ending_zone_start(frames));
  const int num_train = config.num_videos - config.num_val - config.num_test;
  for (int v = 0; v < config.num_videos; ++v) {
    SynthVideoPlan plan;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "vid_%05d", v);
    plan.id = buf;
    plan.split = v < num_train                    ? Split::train
                 : v < num_train + config.num_val ? Split::val
                                                  : Split::test;
    int want = static_cast<int>(
        rng.range_inclusive(config.min_segments, config.max_segments));
    const int cap_a = region_a_end;
    const int cap_b = region_b_end - half;
    const int max_total = max_segments_in(cap_a) + max_segments_in(cap_b);
    if (want > max_total) {
      warn("video '" + plan.id + "': cannot place " + std::to_string(want) +
           " segments, reducing to " + std::to_string(max_total));
      want = max_total;
    }
    int in_a = static_cast<int>(
        std::llround(static_cast<double>(want) * cap_a / (cap_a + cap_b)));
    in_a = std::clamp(in_a, want - max_segments_in(cap_b),
                      std::min(want, max_segments_in(cap_a)));
    const int in_b = want - in_a;
    plan.segments = place_in_region(0, region_a_end, in_a, rng);
    std::vector<Segment> tail = place_in_region(half, region_b_end, in_b, rng);
    plan.segments.insert(plan.segments.end(), tail.begin(), tail.end());
    plan.prototype_ids.resize(plan.segments.size());
    for (size_t j = 0; j < plan.segments.size(); ++j) {
      plan.prototype_ids[j] = static_cast<int>(j) % config.num_prototypes;
    }
    plan.noise_seed = rng.next_u64();
    data.plans.push_back(std::move(plan));
  }
  return data;
}

GeneratedVideo SynthDataset::render(const SynthVideoPlan& plan) const {
  const int frames = config.num_frames;
  const int dim = config.feature_dim;
  GeneratedVideo out;
  out.annotation.id = plan.id;
  out.annotation.num_frames = frames;
  out.annotation.split = plan.split;
  out.annotation.segments = plan.segments;
  out.features = Array2(frames, dim);
  std::vector<int> owner(frames, -1);
  for (size_t j = 0; j < plan.segments.size(); ++j) {
    for (int t = plan.segments[j].start; t < plan.segments[j].end; ++t) {
      owner[t] = static_cast<int>(j);
    }
  }
  const int ending_start = ending_zone_start(frames);
  Rng rng(plan.noise_seed);
  for (int t = 0; t < frames; ++t) {
    const double* proto;
    double noise;
    if (owner[t] >= 0) {
      proto = step_prototypes.row(plan.prototype_ids[owner[t]]);
      noise = config.segment_noise;
    } else if (t >= ending_start) {
      proto = ending_prototype.data();
      noise = config.background_noise;
    } else {
      proto = background_prototype.data();
      noise = config.background_noise;
    }
    double* row = out.features.row(t);
    for (int d = 0; d < dim; ++d) {
      // Quantize to f32 so the in-memory video matches its on-disk round trip.
      row[d] = static_cast<double>(
          static_cast<float>(proto[d] + noise * rng.normal()));
    }
  }
  return out;
}

std::vector<GeneratedVideo> temporal_shift_augment(const SynthDataset& data,
                                                   const SynthVideoPlan& plan,
                                                   int num_shifts) {
  if (num_shifts < 1) {
    throw Error(ErrorKind::config, "num_shifts must be >= 1");
  }
  const int frames = data.config.num_frames;
  std::vector<GeneratedVideo> out;
  for (int i = 0; i < num_shifts; ++i) {
    const int offset = static_cast<int>(
        std::llround(static_cast<double>(i) * frames / (4.0 * num_shifts)));
    SynthVideoPlan shifted = plan;
    if (i > 0) shifted.id = plan.id + "_s" + std::to_string(i);
    shifted.segments.clear();
    shifted.prototype_ids.clear();
    for (size_t j = 0; j < plan.segments.size(); ++j) {
      const int start = plan.segments[j].start + offset;
      const int end = std::min(plan.segments[j].end + offset, frames);
      if (start >= frames) {
        warn("video '" + shifted.id + "': shift " + std::to_string(offset) +
             " pushes segment " + std::to_string(j) + " out of range, dropped");
        continue;
      }
      shifted.segments.emplace_back(start, end);
      shifted.prototype_ids.push_back(plan.prototype_ids[j]);
    }
    if (shifted.segments.empty()) {
      warn("video '" + shifted.id + "': no segments survive the shift, copy skipped");
      continue;
    }
    out.push_back(data.render(shifted));
  }
  return out;
}

GeneratedVideo permute_halves(const AnnotatedVideo& annotation,
                              const Array2& features) {
  const int frames = annotation.num_frames;
  require_shape(features, frames, features.cols, "permute_halves features");
  const int half = frames / 2;
  const int tail = frames - half;  // frames moved to the front
  GeneratedVideo out;
  out.annotation.id = annotation.id;
  out.annotation.num_frames = frames;
  out.annotation.split = annotation.split;
  out.features = Array2(frames, features.cols);
  for (int t = 0; t < frames; ++t) {
    const int src = t < tail ? half + t : t - tail;
    std::copy(features.row(src), features.row(src) + features.cols,
              out.features.row(t));
  }
  for (const Segment& seg : annotation.segments) {
    if (seg.end <= half) {
      out.annotation.segments.emplace_back(seg.start + tail, seg.end + tail);
    } else if (seg.start >= half) {
      out.annotation.segments.emplace_back(seg.start - half, seg.end - half);
    } else {
      warn("video '" + annotation.id + "': segment [" +
           std::to_string(seg.start) + ", " + std::to_string(seg.end) +
           ") straddles the half-way cut, dropped");
    }
  }
  std::stable_sort(out.annotation.segments.begin(),
                   out.annotation.segments.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.start < b.start;
                   });
  return out;
}

void write_dataset(const SynthDataset& data, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<AnnotatedVideo> annotations;
  std::vector<GeneratedVideo> rendered;
  for (const SynthVideoPlan& plan : data.plans) {
    if (plan.split == Split::train) {
      for (GeneratedVideo& video :
           temporal_shift_augment(data, plan, data.config.num_shifts)) {
        rendered.push_back(std::move(video));
      }
    } else {
      rendered.push_back(data.render(plan));
    }
  }
  for (GeneratedVideo& video : rendered) {
    save_features(video.features, dir + "/" + video.annotation.id + ".psf");
    annotations.push_back(std::move(video.annotation));
  }
  save_annotations(annotations, dir + "/annotations.json");
  std::ofstream cfg(dir + "/synth_config.json", std::ios::binary);
  if (!cfg) throw Error(ErrorKind::io, "cannot write " + dir + "/synth_config.json");
  cfg << data.config.to_json_text() << "\n";
}

int Dataset::num_frames() const {
  return videos.empty() ? 0 : videos.front().num_frames;
}

int Dataset::feature_dim() const {
  return features.empty() ? 0 : features.front().cols;
}

std::vector<size_t> Dataset::split_indices(Split split) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < videos.size(); ++i) {
    if (videos[i].split == split) out.push_back(i);
  }
  return out;
}

namespace {

void check_uniform_shapes(const Dataset& data) {
  for (size_t i = 0; i < data.videos.size(); ++i) {
    const AnnotatedVideo& video = data.videos[i];
    const Array2& feat = data.features[i];
    if (feat.rows != video.num_frames) {
      throw Error(ErrorKind::dimension,
                  "video '" + video.id + "': " + std::to_string(feat.rows) +
                      " feature rows for " + std::to_string(video.num_frames) +
                      " frames");
    }
    if (feat.rows != data.features.front().rows ||
        feat.cols != data.features.front().cols) {
      throw Error(ErrorKind::dimension,
                  "video '" + video.id + "': feature shape differs from the "
                  "rest of the dataset");
    }
  }
}

}  // namespace

Dataset Dataset::open(const std::string& dir) {
  Dataset data;
  data.videos = load_annotations(dir + "/annotations.json");
  if (data.videos.empty()) {
    throw Error(ErrorKind::io, dir + ": no usable videos in annotations.json");
  }
  std::stable_sort(data.videos.begin(), data.videos.end(),
                   [](const AnnotatedVideo& a, const AnnotatedVideo& b) {
                     return a.id < b.id;
                   });
  data.features.reserve(data.videos.size());
  for (const AnnotatedVideo& video : data.videos) {
    data.features.push_back(load_features(dir + "/" + video.id + ".psf"));
  }
  check_uniform_shapes(data);
  return data;
}

Dataset Dataset::from_generated(std::vector<GeneratedVideo> generated) {
  std::stable_sort(generated.begin(), generated.end(),
                   [](const GeneratedVideo& a, const GeneratedVideo& b) {
                     return a.annotation.id < b.annotation.id;
                   });
  Dataset data;
  for (GeneratedVideo& video : generated) {
    data.videos.push_back(std::move(video.annotation));
    data.features.push_back(std::move(video.features));
  }
  if (data.videos.empty()) {
    throw Error(ErrorKind::invalid_argument, "empty generated dataset");
  }
  check_uniform_shapes(data);
  return data;
}

}  // namespace procnets
