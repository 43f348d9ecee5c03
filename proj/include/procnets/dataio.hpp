#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "procnets/anchors.hpp"
#include "procnets/array.hpp"
#include "procnets/rng.hpp"

namespace procnets {

enum class Split { train, val, test };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct AnnotatedVideo {
  std::string id;
  int num_frames = 0;
  std::vector<Segment> segments;  // sorted by start
  Split split = Split::train;
};

// Annotation JSON: {"videos": [{"id", "duration", "num_frames", "split",
// "segments": [{"start", "end"}]}]} with segment times in seconds. Loading
// converts seconds to frames via round(t * num_frames / duration).
std::vector<AnnotatedVideo> load_annotations(const std::string& path);
void save_annotations(const std::vector<AnnotatedVideo>& videos,
                      const std::string& path);

// Feature file (.psf): "PSF1" magic, u32 little-endian frame count and
// feature dim, u32 reserved zero, then row-major little-endian f32 values.
Array2 load_features(const std::string& path);
void save_features(const Array2& features, const std::string& path);

struct SynthConfig {
  int num_videos = 40;  // total across splits
  int num_val = 5;
  int num_test = 5;
  int num_frames = 64;   // L
  int feature_dim = 16;  // D
  int num_prototypes = 8;
  int min_segments = 3;
  int max_segments = 16;
  double segment_noise = 0.2;
  double background_noise = 0.2;
  int num_shifts = 1;  // temporal-shift copies per train video; 1 = off
  uint64_t seed = 0;

  void validate() const;
  static SynthConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct GeneratedVideo {
  AnnotatedVideo annotation;
  Array2 features;
};

// Layout of one synthetic video; features render deterministically from the
// noise seed, so shifted copies can be re-rendered later.
struct SynthVideoPlan {
  std::string id;
  Split split = Split::train;
  std::vector<Segment> segments;
  std::vector<int> prototype_ids;  // parallel to segments
  uint64_t noise_seed = 0;
};

struct SynthDataset {
  SynthConfig config;
  Array2 step_prototypes;  // P x D
  std::vector<double> background_prototype;
  std::vector<double> ending_prototype;
  std::vector<SynthVideoPlan> plans;

  GeneratedVideo render(const SynthVideoPlan& plan) const;
};

// Synthetic instructional-video corpus: per video, non-overlapping segments
// with background gaps, none straddling the half-way frame, prototype content
// assigned in a fixed order so segment order is learnable, and an ending
// prototype over the final 5% of frames.
SynthDataset synth_generate(const SynthConfig& config);

// Shifted copies of a synthetic video: copy i moves every boundary by
// round(i * L / (4 * num_shifts)) and re-renders. Segments pushed out of
// range are dropped with a warning.
std::vector<GeneratedVideo> temporal_shift_augment(const SynthDataset& data,
                                                   const SynthVideoPlan& plan,
                                                   int num_shifts);

// Swaps the first and second half of the video; ground truth moves by the
// same block swap. Segments straddling the cut are dropped with a warning.
GeneratedVideo permute_halves(const AnnotatedVideo& annotation,
                              const Array2& features);

// Writes annotations.json plus one .psf per video, applying temporal-shift
// augmentation to the train split when configured.
void write_dataset(const SynthDataset& data, const std::string& dir);

// A directory of annotations plus features, fully loaded. Videos are ordered
// by id; all feature matrices share one shape.
struct Dataset {
  std::vector<AnnotatedVideo> videos;
  std::vector<Array2> features;

  int num_frames() const;
  int feature_dim() const;
  std::vector<size_t> split_indices(Split split) const;

  static Dataset open(const std::string& dir);
  static Dataset from_generated(std::vector<GeneratedVideo> videos);
};

}  // namespace procnets
