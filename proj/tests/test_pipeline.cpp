#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "procnets/pipeline.hpp"

using namespace procnets;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.num_frames = 32;
  cfg.feature_dim = 8;
  cfg.hidden = 8;
  cfg.anchor_min_len = 3;
  cfg.anchor_interval = 4;
  cfg.anchor_count = 4;
  cfg.pool_h = 4;
  cfg.pool_w = 4;
  cfg.samples_per_class = 8;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 2;
  cfg.seed = 31;
  return cfg;
}

SynthConfig tiny_data_config() {
  SynthConfig cfg;
  cfg.num_videos = 6;
  cfg.num_val = 1;
  cfg.num_test = 1;
  cfg.num_frames = 32;
  cfg.feature_dim = 8;
  cfg.num_prototypes = 4;
  cfg.min_segments = 2;
  cfg.max_segments = 3;
  cfg.seed = 17;
  return cfg;
}

Dataset tiny_dataset() {
  const SynthDataset synth = synth_generate(tiny_data_config());
  std::vector<GeneratedVideo> rendered;
  for (const SynthVideoPlan& plan : synth.plans) {
    rendered.push_back(synth.render(plan));
  }
  return Dataset::from_generated(std::move(rendered));
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("procnets_pipe_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("model construction is seed-deterministic") {
  const RunConfig cfg = tiny_config();
  const Checkpoint a = make_checkpoint(cfg);
  const Checkpoint b = make_checkpoint(cfg);
  const auto slots_a = a.model.slots();
  const auto slots_b = b.model.slots();
  REQUIRE(slots_a.size() == slots_b.size());
  for (size_t i = 0; i < slots_a.size(); ++i) {
    CHECK(slots_a[i]->value.data == slots_b[i]->value.data);
  }
  CHECK(a.model.num_candidates == 8);  // ceil(4/4) * ceil(32/4)
}

TEST_CASE("full-model gradients pass the finite-difference check") {
  RunConfig cfg;
  cfg.num_frames = 8;
  cfg.feature_dim = 4;
  cfg.hidden = 4;
  cfg.anchor_min_len = 3;
  cfg.anchor_interval = 2;
  cfg.anchor_count = 2;
  cfg.pool_h = 2;
  cfg.pool_w = 4;
  cfg.samples_per_class = 4;
  cfg.seed = 5;
  Checkpoint ck = make_checkpoint(cfg);

  Rng rng(99);
  Array2 features(8, 4);
  for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
  const std::vector<Segment> gts = {Segment(2, 5)};
  Rng assign_rng(7);
  const AssignmentBatch batch = assign_training_samples(
      ck.model.anchor_lengths, cfg.num_frames, gts, cfg.pos_iou, cfg.neg_iou,
      cfg.samples_per_class, assign_rng);
  const LossWeights weights{cfg.alpha_r, cfg.alpha_s};

  ck.model.zero_grads();
  video_loss(ck.model, features, gts, batch, weights, cfg.ablation, true);
  auto loss_fn = [&]() {
    return video_loss(ck.model, features, gts, batch, weights, cfg.ablation,
                      false)
        .total;
  };
  const auto report =
      grad_check(loss_fn, ck.model.slots(), 1e-5, 1e-4);
  for (const auto& entry : report.entries) {
    INFO(entry.name, " rel err ", entry.max_rel_err);
    CHECK(entry.passed);
  }
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("zero epochs leave the checkpoint untouched") {
  RunConfig cfg = tiny_config();
  cfg.epochs = 0;
  Checkpoint ck = make_checkpoint(cfg);
  const auto before = ck.model.decoder.out_w.value.data;
  const Dataset data = tiny_dataset();
  const TrainResult result = train(ck, data, "");
  CHECK(result.log.empty());
  CHECK(ck.epoch == 0);
  CHECK(ck.model.decoder.out_w.value.data == before);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  const Dataset data = tiny_dataset();
  const RunConfig cfg = tiny_config();

  Checkpoint a = make_checkpoint(cfg);
  Checkpoint b = make_checkpoint(cfg);
  const TrainResult ra = train(a, data, "");
  const TrainResult rb = train(b, data, "");
  REQUIRE(ra.log.size() == rb.log.size());
  for (size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].total == rb.log[i].total);  // exact, not approximate
    CHECK(ra.log[i].val_jaccard == rb.log[i].val_jaccard);
  }
  const auto slots_a = a.model.slots();
  const auto slots_b = b.model.slots();
  for (size_t i = 0; i < slots_a.size(); ++i) {
    CHECK(slots_a[i]->value.data == slots_b[i]->value.data);
  }
}

TEST_CASE("checkpoints resume training exactly") {
  TempDir dir;
  // No val split: the final epoch's parameters are kept, which makes the
  // two-stage and straight-through runs comparable.
  SynthConfig dcfg = tiny_data_config();
  dcfg.num_val = 0;
  dcfg.num_test = 1;
  const SynthDataset synth = synth_generate(dcfg);
  std::vector<GeneratedVideo> rendered;
  for (const SynthVideoPlan& plan : synth.plans) {
    rendered.push_back(synth.render(plan));
  }
  const Dataset data = Dataset::from_generated(std::move(rendered));

  RunConfig cfg = tiny_config();
  cfg.epochs = 2;
  Checkpoint staged = make_checkpoint(cfg);
  train(staged, data, "");
  const std::string path = (dir.path / "ck.pn").string();
  save_checkpoint(staged, path);

  Checkpoint reloaded = load_checkpoint(path);
  CHECK(reloaded.epoch == 2);
  reloaded.config.epochs = 3;
  staged.config.epochs = 3;
  const TrainResult more_a = train(staged, data, "");
  const TrainResult more_b = train(reloaded, data, "");
  REQUIRE(more_a.log.size() == 1);
  REQUIRE(more_b.log.size() == 1);
  CHECK(more_a.log[0].total == more_b.log[0].total);
  const auto slots_a = staged.model.slots();
  const auto slots_b = reloaded.model.slots();
  for (size_t i = 0; i < slots_a.size(); ++i) {
    CHECK(slots_a[i]->value.data == slots_b[i]->value.data);
  }
}

TEST_CASE("training writes the run directory artifacts") {
  TempDir dir;
  const Dataset data = tiny_dataset();
  RunConfig cfg = tiny_config();
  cfg.epochs = 1;
  Checkpoint ck = make_checkpoint(cfg);
  train(ck, data, dir.path.string());
  CHECK(fs::exists(dir.path / "config.json"));
  CHECK(fs::exists(dir.path / "train_log.txt"));
  CHECK(fs::exists(dir.path / "checkpoint.pn"));
  // The stored config reproduces the one used.
  std::ifstream in(dir.path / "config.json");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const RunConfig stored = RunConfig::from_json_text(text);
  CHECK(stored.seed == cfg.seed);
  CHECK(stored.epochs == cfg.epochs);
}

TEST_CASE("inference is deterministic and bounded by s_max") {
  const Dataset data = tiny_dataset();
  RunConfig cfg = tiny_config();
  cfg.epochs = 1;
  Checkpoint ck = make_checkpoint(cfg);
  train(ck, data, "");
  const auto preds_a = infer_video(ck, data.features[0], 0);
  const auto preds_b = infer_video(ck, data.features[0], 0);
  REQUIRE(preds_a.size() == preds_b.size());
  CHECK(preds_a.size() <= static_cast<size_t>(cfg.s_max));
  for (size_t i = 0; i < preds_a.size(); ++i) {
    CHECK(preds_a[i].segment == preds_b[i].segment);
    CHECK(preds_a[i].score == preds_b[i].score);
  }
  // Dimension mismatches are configuration errors.
  Array2 wrong(16, 8, 0.0);
  CHECK_THROWS_AS(infer_video(ck, wrong, 0), Error);
}

TEST_CASE("uniform baseline on whole-video ground truth") {
  std::vector<GeneratedVideo> videos;
  Rng rng(404);
  for (int i = 0; i < 3; ++i) {
    GeneratedVideo v;
    v.annotation.id = "whole_" + std::to_string(i);
    v.annotation.num_frames = 70;
    v.annotation.split = Split::test;
    v.annotation.segments = {Segment(0, 70)};
    v.features = Array2(70, 4);
    for (double& x : v.features.data) x = rng.uniform(-1.0, 1.0);
    videos.push_back(std::move(v));
  }
  const Dataset data = Dataset::from_generated(std::move(videos));
  const EvalReport report =
      evaluate(nullptr, data, Split::test, Method::uniform, 0);
  CHECK(report.jaccard == doctest::Approx(100.0));
  CHECK(report.miou == doctest::Approx(100.0 / 7.0).epsilon(1e-6));
  CHECK(report.jaccard >= report.miou);

  // Evaluating twice gives the identical report.
  const EvalReport again =
      evaluate(nullptr, data, Split::test, Method::uniform, 0);
  CHECK(report.jaccard == again.jaccard);
  CHECK(report.videos.size() == again.videos.size());
}

TEST_CASE("learned methods need a checkpoint") {
  const Dataset data = tiny_dataset();
  CHECK_THROWS_AS(evaluate(nullptr, data, Split::test, Method::procnets_lstm, 0),
                  Error);
  CHECK_THROWS_AS(evaluate(nullptr, data, Split::test, Method::procnets_nms, 0),
                  Error);
}

TEST_CASE("every method produces a sane report on an untrained model") {
  const Dataset data = tiny_dataset();
  const Checkpoint ck = make_checkpoint(tiny_config());
  for (Method method :
       {Method::procnets_lstm, Method::procnets_nms, Method::uniform}) {
    const EvalReport report =
        evaluate(&ck, data, Split::test, method, 0);
    CHECK(report.jaccard >= 0.0);
    CHECK(report.jaccard <= 100.0);
    CHECK(report.miou >= 0.0);
    CHECK(report.miou <= 100.0);
    CHECK(report.jaccard >= report.miou - 1e-9);
    CHECK(report.videos.size() == 1);
  }
}

TEST_CASE("permutation experiment round-trips through the involution") {
  const Dataset data = tiny_dataset();
  const Checkpoint ck = make_checkpoint(tiny_config());
  const PermutationResult result =
      permutation_experiment(ck, data, Split::test);

  // Permuting every test video twice restores the original report.
  std::vector<GeneratedVideo> twice;
  for (size_t idx : data.split_indices(Split::test)) {
    const GeneratedVideo once =
        permute_halves(data.videos[idx], data.features[idx]);
    twice.push_back(permute_halves(once.annotation, once.features));
  }
  const Dataset data2 = Dataset::from_generated(std::move(twice));
  const EvalReport back =
      evaluate(&ck, data2, Split::test, Method::procnets_lstm, 0);
  CHECK(back.jaccard == doctest::Approx(result.original.jaccard).epsilon(1e-12));
  CHECK(back.miou == doctest::Approx(result.original.miou).epsilon(1e-12));
}

TEST_CASE("report json carries method, split and the exact config") {
  const Dataset data = tiny_dataset();
  const Checkpoint ck = make_checkpoint(tiny_config());
  const EvalReport report =
      evaluate(&ck, data, Split::test, Method::procnets_lstm, 0);
  const std::string text =
      eval_report_to_json(report, Method::procnets_lstm, Split::test, &ck.config);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["method"] == "procnets-lstm");
  CHECK(doc["split"] == "test");
  CHECK(doc["config"]["L"] == 32);
  CHECK(doc["config"]["drop_proposal_vec"] == false);
  CHECK(doc["videos"].size() == report.videos.size());

  const std::string text2 =
      eval_report_to_json(report, Method::procnets_lstm, Split::test, &ck.config);
  CHECK(text == text2);
}

TEST_CASE("ablation flags change the config echo and the decode path") {
  RunConfig cfg = tiny_config();
  cfg.ablation.drop_location_emb = true;
  const Checkpoint ck = make_checkpoint(cfg);
  const std::string text = ck.config.to_json_text();
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["drop_location_emb"] == true);

  const Dataset data = tiny_dataset();
  const EvalReport report =
      evaluate(&ck, data, Split::test, Method::procnets_lstm, 0);
  CHECK(report.videos.size() == 1);
}

TEST_CASE("dataset statistics summarize segment structure") {
  const Dataset data = tiny_dataset();
  const std::string all = dataset_stats_json(data, std::nullopt);
  const auto doc = nlohmann::json::parse(all);
  CHECK(doc["num_frames"] == 32);
  CHECK(doc["feature_dim"] == 8);
  CHECK(doc["stats"]["num_videos"] == 6);
  CHECK(doc["splits"]["train"]["num_videos"] == 4);
  const double mean = doc["stats"]["segments_per_video"]["mean"];
  CHECK(mean >= 2.0);
  CHECK(mean <= 3.0);

  const std::string only_test =
      dataset_stats_json(data, std::optional<Split>(Split::test));
  const auto tdoc = nlohmann::json::parse(only_test);
  CHECK(tdoc["split"] == "test");
  CHECK(tdoc["stats"]["num_videos"] == 1);
}

TEST_CASE("predictions serialize with frame bounds and scores") {
  const Dataset data = tiny_dataset();
  RunConfig cfg = tiny_config();
  cfg.epochs = 1;
  Checkpoint ck = make_checkpoint(cfg);
  train(ck, data, "");
  const auto preds = infer_split(ck, data, Split::test, 0);
  const std::string text = predictions_to_json(preds);
  const auto doc = nlohmann::json::parse(text);
  REQUIRE(doc["videos"].size() == 1);
  for (const auto& seg : doc["videos"][0]["segments"]) {
    CHECK(seg["start_frame"].get<int>() >= 0);
    CHECK(seg["end_frame"].get<int>() <= 32);
    CHECK(seg["score"].get<double>() >= 0.0);
    CHECK(seg["score"].get<double>() <= 1.0);
  }
}
