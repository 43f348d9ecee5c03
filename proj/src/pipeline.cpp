#include "procnets/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "procnets/errors.hpp"
#include "procnets/nn.hpp"

namespace procnets {

namespace fs = std::filesystem;
using nlohmann::json;

Checkpoint make_checkpoint(const RunConfig& config) {
  config.validate();
  Checkpoint ck;
  ck.config = config;
  ck.model = ProcNetModel::build(config);
  Rng rng(config.seed);
  ck.model.init_params(rng);
  ck.rng_state = rng.state();
  ck.epoch = 0;
  return ck;
}

namespace {

constexpr char kCheckpointMagic[4] = {'P', 'N', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

void write_bytes(std::ostream& out, const void* data, size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint64_t>(out, s.size());
  write_bytes(out, s.data(), s.size());
}

void read_bytes(std::istream& in, void* data, size_t n, const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw Error(ErrorKind::format, path + ": truncated checkpoint");
  }
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T value;
  read_bytes(in, &value, sizeof(T), path);
  return value;
}

std::string read_string(std::istream& in, const std::string& path) {
  const uint64_t n = read_pod<uint64_t>(in, path);
  if (n > (1ull << 32)) {
    throw Error(ErrorKind::format, path + ": implausible string length");
  }
  std::string s(n, '\0');
  read_bytes(in, s.data(), n, path);
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  write_bytes(out, kCheckpointMagic, 4);
  write_pod<uint32_t>(out, kCheckpointVersion);
  write_string(out, ck.config.to_json_text());
  write_pod<int64_t>(out, ck.epoch);
  write_string(out, ck.rng_state);
  const auto slots = ck.model.slots();
  write_pod<uint64_t>(out, slots.size());
  for (const ParamSlot* slot : slots) {
    write_string(out, slot->name);
    write_pod<uint32_t>(out, static_cast<uint32_t>(slot->value.rows));
    write_pod<uint32_t>(out, static_cast<uint32_t>(slot->value.cols));
    write_pod<int64_t>(out, slot->step_count);
    write_bytes(out, slot->value.data.data(),
                slot->value.data.size() * sizeof(double));
    write_bytes(out, slot->adam_m.data.data(),
                slot->adam_m.data.size() * sizeof(double));
    write_bytes(out, slot->adam_v.data.data(),
                slot->adam_v.data.size() * sizeof(double));
  }
  if (!out) throw Error(ErrorKind::io, "short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4, path);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw Error(ErrorKind::format, path + ": not a checkpoint file");
  }
  const uint32_t version = read_pod<uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::format,
                path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config = RunConfig::from_json_text(read_string(in, path));
  ck.model = ProcNetModel::build(ck.config);
  ck.epoch = static_cast<int>(read_pod<int64_t>(in, path));
  ck.rng_state = read_string(in, path);
  const uint64_t count = read_pod<uint64_t>(in, path);
  auto slots = ck.model.slots();
  if (count != slots.size()) {
    throw Error(ErrorKind::format,
                path + ": checkpoint has " + std::to_string(count) +
                    " parameters, model expects " + std::to_string(slots.size()));
  }
  for (ParamSlot* slot : slots) {
    const std::string name = read_string(in, path);
    if (name != slot->name) {
      throw Error(ErrorKind::format,
                  path + ": parameter order mismatch, got '" + name +
                      "', expected '" + slot->name + "'");
    }
    const uint32_t rows = read_pod<uint32_t>(in, path);
    const uint32_t cols = read_pod<uint32_t>(in, path);
    if (static_cast<int>(rows) != slot->value.rows ||
        static_cast<int>(cols) != slot->value.cols) {
      throw Error(ErrorKind::format,
                  path + ": parameter '" + name + "' has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(slot->value.rows) + "x" +
                      std::to_string(slot->value.cols));
    }
    slot->step_count = read_pod<int64_t>(in, path);
    read_bytes(in, slot->value.data.data(),
               slot->value.data.size() * sizeof(double), path);
    read_bytes(in, slot->adam_m.data.data(),
               slot->adam_m.data.size() * sizeof(double), path);
    read_bytes(in, slot->adam_v.data.data(),
               slot->adam_v.data.size() * sizeof(double), path);
  }
  return ck;
}

LossReport video_loss(ProcNetModel& model, const Array2& features,
                      const std::vector<Segment>& gts,
                      const AssignmentBatch& batch, const LossWeights& weights,
                      const AblationFlags& ablation, bool accumulate_grads) {
  require_shape(features, model.num_frames, model.feature_dim, "video features");
  if (gts.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "video_loss requires at least one ground-truth segment");
  }
  EncoderCache enc_cache;
  const ContextFeatures context = encode_context(
      model.encoder, features, accumulate_grads ? &enc_cache : nullptr);
  const ProposalMap map = propose(model.head, context);
  const CandidateGrid grid = build_candidate_grid(
      map, model.pool_h, model.pool_w, model.anchor_lengths, model.num_frames);
  std::vector<int> gt_candidates;
  gt_candidates.reserve(gts.size());
  for (const Segment& gt : gts) {
    gt_candidates.push_back(nearest_candidate(gt, grid));
  }
  const TeacherForcedRun run = sequence_forward_teacher_forced(
      model.decoder, grid, features, gts, gt_candidates, ablation);
  const LossReport report =
      composite_loss(map, batch, run.step_probs(), run.targets(), weights);
  if (!accumulate_grads) return report;

  // Sequence loss first: it owns the gradient flowing into the proposal
  // vector, which joins the classification gradient on the score map.
  std::vector<double> d_proposal_vector(model.num_candidates, 0.0);
  const double seq_scale =
      weights.alpha_s / static_cast<double>(run.steps.size());
  sequence_backward_teacher_forced(model.decoder, run, seq_scale, ablation,
                                   d_proposal_vector);

  const int k_rows = map.scores.rows;
  const int frames = map.scores.cols;
  Array2 dscores(k_rows, frames);
  Array2 doffsets_c(k_rows, frames);
  Array2 doffsets_l(k_rows, frames);

  const double inv_batch =
      1.0 / static_cast<double>(batch.positives.size() + batch.negatives.size());
  for (const PositiveSample& pos : batch.positives) {
    dscores.at(pos.anchor_row, pos.frame) +=
        inv_batch * bce_grad(map.scores.at(pos.anchor_row, pos.frame), 1);
  }
  for (const AnchorPlacement& neg : batch.negatives) {
    dscores.at(neg.anchor_row, neg.frame) +=
        inv_batch * bce_grad(map.scores.at(neg.anchor_row, neg.frame), 0);
  }

  int reg_count = 0;
  for (const PositiveSample& pos : batch.positives) {
    if (regression_target_representable(pos.target)) ++reg_count;
  }
  if (reg_count > 0) {
    const double dreg = weights.alpha_r / static_cast<double>(reg_count);
    for (const PositiveSample& pos : batch.positives) {
      if (!regression_target_representable(pos.target)) continue;
      const double pred[2] = {map.offsets_c.at(pos.anchor_row, pos.frame),
                              map.offsets_l.at(pos.anchor_row, pos.frame)};
      const double target[2] = {pos.target.theta_c, pos.target.theta_l};
      double dpred[2] = {0.0, 0.0};
      smooth_l1_backward(pred, target, dreg, dpred);
      doffsets_c.at(pos.anchor_row, pos.frame) += dpred[0];
      doffsets_l.at(pos.anchor_row, pos.frame) += dpred[1];
    }
  }

  // Route the proposal-vector gradient back to each window's winner.
  for (int m = 0; m < grid.size(); ++m) {
    const GridCell& cell = grid.cells[m];
    dscores.at(cell.anchor_row, cell.frame) += d_proposal_vector[m];
  }

  Array2 dcontext(frames, model.feature_dim);
  propose_backward(model.head, context, map, dscores, doffsets_c, doffsets_l,
                   &dcontext);
  encode_context_backward(model.encoder, enc_cache, dcontext);
  return report;
}

namespace {

struct GridOutputs {
  ProposalMap map;
  CandidateGrid grid;
};

GridOutputs run_grid(const ProcNetModel& model, const Array2& features) {
  GridOutputs out;
  const ContextFeatures context =
      encode_context(model.encoder, features, nullptr);
  out.map = propose(model.head, context);
  out.grid = build_candidate_grid(out.map, model.pool_h, model.pool_w,
                                  model.anchor_lengths, model.num_frames);
  return out;
}

void check_video_dims(const ProcNetModel& model, const Array2& features) {
  if (features.rows != model.num_frames || features.cols != model.feature_dim) {
    throw Error(ErrorKind::config,
                "video features are " + std::to_string(features.rows) + "x" +
                    std::to_string(features.cols) + " but the checkpoint was "
                    "built for " + std::to_string(model.num_frames) + "x" +
                    std::to_string(model.feature_dim));
  }
}

EvalReport evaluate_on_videos(const Checkpoint* ck,
                              const std::vector<const AnnotatedVideo*>& videos,
                              const std::vector<const Array2*>& features,
                              Method method, int beam_override);

}  // namespace

TrainResult train(Checkpoint& ck, const Dataset& data,
                  const std::string& out_dir) {
  const RunConfig& cfg = ck.config;
  const auto train_idx = data.split_indices(Split::train);
  if (train_idx.empty()) {
    throw Error(ErrorKind::invalid_argument, "dataset has no train videos");
  }
  if (data.num_frames() != cfg.num_frames ||
      data.feature_dim() != cfg.feature_dim) {
    throw Error(ErrorKind::dimension,
                "dataset is " + std::to_string(data.num_frames()) + "x" +
                    std::to_string(data.feature_dim()) + " but the config asks "
                    "for " + std::to_string(cfg.num_frames) + "x" +
                    std::to_string(cfg.feature_dim));
  }
  const auto val_idx = data.split_indices(Split::val);
  const bool have_val = !val_idx.empty();
  if (!have_val) {
    warn("dataset has no val split; keeping the final epoch's parameters");
  }
  Rng rng(0);
  rng.restore(ck.rng_state);
  const AdamHyper adam = cfg.adam();
  const LossWeights weights{cfg.alpha_r, cfg.alpha_s};
  const auto slots = ck.model.slots();

  TrainResult result;
  Checkpoint best = ck;
  double best_val = -1.0;
  for (int epoch = ck.epoch + 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<size_t> order = train_idx;
    rng.shuffle(order);
    double sum_cla = 0.0, sum_reg = 0.0, sum_seq = 0.0, sum_total = 0.0;
    int counted = 0;
    for (size_t idx : order) {
      const AnnotatedVideo& video = data.videos[idx];
      const AssignmentBatch batch = assign_training_samples(
          ck.model.anchor_lengths, cfg.num_frames, video.segments, cfg.pos_iou,
          cfg.neg_iou, cfg.samples_per_class, rng);
      LossReport report;
      try {
        report = video_loss(ck.model, data.features[idx], video.segments,
                            batch, weights, cfg.ablation, true);
        for (ParamSlot* slot : slots) adam_step(*slot, adam);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::training) {
          throw Error(ErrorKind::training,
                      std::string(e.what()) + " (epoch " +
                          std::to_string(epoch) + ", video '" + video.id + "')");
        }
        throw;
      }
      sum_cla += report.l_cla;
      sum_reg += report.l_reg;
      sum_seq += report.l_seq;
      sum_total += report.total;
      ++counted;
    }
    ck.epoch = epoch;
    ck.rng_state = rng.state();

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.l_cla = sum_cla / counted;
    entry.l_reg = sum_reg / counted;
    entry.l_seq = sum_seq / counted;
    entry.total = sum_total / counted;
    if (have_val) {
      std::vector<const AnnotatedVideo*> vids;
      std::vector<const Array2*> feats;
      for (size_t idx : val_idx) {
        vids.push_back(&data.videos[idx]);
        feats.push_back(&data.features[idx]);
      }
      const EvalReport val_report = evaluate_on_videos(
          &ck, vids, feats, Method::procnets_lstm, cfg.beam_size);
      entry.val_jaccard = val_report.jaccard;
      entry.val_miou = val_report.miou;
    }
    std::fprintf(stderr,
                 "epoch=%d l_cla=%.6f l_reg=%.6f l_seq=%.6f total=%.6f "
                 "val_jaccard=%.3f val_miou=%.3f\n",
                 entry.epoch, entry.l_cla, entry.l_reg, entry.l_seq,
                 entry.total, entry.val_jaccard, entry.val_miou);
    result.log.push_back(entry);
    if (!have_val || entry.val_jaccard > best_val) {
      best_val = entry.val_jaccard;
      best = ck;
    }
  }
  ck = best;
  result.best_epoch = ck.epoch;
  result.best_val_jaccard = std::max(best_val, 0.0);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      std::ofstream cfg_out(out_dir + "/config.json", std::ios::binary);
      if (!cfg_out) throw Error(ErrorKind::io, "cannot write " + out_dir + "/config.json");
      cfg_out << cfg.to_json_text() << "\n";
    }
    {
      std::ofstream log_out(out_dir + "/train_log.txt", std::ios::binary);
      if (!log_out) throw Error(ErrorKind::io, "cannot write " + out_dir + "/train_log.txt");
      for (const TrainLogEntry& e : result.log) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "epoch=%d l_cla=%.6f l_reg=%.6f l_seq=%.6f "
                      "val_jaccard=%.3f val_miou=%.3f\n",
                      e.epoch, e.l_cla, e.l_reg, e.l_seq, e.val_jaccard,
                      e.val_miou);
        log_out << line;
      }
    }
    save_checkpoint(ck, out_dir + "/checkpoint.pn");
  }
  return result;
}

std::vector<ScoredSegment> infer_video(const Checkpoint& ck,
                                       const Array2& features,
                                       int beam_override) {
  check_video_dims(ck.model, features);
  const int beam = beam_override > 0 ? beam_override : ck.config.beam_size;
  const GridOutputs out = run_grid(ck.model, features);
  std::vector<ScoredSegment> preds;
  for (const Emission& em : decode(ck.model.decoder, out.grid, features, beam,
                                   ck.config.s_max, ck.config.ablation)) {
    preds.push_back({em.segment, em.probability});
  }
  return preds;
}

const char* method_name(Method method) {
  switch (method) {
    case Method::procnets_lstm: return "procnets-lstm";
    case Method::procnets_nms: return "procnets-nms";
    case Method::uniform: return "uniform";
  }
  return "uniform";
}

Method parse_method(const std::string& name) {
  if (name == "procnets-lstm") return Method::procnets_lstm;
  if (name == "procnets-nms") return Method::procnets_nms;
  if (name == "uniform") return Method::uniform;
  throw Error(ErrorKind::invalid_argument,
              "unknown method '" + name +
                  "' (expected procnets-lstm, procnets-nms or uniform)");
}

namespace {

EvalReport evaluate_on_videos(const Checkpoint* ck,
                              const std::vector<const AnnotatedVideo*>& videos,
                              const std::vector<const Array2*>& features,
                              Method method, int beam_override) {
  const RunConfig cfg = ck != nullptr ? ck->config : RunConfig{};
  std::vector<VideoEval> evals;
  for (size_t i = 0; i < videos.size(); ++i) {
    const AnnotatedVideo& video = *videos[i];
    const Array2& feats = *features[i];
    if (video.segments.empty()) {
      warn("video '" + video.id + "': no ground truth, skipped in evaluation");
      continue;
    }
    std::vector<Segment> main_preds;
    std::vector<ScoredSegment> prf_preds;
    switch (method) {
      case Method::uniform: {
        const int frames = video.num_frames;
        for (const Segment& s :
             uniform_segments(frames, std::min(cfg.n_uniform, frames))) {
          main_preds.push_back(s);
        }
        for (const Segment& s : uniform_segments(
                 frames, std::min(cfg.n_eval_proposals, frames))) {
          prf_preds.push_back({s, 1.0});
        }
        break;
      }
      case Method::procnets_nms: {
        check_video_dims(ck->model, feats);
        const GridOutputs out = run_grid(ck->model, feats);
        std::vector<ScoredSegment> candidates;
        candidates.reserve(static_cast<size_t>(out.map.scores.rows) *
                           out.map.scores.cols);
        for (int k = 0; k < out.map.scores.rows; ++k) {
          const Anchor anchor_proto{0, ck->model.anchor_lengths[k]};
          for (int t = 0; t < out.map.scores.cols; ++t) {
            Anchor anchor = anchor_proto;
            anchor.center = t;
            const OffsetPair offsets{out.map.offsets_c.at(k, t),
                                     out.map.offsets_l.at(k, t)};
            candidates.push_back(
                {decode_segment(anchor, offsets, ck->model.num_frames),
                 out.map.scores.at(k, t)});
          }
        }
        for (const ScoredSegment& s :
             nms_select(candidates, cfg.nms_iou, cfg.n_uniform)) {
          main_preds.push_back(s.segment);
        }
        prf_preds = nms_select(candidates, cfg.nms_iou, cfg.n_eval_proposals);
        break;
      }
      case Method::procnets_lstm: {
        check_video_dims(ck->model, feats);
        const GridOutputs out = run_grid(ck->model, feats);
        const int beam = beam_override > 0 ? beam_override : cfg.beam_size;
        for (const Emission& em :
             decode(ck->model.decoder, out.grid, feats, beam, cfg.s_max,
                    cfg.ablation)) {
          main_preds.push_back(em.segment);
        }
        // Localization accuracy over the score-ranked candidate pool.
        std::vector<int> order(out.grid.size());
        for (int m = 0; m < out.grid.size(); ++m) order[m] = m;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return out.grid.cells[a].score > out.grid.cells[b].score;
        });
        const int take =
            std::min<int>(cfg.n_eval_proposals, out.grid.size());
        for (int j = 0; j < take; ++j) {
          const GridCell& cell = out.grid.cells[order[j]];
          prf_preds.push_back({cell.segment, cell.score});
        }
        break;
      }
    }
    VideoEval ve;
    ve.id = video.id;
    ve.jaccard = 100.0 * jaccard_score(main_preds, video.segments);
    ve.miou = 100.0 * miou_score(main_preds, video.segments);
    const Prf prf = prf_at_iou(prf_preds, video.segments, cfg.tp_iou);
    ve.recall = 100.0 * prf.recall;
    ve.precision = 100.0 * prf.precision;
    ve.f1 = 100.0 * prf.f1;
    ve.num_predictions = static_cast<int>(main_preds.size());
    evals.push_back(std::move(ve));
  }
  return aggregate_eval(std::move(evals));
}

}  // namespace

EvalReport evaluate(const Checkpoint* ck, const Dataset& data, Split split,
                    Method method, int beam_override) {
  if (method != Method::uniform && ck == nullptr) {
    throw Error(ErrorKind::invalid_argument,
                std::string(method_name(method)) + " needs a checkpoint");
  }
  const auto indices = data.split_indices(split);
  if (indices.empty()) {
    throw Error(ErrorKind::invalid_argument,
                std::string("split '") + split_name(split) + "' has no videos");
  }
  std::vector<const AnnotatedVideo*> videos;
  std::vector<const Array2*> features;
  for (size_t idx : indices) {
    videos.push_back(&data.videos[idx]);
    features.push_back(&data.features[idx]);
  }
  return evaluate_on_videos(ck, videos, features, method, beam_override);
}

PermutationResult permutation_experiment(const Checkpoint& ck,
                                         const Dataset& data, Split split) {
  PermutationResult result;
  result.original = evaluate(&ck, data, split, Method::procnets_lstm, 0);
  std::vector<GeneratedVideo> permuted;
  for (size_t idx : data.split_indices(split)) {
    GeneratedVideo video =
        permute_halves(data.videos[idx], data.features[idx]);
    if (video.annotation.segments.empty()) {
      warn("video '" + video.annotation.id +
           "': nothing left after permutation, skipped");
      continue;
    }
    permuted.push_back(std::move(video));
  }
  const Dataset pdata = Dataset::from_generated(std::move(permuted));
  result.permuted = evaluate(&ck, pdata, split, Method::procnets_lstm, 0);
  return result;
}

std::vector<std::pair<std::string, std::vector<ScoredSegment>>> infer_split(
    const Checkpoint& ck, const Dataset& data, Split split,
    int beam_override) {
  const auto indices = data.split_indices(split);
  if (indices.empty()) {
    throw Error(ErrorKind::invalid_argument,
                std::string("split '") + split_name(split) + "' has no videos");
  }
  std::vector<std::pair<std::string, std::vector<ScoredSegment>>> out;
  for (size_t idx : indices) {
    out.emplace_back(data.videos[idx].id,
                     infer_video(ck, data.features[idx], beam_override));
  }
  return out;
}

namespace {

json report_body(const EvalReport& report) {
  json body;
  body["jaccard"] = report.jaccard;
  body["miou"] = report.miou;
  body["recall"] = report.recall;
  body["precision"] = report.precision;
  body["f1"] = report.f1;
  body["num_videos"] = report.videos.size();
  json videos = json::array();
  for (const VideoEval& v : report.videos) {
    videos.push_back({{"id", v.id},
                      {"jaccard", v.jaccard},
                      {"miou", v.miou},
                      {"recall", v.recall},
                      {"precision", v.precision},
                      {"f1", v.f1},
                      {"num_predictions", v.num_predictions}});
  }
  body["videos"] = std::move(videos);
  return body;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report, Method method,
                                Split split, const RunConfig* config) {
  json doc = report_body(report);
  doc["method"] = method_name(method);
  doc["split"] = split_name(split);
  if (config != nullptr) doc["config"] = json::parse(config->to_json_text());
  return doc.dump(2);
}

std::string permutation_to_json(const PermutationResult& result, Split split,
                                const RunConfig& config) {
  json doc;
  doc["split"] = split_name(split);
  doc["config"] = json::parse(config.to_json_text());
  doc["original"] = report_body(result.original);
  doc["permuted"] = report_body(result.permuted);
  doc["delta"] = {
      {"jaccard", result.permuted.jaccard - result.original.jaccard},
      {"miou", result.permuted.miou - result.original.miou}};
  return doc.dump(2);
}

std::string predictions_to_json(
    const std::vector<std::pair<std::string, std::vector<ScoredSegment>>>&
        preds) {
  json videos = json::array();
  for (const auto& [id, segments] : preds) {
    json segs = json::array();
    for (const ScoredSegment& s : segments) {
      segs.push_back({{"start_frame", s.segment.start},
                      {"end_frame", s.segment.end},
                      {"score", s.score}});
    }
    videos.push_back({{"id", id}, {"segments", std::move(segs)}});
  }
  json doc;
  doc["videos"] = std::move(videos);
  return doc.dump(2);
}

namespace {

json summary_stats(std::vector<double> values) {
  json out;
  if (values.empty()) {
    out["count"] = 0;
    return out;
  }
  double mean = 0.0;
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  out["count"] = values.size();
  out["mean"] = mean;
  out["std"] = std::sqrt(var);
  out["min"] = lo;
  out["max"] = hi;
  return out;
}

json histogram(const std::vector<double>& values, int bins) {
  json out;
  if (values.empty()) {
    out["counts"] = json::array();
    out["edges"] = json::array();
    return out;
  }
  const double hi = *std::max_element(values.begin(), values.end());
  const double width = std::max(hi / bins, 1e-12);
  std::vector<int> counts(bins, 0);
  for (double v : values) {
    int bin = static_cast<int>(v / width);
    bin = std::clamp(bin, 0, bins - 1);
    counts[bin] += 1;
  }
  json edges = json::array();
  for (int i = 0; i <= bins; ++i) edges.push_back(i * width);
  out["counts"] = counts;
  out["edges"] = std::move(edges);
  return out;
}

json stats_for(const Dataset& data, const std::vector<size_t>& indices) {
  std::vector<double> counts, lengths;
  for (size_t idx : indices) {
    counts.push_back(static_cast<double>(data.videos[idx].segments.size()));
    for (const Segment& s : data.videos[idx].segments) {
      lengths.push_back(static_cast<double>(s.length()));
    }
  }
  json out;
  out["num_videos"] = indices.size();
  out["segments_per_video"] = summary_stats(counts);
  out["segment_length_frames"] = summary_stats(lengths);
  out["segment_length_histogram"] = histogram(lengths, 8);
  return out;
}

}  // namespace

std::string dataset_stats_json(const Dataset& data,
                               const std::optional<Split>& split) {
  json doc;
  doc["num_frames"] = data.num_frames();
  doc["feature_dim"] = data.feature_dim();
  if (split.has_value()) {
    doc["split"] = split_name(*split);
    doc["stats"] = stats_for(data, data.split_indices(*split));
  } else {
    std::vector<size_t> all(data.videos.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    doc["stats"] = stats_for(data, all);
    json splits;
    for (Split s : {Split::train, Split::val, Split::test}) {
      splits[split_name(s)] = stats_for(data, data.split_indices(s));
    }
    doc["splits"] = std::move(splits);
  }
  return doc.dump(2);
}

}  // namespace procnets
