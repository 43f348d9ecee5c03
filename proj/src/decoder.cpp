#include "procnets/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "procnets/errors.hpp"

namespace procnets {

CandidateGrid build_candidate_grid(const ProposalMap& map, int pool_h,
                                   int pool_w,
                                   const std::vector<int>& anchor_lengths,
                                   int num_frames) {
  if (pool_h < 1 || pool_w < 1) {
    throw Error(ErrorKind::config, "pooling kernel must be at least 1x1");
  }
  const int k_rows = map.scores.rows;
  const int frames = map.scores.cols;
  CandidateGrid grid;
  grid.rows = (k_rows + pool_h - 1) / pool_h;
  grid.cols = (frames + pool_w - 1) / pool_w;
  grid.cells.resize(static_cast<size_t>(grid.rows) * grid.cols);
  grid.proposal_vector.resize(grid.cells.size());
  for (int col = 0; col < grid.cols; ++col) {
    for (int row = 0; row < grid.rows; ++row) {
      int best_k = -1, best_t = -1;
      double best = 0.0;
      for (int k = row * pool_h; k < std::min((row + 1) * pool_h, k_rows); ++k) {
        for (int t = col * pool_w; t < std::min((col + 1) * pool_w, frames);
             ++t) {
          if (best_k < 0 || map.scores.at(k, t) > best) {
            best = map.scores.at(k, t);
            best_k = k;
            best_t = t;
          }
        }
      }
      GridCell cell;
      cell.score = best;
      cell.anchor_row = best_k;
      cell.frame = best_t;
      const Anchor anchor{best_t, anchor_lengths[best_k]};
      const OffsetPair offsets{map.offsets_c.at(best_k, best_t),
                               map.offsets_l.at(best_k, best_t)};
      cell.segment = decode_segment(anchor, offsets, num_frames);
      const int flat = col * grid.rows + row;
      grid.cells[flat] = cell;
      grid.proposal_vector[flat] = best;
    }
  }
  return grid;
}

int nearest_candidate(const Segment& gt, const CandidateGrid& grid) {
  if (grid.cells.empty()) {
    throw Error(ErrorKind::invalid_argument, "nearest_candidate: empty grid");
  }
  int best = -1;
  double best_iou = -1.0;
  for (int m = 0; m < grid.size(); ++m) {
    const double v = iou(grid.cells[m].segment, gt);
    if (v > best_iou) {
      best_iou = v;
      best = m;
    }
  }
  if (best_iou > 0.0) return best;
  // Nothing overlaps; fall back to the closest candidate center.
  best = 0;
  double best_dist = std::abs(grid.cells[0].segment.center() - gt.center());
  for (int m = 1; m < grid.size(); ++m) {
    const double d = std::abs(grid.cells[m].segment.center() - gt.center());
    if (d < best_dist) {
      best_dist = d;
      best = m;
    }
  }
  return best;
}

DecoderParams::DecoderParams(int num_candidates_, int hidden_, int feature_dim_)
    : lstm("decoder.lstm", 3 * num_candidates_, hidden_),
      out_w("decoder.out.w", num_candidates_ + 1, hidden_),
      out_b("decoder.out.b", num_candidates_ + 1, 1),
      embedding("decoder.embedding", num_candidates_ + 1, num_candidates_),
      content_w("decoder.content.w", num_candidates_, feature_dim_),
      content_b("decoder.content.b", num_candidates_, 1),
      num_candidates(num_candidates_),
      hidden(hidden_),
      feature_dim(feature_dim_) {}

void DecoderParams::init(Rng& rng) {
  lstm.init(rng);
  init_uniform(out_w.value, rng);
  init_uniform(embedding.value, rng);
  init_uniform(content_w.value, rng);
}

std::vector<double> mean_pool(const Array2& features, const Segment& seg) {
  if (seg.start < 0 || seg.end > features.rows || seg.length() < 1) {
    throw Error(ErrorKind::invalid_argument,
                "mean_pool: segment [" + std::to_string(seg.start) + ", " +
                    std::to_string(seg.end) + ") outside a " +
                    std::to_string(features.rows) + "-frame video");
  }
  std::vector<double> pooled(features.cols, 0.0);
  for (int t = seg.start; t < seg.end; ++t) {
    const double* row = features.row(t);
    for (int c = 0; c < features.cols; ++c) pooled[c] += row[c];
  }
  const double inv = 1.0 / seg.length();
  for (double& v : pooled) v *= inv;
  return pooled;
}

std::vector<double> segment_content(const DecoderParams& p,
                                    const Array2& features, const Segment& seg) {
  const std::vector<double> pooled = mean_pool(features, seg);
  std::vector<double> out(p.num_candidates);
  affine(p.content_w.value, p.content_b.value, pooled, out);
  return out;
}

std::vector<double> location_embedding(const DecoderParams& p, int token) {
  if (token < 0 || token > p.num_candidates) {
    throw Error(ErrorKind::invalid_argument,
                "location_embedding: token " + std::to_string(token) +
                    " out of range for " + std::to_string(p.num_candidates) +
                    " candidates");
  }
  const double* row = p.embedding.value.row(token);
  return std::vector<double>(row, row + p.num_candidates);
}

namespace {

// Builds the concatenated (S, B, C) step input with ablated thirds zeroed.
std::vector<double> build_step_input(const DecoderParams& p,
                                     const std::vector<double>& proposal_vector,
                                     int embedding_row,
                                     const std::vector<double>& content,
                                     const AblationFlags& ablation) {
  const int m = p.num_candidates;
  std::vector<double> input(3 * m, 0.0);
  if (!ablation.drop_proposal_vec) {
    std::copy(proposal_vector.begin(), proposal_vector.end(), input.begin());
  }
  if (!ablation.drop_location_emb) {
    const double* row = p.embedding.value.row(embedding_row);
    std::copy(row, row + m, input.begin() + m);
  }
  if (!ablation.drop_segment_content) {
    std::copy(content.begin(), content.end(), input.begin() + 2 * m);
  }
  return input;
}

}  // namespace

std::vector<std::vector<double>> TeacherForcedRun::step_probs() const {
  std::vector<std::vector<double>> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.probs);
  return out;
}

std::vector<int> TeacherForcedRun::targets() const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.target);
  return out;
}

TeacherForcedRun sequence_forward_teacher_forced(
    const DecoderParams& p, const CandidateGrid& grid, const Array2& features,
    const std::vector<Segment>& gts, const std::vector<int>& gt_candidates,
    const AblationFlags& ablation) {
  if (gts.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "teacher forcing requires at least one ground-truth segment");
  }
  if (gts.size() != gt_candidates.size()) {
    throw Error(ErrorKind::invalid_argument,
                "ground-truth segments and candidate indices disagree");
  }
  if (grid.size() != p.num_candidates) {
    throw Error(ErrorKind::dimension,
                "grid has " + std::to_string(grid.size()) +
                    " candidates, decoder expects " +
                    std::to_string(p.num_candidates));
  }
  const int n = static_cast<int>(gts.size());
  const int h = p.hidden;
  TeacherForcedRun run;
  run.steps.resize(n + 1);
  std::vector<double> h_state(h, 0.0), c_state(h, 0.0);
  std::vector<double> h_next(h), c_next(h);
  for (int step = 0; step <= n; ++step) {
    TeacherForcedStep& s = run.steps[step];
    if (step == 0) {
      s.embedding_row = p.start_token();
      s.content_segment = Segment(0, features.rows);
    } else {
      s.embedding_row = gt_candidates[step - 1];
      s.content_segment = gts[step - 1];
    }
    s.target = step < n ? gt_candidates[step] : p.end_token();
    s.pooled = mean_pool(features, s.content_segment);
    std::vector<double> content(p.num_candidates);
    affine(p.content_w.value, p.content_b.value, s.pooled, content);
    s.input = build_step_input(p, grid.proposal_vector, s.embedding_row,
                               content, ablation);
    lstm_step(p.lstm, s.input, h_state, c_state, h_next, c_next, &s.lstm);
    h_state = h_next;
    c_state = c_next;
    s.hidden = h_state;
    std::vector<double> logits(p.num_candidates + 1);
    affine(p.out_w.value, p.out_b.value, h_state, logits);
    s.probs.resize(logits.size());
    softmax(logits, s.probs);
  }
  return run;
}

void sequence_backward_teacher_forced(DecoderParams& p,
                                      const TeacherForcedRun& run,
                                      double loss_scale,
                                      const AblationFlags& ablation,
                                      std::vector<double>& dproposal_vector) {
  const int m = p.num_candidates;
  const int h = p.hidden;
  const int steps = static_cast<int>(run.steps.size());
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::vector<double> dh(h), dh_prev(h), dc_prev(h);
  std::vector<double> dlogits(m + 1);
  std::vector<double> dinput(3 * m);
  std::vector<double> dcontent(m);
  for (int step = steps - 1; step >= 0; --step) {
    const TeacherForcedStep& s = run.steps[step];
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    softmax_ce_backward(s.probs, s.target, loss_scale, dlogits);
    std::fill(dh.begin(), dh.end(), 0.0);
    affine_backward(p.out_w.value, s.hidden, dlogits, &p.out_w.grad,
                    &p.out_b.grad, dh);
    for (int j = 0; j < h; ++j) dh[j] += dh_next[j];
    std::fill(dinput.begin(), dinput.end(), 0.0);
    lstm_step_backward(p.lstm, s.lstm, dh, dc_next, dh_prev, dc_prev, dinput);
    if (!ablation.drop_proposal_vec) {
      for (int i = 0; i < m; ++i) dproposal_vector[i] += dinput[i];
    }
    if (!ablation.drop_location_emb) {
      double* erow = p.embedding.grad.row(s.embedding_row);
      for (int i = 0; i < m; ++i) erow[i] += dinput[m + i];
    }
    if (!ablation.drop_segment_content) {
      std::copy(dinput.begin() + 2 * m, dinput.end(), dcontent.begin());
      affine_backward(p.content_w.value, s.pooled, dcontent, &p.content_w.grad,
                      &p.content_b.grad, std::span<double>());
    }
    dh_next = dh_prev;
    dc_next = dc_prev;
  }
}

namespace {

struct Hypothesis {
  std::vector<Emission> emissions;
  std::vector<bool> used;
  double log_prob = 0.0;
  bool done = false;
  int prev_token = 0;            // embedding row consumed by the next step
  Segment prev_segment;          // content extent consumed by the next step
  std::vector<double> h, c;
};

}  // namespace

std::vector<Emission> decode(const DecoderParams& p, const CandidateGrid& grid,
                             const Array2& features, int beam_size, int s_max,
                             const AblationFlags& ablation) {
  if (beam_size < 1 || s_max < 1) {
    throw Error(ErrorKind::config, "decode requires beam_size >= 1 and s_max >= 1");
  }
  if (grid.size() != p.num_candidates) {
    throw Error(ErrorKind::dimension,
                "grid has " + std::to_string(grid.size()) +
                    " candidates, decoder expects " +
                    std::to_string(p.num_candidates));
  }
  const int m = grid.size();
  Hypothesis root;
  root.used.assign(m, false);
  root.prev_token = p.start_token();
  root.prev_segment = Segment(0, features.rows);
  root.h.assign(p.hidden, 0.0);
  root.c.assign(p.hidden, 0.0);
  std::vector<Hypothesis> beam{std::move(root)};
  std::vector<double> h_next(p.hidden), c_next(p.hidden);
  std::vector<double> logits(m + 1), probs(m + 1);
  for (int step = 0; step < s_max; ++step) {
    bool any_live = false;
    std::vector<Hypothesis> expanded;
    for (const Hypothesis& hyp : beam) {
      if (hyp.done) {
        expanded.push_back(hyp);
        continue;
      }
      any_live = true;
      std::vector<double> content(p.num_candidates);
      affine(p.content_w.value, p.content_b.value,
             mean_pool(features, hyp.prev_segment), content);
      const std::vector<double> input = build_step_input(
          p, grid.proposal_vector, hyp.prev_token, content, ablation);
      lstm_step(p.lstm, input, hyp.h, hyp.c, h_next, c_next, nullptr);
      affine(p.out_w.value, p.out_b.value, h_next, logits);
      softmax(logits, probs);
      for (int cls = 0; cls <= m; ++cls) {
        if (cls < m && hyp.used[cls]) continue;
        Hypothesis next = hyp;
        next.log_prob += std::log(std::max(probs[cls], 1e-300));
        next.h = h_next;
        next.c = c_next;
        if (cls == p.end_token()) {
          next.done = true;
        } else {
          next.used[cls] = true;
          next.prev_token = cls;
          next.prev_segment = grid.cells[cls].segment;
          next.emissions.push_back(
              {cls, probs[cls], grid.cells[cls].segment});
        }
        expanded.push_back(std::move(next));
      }
    }
    if (!any_live) break;
    std::stable_sort(expanded.begin(), expanded.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                       return a.log_prob > b.log_prob;
                     });
    if (static_cast<int>(expanded.size()) > beam_size) {
      expanded.resize(beam_size);
    }
    beam = std::move(expanded);
    bool all_done = true;
    for (const auto& hyp : beam) all_done = all_done && hyp.done;
    if (all_done) break;
  }
  // Hitting s_max completes any hypothesis still running.
  const Hypothesis* best = &beam.front();
  for (const auto& hyp : beam) {
    if (hyp.log_prob > best->log_prob) best = &hyp;
  }
  return best->emissions;
}

std::vector<ScoredSegment> nms_select(std::vector<ScoredSegment> candidates,
                                      double iou_thresh, int n) {
  if (n < 1) {
    throw Error(ErrorKind::invalid_argument, "nms_select requires n >= 1");
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ScoredSegment& a, const ScoredSegment& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.segment.start != b.segment.start) {
                       return a.segment.start < b.segment.start;
                     }
                     return a.segment.end < b.segment.end;
                   });
  std::vector<ScoredSegment> kept;
  for (const ScoredSegment& cand : candidates) {
    if (static_cast<int>(kept.size()) >= n) break;
    bool ok = true;
    for (const ScoredSegment& k : kept) {
      if (iou(cand.segment, k.segment) >= iou_thresh) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(cand);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const ScoredSegment& a, const ScoredSegment& b) {
                     return a.segment.start < b.segment.start;
                   });
  return kept;
}

std::vector<Segment> uniform_segments(int num_frames, int n) {
  if (n < 1 || n > num_frames) {
    throw Error(ErrorKind::invalid_argument,
                "uniform_segments: cannot cut " + std::to_string(num_frames) +
                    " frames into " + std::to_string(n) + " segments");
  }
  const int base = num_frames / n;
  std::vector<Segment> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int start = i * base;
    const int end = i + 1 == n ? num_frames : (i + 1) * base;
    out.emplace_back(start, end);
  }
  return out;
}

}  // namespace procnets
