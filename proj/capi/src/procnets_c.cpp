#include "procnets.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "procnets/dataio.hpp"
#include "procnets/errors.hpp"
#include "procnets/pipeline.hpp"

using namespace procnets;

struct pn_dataset {
  Dataset data;
};

struct pn_model {
  Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

pn_status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_argument: return PN_ERR_INVALID_ARGUMENT;
    case ErrorKind::config: return PN_ERR_CONFIG;
    case ErrorKind::io: return PN_ERR_IO;
    case ErrorKind::format: return PN_ERR_FORMAT;
    case ErrorKind::parse: return PN_ERR_PARSE;
    case ErrorKind::dimension: return PN_ERR_DIMENSION;
    case ErrorKind::training: return PN_ERR_TRAINING;
  }
  return PN_ERR_INTERNAL;
}

template <typename Fn>
pn_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PN_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PN_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

pn_status require(bool ok, const char* message) {
  if (ok) return PN_OK;
  g_last_error = message;
  return PN_ERR_INVALID_ARGUMENT;
}

}  // namespace

const char* pn_status_name(pn_status status) {
  switch (status) {
    case PN_OK: return "ok";
    case PN_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PN_ERR_CONFIG: return "config";
    case PN_ERR_IO: return "io";
    case PN_ERR_FORMAT: return "format";
    case PN_ERR_PARSE: return "parse";
    case PN_ERR_DIMENSION: return "dimension";
    case PN_ERR_TRAINING: return "training";
    default: return "internal";
  }
}

const char* pn_last_error(void) { return g_last_error.c_str(); }

void pn_string_free(char* text) { delete[] text; }

pn_status pn_generate_dataset(const char* config_json, const char* out_dir) {
  if (pn_status s = require(out_dir != nullptr, "out_dir is required")) return s;
  return guarded([&] {
    const SynthConfig cfg =
        (config_json == nullptr || config_json[0] == '\0')
            ? SynthConfig{}
            : SynthConfig::from_json_text(config_json);
    write_dataset(synth_generate(cfg), out_dir);
  });
}

pn_status pn_dataset_open(const char* dir, pn_dataset** out) {
  if (pn_status s = require(dir != nullptr && out != nullptr,
                            "dir and out are required")) {
    return s;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<pn_dataset>();
    handle->data = Dataset::open(dir);
    *out = handle.release();
  });
}

void pn_dataset_free(pn_dataset* dataset) { delete dataset; }

pn_status pn_dataset_stats_json(const pn_dataset* dataset, const char* split,
                                char** json_out) {
  if (pn_status s = require(dataset != nullptr && json_out != nullptr,
                            "dataset and json_out are required")) {
    return s;
  }
  *json_out = nullptr;
  return guarded([&] {
    std::optional<Split> which;
    if (split != nullptr && split[0] != '\0') which = parse_split(split);
    *json_out = copy_string(dataset_stats_json(dataset->data, which));
  });
}

pn_status pn_train(const char* config_json, const pn_dataset* dataset,
                   const char* out_dir, pn_model** out) {
  if (pn_status s = require(dataset != nullptr && out != nullptr,
                            "dataset and out are required")) {
    return s;
  }
  *out = nullptr;
  return guarded([&] {
    const RunConfig cfg =
        (config_json == nullptr || config_json[0] == '\0')
            ? RunConfig{}
            : RunConfig::from_json_text(config_json);
    auto handle = std::make_unique<pn_model>();
    handle->checkpoint = make_checkpoint(cfg);
    train(handle->checkpoint, dataset->data,
          out_dir != nullptr ? out_dir : "");
    *out = handle.release();
  });
}

pn_status pn_model_open(const char* checkpoint_path, pn_model** out) {
  if (pn_status s = require(checkpoint_path != nullptr && out != nullptr,
                            "checkpoint_path and out are required")) {
    return s;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<pn_model>();
    handle->checkpoint = load_checkpoint(checkpoint_path);
    *out = handle.release();
  });
}

pn_status pn_model_save(const pn_model* model, const char* path) {
  if (pn_status s = require(model != nullptr && path != nullptr,
                            "model and path are required")) {
    return s;
  }
  return guarded([&] { save_checkpoint(model->checkpoint, path); });
}

void pn_model_free(pn_model* model) { delete model; }

pn_status pn_infer_json(const pn_model* model, const pn_dataset* dataset,
                        const char* split, int32_t beam_size,
                        char** json_out) {
  if (pn_status s = require(model != nullptr && dataset != nullptr &&
                                split != nullptr && json_out != nullptr,
                            "model, dataset, split and json_out are required")) {
    return s;
  }
  *json_out = nullptr;
  return guarded([&] {
    const auto preds = infer_split(model->checkpoint, dataset->data,
                                   parse_split(split), beam_size);
    *json_out = copy_string(predictions_to_json(preds));
  });
}

pn_status pn_evaluate_json(const pn_model* model, const pn_dataset* dataset,
                           const char* method, const char* split,
                           int32_t beam_size, char** json_out) {
  if (pn_status s = require(dataset != nullptr && method != nullptr &&
                                split != nullptr && json_out != nullptr,
                            "dataset, method, split and json_out are required")) {
    return s;
  }
  *json_out = nullptr;
  return guarded([&] {
    const Method m = parse_method(method);
    const Split sp = parse_split(split);
    const Checkpoint* ck = model != nullptr ? &model->checkpoint : nullptr;
    const EvalReport report =
        evaluate(ck, dataset->data, sp, m, beam_size);
    *json_out = copy_string(eval_report_to_json(
        report, m, sp, ck != nullptr ? &ck->config : nullptr));
  });
}

pn_status pn_permutation_eval_json(const pn_model* model,
                                   const pn_dataset* dataset,
                                   const char* split, char** json_out) {
  if (pn_status s = require(model != nullptr && dataset != nullptr &&
                                split != nullptr && json_out != nullptr,
                            "model, dataset, split and json_out are required")) {
    return s;
  }
  *json_out = nullptr;
  return guarded([&] {
    const Split sp = parse_split(split);
    const PermutationResult result =
        permutation_experiment(model->checkpoint, dataset->data, sp);
    *json_out = copy_string(
        permutation_to_json(result, sp, model->checkpoint.config));
  });
}
