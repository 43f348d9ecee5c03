// Command-line front end. All real work happens behind the C API in
// libprocnets; this file only shuffles files, flags and JSON strings.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "procnets.h"

namespace {

namespace fs = std::filesystem;

struct DatasetHandle {
  pn_dataset* ptr = nullptr;
  ~DatasetHandle() { pn_dataset_free(ptr); }
};

struct ModelHandle {
  pn_model* ptr = nullptr;
  ~ModelHandle() { pn_model_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { pn_string_free(ptr); }
};

int report_failure(pn_status status) {
  std::fprintf(stderr, "error (%s): %s\n", pn_status_name(status),
               pn_last_error());
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << "\n";
}

// Loads the config file (or starts from an empty object) and applies the
// command-line overrides.
std::string merged_config(const std::string& config_path,
                          const std::optional<long long>& seed,
                          const std::string& ablate) {
  nlohmann::json doc = nlohmann::json::object();
  if (!config_path.empty()) {
    doc = nlohmann::json::parse(read_file(config_path));
  }
  if (seed.has_value()) doc["seed"] = *seed;
  if (!ablate.empty()) {
    if (ablate == "proposal_vec") {
      doc["drop_proposal_vec"] = true;
    } else if (ablate == "location_emb") {
      doc["drop_location_emb"] = true;
    } else if (ablate == "segment_content") {
      doc["drop_segment_content"] = true;
    } else {
      throw CLI::ValidationError(
          "--ablate expects proposal_vec, location_emb or segment_content");
    }
  }
  return doc.dump();
}

int emit(const char* json_text, const std::string& out_dir,
         const std::string& filename) {
  std::printf("%s\n", json_text);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(out_dir + "/" + filename, json_text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor-based procedure segmentation: data generation, "
               "training, inference and evaluation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint_path;
  std::string method, split = "test", ablate;
  std::string stats_split;  // empty selects the whole corpus
  std::optional<long long> seed;
  int beam = 0;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--config", config_path, "generator config JSON");
  gen->add_option("--out", out_dir, "output dataset directory")->required();
  gen->add_option("--seed", seed, "override the config seed");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", config_path, "run config JSON");
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", out_dir, "run output directory");
  train_cmd->add_option("--seed", seed, "override the config seed");
  train_cmd->add_option("--ablate", ablate,
                        "drop one decoder input: proposal_vec, location_emb "
                        "or segment_content");

  auto* infer_cmd = app.add_subcommand("infer", "decode segment predictions");
  infer_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  infer_cmd->add_option("--data", data_dir, "dataset directory")->required();
  infer_cmd->add_option("--split", split, "train, val or test");
  infer_cmd->add_option("--beam", beam, "beam size (0 = config value)");
  infer_cmd->add_option("--out", out_dir, "directory for predictions.json");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a method on a split");
  eval_cmd->add_option("--method", method,
                       "procnets-lstm, procnets-nms or uniform")
      ->required();
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
  eval_cmd->add_option("--split", split, "train, val or test");
  eval_cmd->add_option("--checkpoint", checkpoint_path,
                       "checkpoint (needed by the learned methods)");
  eval_cmd->add_option("--beam", beam, "beam size (0 = config value)");
  eval_cmd->add_option("--out", out_dir, "directory for report.json");

  auto* permute_cmd = app.add_subcommand(
      "permute-eval", "evaluate on the original and half-swapped split");
  permute_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  permute_cmd->add_option("--data", data_dir, "dataset directory")->required();
  permute_cmd->add_option("--split", split, "train, val or test");
  permute_cmd->add_option("--out", out_dir, "directory for report.json");

  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
  stats_cmd->add_option("--data", data_dir, "dataset directory")->required();
  stats_cmd->add_option("--split", stats_split, "restrict to one split");
  stats_cmd->add_option("--out", out_dir, "directory for stats.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      const std::string cfg = merged_config(config_path, seed, "");
      if (pn_status s = pn_generate_dataset(cfg.c_str(), out_dir.c_str())) {
        return report_failure(s);
      }
      std::fprintf(stderr, "dataset written to %s\n", out_dir.c_str());
      return 0;
    }

    DatasetHandle dataset;
    if (pn_status s = pn_dataset_open(data_dir.c_str(), &dataset.ptr)) {
      return report_failure(s);
    }

    if (train_cmd->parsed()) {
      const std::string cfg = merged_config(config_path, seed, ablate);
      ModelHandle model;
      if (pn_status s = pn_train(cfg.c_str(), dataset.ptr,
                                 out_dir.empty() ? nullptr : out_dir.c_str(),
                                 &model.ptr)) {
        return report_failure(s);
      }
      if (!out_dir.empty()) {
        std::fprintf(stderr, "checkpoint written to %s/checkpoint.pn\n",
                     out_dir.c_str());
      }
      return 0;
    }

    if (infer_cmd->parsed()) {
      ModelHandle model;
      if (pn_status s = pn_model_open(checkpoint_path.c_str(), &model.ptr)) {
        return report_failure(s);
      }
      OwnedString json;
      if (pn_status s = pn_infer_json(model.ptr, dataset.ptr, split.c_str(),
                                      beam, &json.ptr)) {
        return report_failure(s);
      }
      return emit(json.ptr, out_dir, "predictions.json");
    }

    if (eval_cmd->parsed()) {
      ModelHandle model;
      if (!checkpoint_path.empty()) {
        if (pn_status s = pn_model_open(checkpoint_path.c_str(), &model.ptr)) {
          return report_failure(s);
        }
      }
      OwnedString json;
      if (pn_status s = pn_evaluate_json(model.ptr, dataset.ptr,
                                         method.c_str(), split.c_str(), beam,
                                         &json.ptr)) {
        return report_failure(s);
      }
      return emit(json.ptr, out_dir, "report.json");
    }

    if (permute_cmd->parsed()) {
      ModelHandle model;
      if (pn_status s = pn_model_open(checkpoint_path.c_str(), &model.ptr)) {
        return report_failure(s);
      }
      OwnedString json;
      if (pn_status s = pn_permutation_eval_json(model.ptr, dataset.ptr,
                                                 split.c_str(), &json.ptr)) {
        return report_failure(s);
      }
      return emit(json.ptr, out_dir, "report.json");
    }

    if (stats_cmd->parsed()) {
      OwnedString json;
      if (pn_status s = pn_dataset_stats_json(
              dataset.ptr, stats_split.empty() ? nullptr : stats_split.c_str(),
              &json.ptr)) {
        return report_failure(s);
      }
      return emit(json.ptr, out_dir, "stats.json");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
