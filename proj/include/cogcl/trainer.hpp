// Copyright 2026 The cogcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogcl/compute.hpp"
#include "cogcl/data.hpp"
#include "cogcl/encoder.hpp"
#include "cogcl/eval.hpp"
#include "cogcl/graph.hpp"
#include "cogcl/objective.hpp"
#include "cogcl/quantizer.hpp"
#include "cogcl/sampling.hpp"

namespace cogcl::trainer {

enum class Mode { cogcl, lightgcn_baseline };

Mode parse_mode(const std::string& name);
const char* to_string(Mode m);
compute::GradStop parse_grad_stop(const std::string& name);

struct TrainConfig {
  Mode mode = Mode::cogcl;
  int epochs = 300;
  int batch_size = 4096;
  int embed_dim = 64;
  int num_layers = 3;
  int levels = 4;
  int codebook_size = 256;
  quantizer::Scheme scheme = quantizer::Scheme::rq;
  double tau = 0.2;
  double lambda = 1.0;
  double mu = 0.1;
  double eta = 0.1;
  double p_replace = 0.1;
  double p_add = 0.1;
  double dropout_rate = 0.1;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  double init_std = 0.0;  // embedding init; 0 selects xavier-normal
  int patience = 20;
  std::uint64_t seed = 2024;
  compute::GradStop aug_stop = compute::GradStop::none;
  compute::GradStop sim_stop = compute::GradStop::none;
  bool shared_codes = true;
  bool shared_targets = true;
  int target_cap = 50;

  /// Throws UsageError on nonpositive counts, probabilities outside [0, 1],
  /// negative weights and the like.
  void validate() const;

  encoder::EncoderConfig encoder() const;
  quantizer::QuantizerConfig quantizer() const;
  /// Loss weights in effect; all auxiliary weights are zero in baseline mode.
  objective::LossWeights weights() const;
  compute::AdamOptions adam() const;
};

/// Every config key with its current value rendered as text, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_items(const TrainConfig& cfg);
/// Parses and assigns one key. Throws UsageError for unknown keys or bad values.
void set_config_item(TrainConfig& cfg, const std::string& key, const std::string& value);
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

/// Embedding tables (normal with init_std, or xavier-normal) and, in cogcl
/// mode, code embeddings and unit-norm codebooks. Deterministic in cfg.seed.
compute::ParameterStore<float> init_parameters(const data::InteractionDataset& ds, const TrainConfig& cfg);

/// Frozen per-epoch state: codes, the augmented graph pair and the positive
/// index. Absent in baseline mode.
struct EpochArtifacts {
  CodeAssignment codes;
  graph::AugmentedGraphPair pair;
  objective::PositiveIndex index;
};

EpochArtifacts prepare_epoch(const compute::ParameterStore<float>& store, const data::InteractionDataset& ds,
                             const graph::CsrGraph& base, const TrainConfig& cfg, int epoch);

/// One optimization step on one batch; returns the loss components.
objective::LossBreakdown train_step(compute::ParameterStore<float>& store, const graph::CsrGraph& base,
                                    const EpochArtifacts* artifacts, const objective::TrainBatch& batch,
                                    std::int32_t num_users, const TrainConfig& cfg, const encoder::ViewSeeds& seeds);

/// Eval-mode base-view user and item representations.
std::pair<Mat<float>, Mat<float>> final_embeddings(const compute::ParameterStore<float>& store,
                                                   const graph::CsrGraph& base, const TrainConfig& cfg);

struct BatchContext {
  int epoch = 0;
  int batch = 0;
  const EpochArtifacts* artifacts = nullptr;
  const objective::LossBreakdown* loss = nullptr;
};

struct EpochRecord {
  int epoch = 0;
  objective::LossBreakdown loss;  // mean over batches
  std::map<int, double> valid_recall;
  std::map<int, double> valid_ndcg;
};

struct TrainOptions {
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const BatchContext&)> observer;
  bool log_progress = false;
};

struct TrainResult {
  compute::ParameterStore<float> store;  // parameters of the best epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool stopped_early = false;
  std::optional<eval::RankingMetrics> test;
};

/// Full schedule: per epoch refresh codes, build the augmented pair and the
/// positive index, run shuffled batches, then validate. Writes ckpt_best,
/// ckpt_last and JSON-lines logs when out_dir is set.
TrainResult train(const data::InteractionDataset& ds, const TrainConfig& cfg, const TrainOptions& opts = {});

nlohmann::json checkpoint_meta(const TrainConfig& cfg, const data::InteractionDataset& ds, int epoch, int best_epoch);

}  // namespace cogcl::trainer
