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

#include "cogcl/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cogcl/checkpoint.hpp"

namespace cogcl::trainer {

using compute::GradStop;
using compute::ParameterStore;

Mode parse_mode(const std::string& name) {
  if (name == "cogcl") return Mode::cogcl;
  if (name == "lightgcn_baseline") return Mode::lightgcn_baseline;
  throw UsageError("unknown mode '" + name + "' (expected cogcl or lightgcn_baseline)");
}

const char* to_string(Mode m) { return m == Mode::cogcl ? "cogcl" : "lightgcn_baseline"; }

GradStop parse_grad_stop(const std::string& name) {
  if (name == "none") return GradStop::none;
  if (name == "no_alignment") return GradStop::no_alignment;
  if (name == "no_uniformity") return GradStop::no_uniformity;
  throw UsageError("unknown grad stop '" + name + "' (expected none, no_alignment or no_uniformity)");
}

void TrainConfig::validate() const {
  const auto positive = [](long long v, const char* what) {
    if (v <= 0) throw UsageError(std::string(what) + " must be positive");
  };
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  positive(batch_size, "batch_size");
  positive(embed_dim, "embed_dim");
  positive(num_layers, "num_layers");
  positive(levels, "levels");
  positive(target_cap, "target_cap");
  if (codebook_size < 2) throw UsageError("codebook_size must be >= 2");
  if (tau <= 0) throw UsageError("tau must be positive");
  if (lambda < 0 || mu < 0 || eta < 0) throw UsageError("loss weights must be nonnegative");
  for (double p : {p_replace, p_add})
    if (p < 0 || p > 1) throw UsageError("augmentation probabilities must lie in [0, 1]");
  if (dropout_rate < 0 || dropout_rate >= 1) throw UsageError("dropout_rate must lie in [0, 1)");
  if (lr <= 0) throw UsageError("lr must be positive");
  if (weight_decay < 0) throw UsageError("weight_decay must be nonnegative");
  if (init_std < 0) throw UsageError("init_std must be nonnegative");
  if (patience < 0) throw UsageError("patience must be >= 0");
  if (mode == Mode::cogcl) quantizer().validate(embed_dim);
}

encoder::EncoderConfig TrainConfig::encoder() const { return {num_layers, embed_dim, dropout_rate}; }

quantizer::QuantizerConfig TrainConfig::quantizer() const { return {scheme, levels, codebook_size, tau}; }

objective::LossWeights TrainConfig::weights() const {
  objective::LossWeights w;
  const bool full = mode == Mode::cogcl;
  w.lambda = full ? lambda : 0.0;
  w.mu = full ? mu : 0.0;
  w.eta = full ? eta : 0.0;
  w.tau = tau;
  w.aug_stop = aug_stop;
  w.sim_stop = sim_stop;
  return w;
}

compute::AdamOptions TrainConfig::adam() const {
  compute::AdamOptions a;
  a.lr = lr;
  a.weight_decay = weight_decay;
  return a;
}

// ---- key/value configuration -------------------------------------------------

namespace {

template <typename V>
V parse_integer(const std::string& key, const std::string& text) {
  V v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("config key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "': expected a number, got '" + text + "'");
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string real_text(double v) { return fmt::format("{}", v); }

struct Field {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

#define INT_FIELD(name)                                                                  \
  Field {                                                                                \
    #name, [](const TrainConfig& c) { return std::to_string(c.name); },                  \
        [](TrainConfig& c, const std::string& v) { c.name = parse_integer<int>(#name, v); } \
  }
#define REAL_FIELD(name)                                                                  \
  Field {                                                                                 \
    #name, [](const TrainConfig& c) { return real_text(c.name); },                        \
        [](TrainConfig& c, const std::string& v) { c.name = parse_real(#name, v); }       \
  }
#define BOOL_FIELD(name)                                                                  \
  Field {                                                                                 \
    #name, [](const TrainConfig& c) { return std::string(c.name ? "true" : "false"); },   \
        [](TrainConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"mode", [](const TrainConfig& c) { return std::string(to_string(c.mode)); },
            [](TrainConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
      INT_FIELD(epochs),
      INT_FIELD(batch_size),
      INT_FIELD(embed_dim),
      INT_FIELD(num_layers),
      INT_FIELD(levels),
      INT_FIELD(codebook_size),
      Field{"scheme", [](const TrainConfig& c) { return std::string(quantizer::to_string(c.scheme)); },
            [](TrainConfig& c, const std::string& v) { c.scheme = quantizer::parse_scheme(v); }},
      REAL_FIELD(tau),
      REAL_FIELD(lambda),
      REAL_FIELD(mu),
      REAL_FIELD(eta),
      REAL_FIELD(p_replace),
      REAL_FIELD(p_add),
      REAL_FIELD(dropout_rate),
      REAL_FIELD(lr),
      REAL_FIELD(weight_decay),
      REAL_FIELD(init_std),
      INT_FIELD(patience),
      Field{"seed", [](const TrainConfig& c) { return std::to_string(c.seed); },
            [](TrainConfig& c, const std::string& v) { c.seed = parse_integer<std::uint64_t>("seed", v); }},
      Field{"aug_grad_stop", [](const TrainConfig& c) { return std::string(compute::to_string(c.aug_stop)); },
            [](TrainConfig& c, const std::string& v) { c.aug_stop = parse_grad_stop(v); }},
      Field{"sim_grad_stop", [](const TrainConfig& c) { return std::string(compute::to_string(c.sim_stop)); },
            [](TrainConfig& c, const std::string& v) { c.sim_stop = parse_grad_stop(v); }},
      BOOL_FIELD(shared_codes),
      BOOL_FIELD(shared_targets),
      INT_FIELD(target_cap),
  };
  return table;
}

#undef INT_FIELD
#undef REAL_FIELD
#undef BOOL_FIELD

}  // namespace

std::vector<std::pair<std::string, std::string>> config_items(const TrainConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

void set_config_item(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (key == f.key) return f.set(cfg, value);
  throw UsageError("unknown config key '" + key + "'");
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config_items(cfg)) j[k] = v;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  for (const auto& [k, v] : j.items()) set_config_item(cfg, k, v.is_string() ? v.get<std::string>() : v.dump());
  return cfg;
}

// ---- model -------------------------------------------------------------------

namespace {

Mat<float> init_embedding(Eigen::Index rows, Eigen::Index cols, double std_dev, Rng& rng) {
  if (std_dev == 0.0) std_dev = std::sqrt(2.0 / static_cast<double>(rows + cols));
  std::normal_distribution<double> gauss(0.0, std_dev);
  Mat<float> m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(gauss(rng));
  return m;
}

enum Stream : std::uint64_t { kInit = 1, kAugment, kPositives, kShuffle, kBatch, kViews, kProbe };

}  // namespace

ParameterStore<float> init_parameters(const data::InteractionDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, {kInit}));
  ParameterStore<float> store;
  store.add(encoder::kEmbedding,
            init_embedding(std::int64_t{ds.num_users} + ds.num_items, cfg.embed_dim, cfg.init_std, rng));
  if (cfg.mode == Mode::cogcl) {
    store.add(encoder::kCodeEmbedding,
              init_embedding(2 * std::int64_t{cfg.levels} * cfg.codebook_size, cfg.embed_dim, cfg.init_std, rng));
    quantizer::init_codebooks(store, cfg.quantizer(), cfg.embed_dim, rng);
  }
  return store;
}

EpochArtifacts prepare_epoch(const ParameterStore<float>& store, const data::InteractionDataset& ds,
                             const graph::CsrGraph& base, const TrainConfig& cfg, int epoch) {
  EpochArtifacts art;
  art.codes = quantizer::refresh_codes(store, base, cfg.encoder(), cfg.quantizer(), epoch);
  graph::AugmentationConfig aug;
  aug.p_replace = cfg.p_replace;
  aug.p_add = cfg.p_add;
  aug.seed = derive_seed(cfg.seed, {kAugment});
  art.pair = graph::build_augmented_pair(ds, art.codes, aug, epoch);
  objective::PositiveIndexOptions po;
  po.shared_codes = cfg.shared_codes;
  po.shared_targets = cfg.shared_targets;
  po.target_cap = static_cast<std::size_t>(cfg.target_cap);
  po.seed = derive_seed(cfg.seed, {kPositives, static_cast<std::uint64_t>(epoch)});
  art.index = objective::PositiveIndex::build(art.codes, ds, po);
  return art;
}

objective::LossBreakdown train_step(ParameterStore<float>& store, const graph::CsrGraph& base,
                                    const EpochArtifacts* artifacts, const objective::TrainBatch& batch,
                                    std::int32_t num_users, const TrainConfig& cfg, const encoder::ViewSeeds& seeds) {
  compute::Tape<float> tape;
  const auto views = encoder::encode_all_views(tape, base, artifacts ? &artifacts->pair : nullptr, store,
                                               cfg.encoder(), seeds, true);
  const auto [loss, breakdown] =
      objective::total_loss(tape, views, batch, num_users, store, cfg.weights(), cfg.quantizer());
  tape.backward(loss);
  compute::adam_step(store, cfg.adam());
  return breakdown;
}

std::pair<Mat<float>, Mat<float>> final_embeddings(const ParameterStore<float>& store, const graph::CsrGraph& base,
                                                   const TrainConfig& cfg) {
  const Mat<float> reps = encoder::encode_value(base, store.at(encoder::kEmbedding).value, cfg.encoder());
  const auto& layout = base.layout();
  return {reps.topRows(layout.num_users), reps.middleRows(layout.num_users, layout.num_items)};
}

nlohmann::json checkpoint_meta(const TrainConfig& cfg, const data::InteractionDataset& ds, int epoch, int best_epoch) {
  return {{"format", "cogcl-checkpoint"},
          {"config", config_to_json(cfg)},
          {"num_users", ds.num_users},
          {"num_items", ds.num_items},
          {"epoch", epoch},
          {"best_epoch", best_epoch}};
}

// ---- schedule ------------------------------------------------------------------

namespace {

class JsonLines {
 public:
  explicit JsonLines(const std::optional<std::filesystem::path>& path) {
    if (path) {
      out_.open(*path, std::ios::trunc);
      if (!out_) throw IoError("cannot write " + path->string());
    }
  }
  void write(const nlohmann::json& j) {
    if (out_.is_open()) out_ << j.dump() << '\n' << std::flush;
  }

 private:
  std::ofstream out_;
};

std::optional<std::filesystem::path> child(const std::optional<std::filesystem::path>& dir, const char* name) {
  if (!dir) return std::nullopt;
  return *dir / name;
}

nlohmann::json breakdown_json(const objective::LossBreakdown& b) {
  return {{"bpr", b.bpr}, {"code", b.code}, {"aug", b.aug}, {"sim", b.sim}, {"total", b.total}};
}

}  // namespace

TrainResult train(const data::InteractionDataset& ds, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  if (ds.train.empty()) throw Error("train split is empty");
  if (opts.out_dir) std::filesystem::create_directories(*opts.out_dir);
  JsonLines train_log(child(opts.out_dir, "train_log.jsonl"));
  JsonLines metrics_log(child(opts.out_dir, "metrics.jsonl"));
  JsonLines diag_log(child(opts.out_dir, "diagnostics.jsonl"));

  const bool full = cfg.mode == Mode::cogcl;
  const graph::CsrGraph base = graph::build_base_graph(ds);
  const objective::BatchSampler sampler(ds);
  TrainResult result;
  ParameterStore<float> store = init_parameters(ds, cfg);
  result.store = store;

  // Fixed probe of train pairs for the alignment/uniformity diagnostic.
  std::vector<data::Pair> probe = ds.train;
  {
    Rng prng(derive_seed(cfg.seed, {kProbe}));
    std::shuffle(probe.begin(), probe.end(), prng);
    probe.resize(std::min<std::size_t>(probe.size(), 256));
  }

  std::vector<double> valid_ndcg10;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto e64 = static_cast<std::uint64_t>(epoch);
    std::optional<EpochArtifacts> art;
    if (full) art = prepare_epoch(store, ds, base, cfg, epoch);

    std::vector<data::Pair> order = ds.train;
    Rng shuffle_rng(derive_seed(cfg.seed, {kShuffle, e64}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Rng batch_rng(derive_seed(cfg.seed, {kBatch, e64}));

    objective::LossBreakdown sum;
    std::int64_t users_fallback = 0, items_fallback = 0;
    std::map<std::string, bool> touched;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const auto batch = sampler.make_batch(std::span<const data::Pair>(order).subspan(begin, end - begin),
                                            art ? &art->index : nullptr, batch_rng);
      const auto b64 = static_cast<std::uint64_t>(batches);
      const encoder::ViewSeeds seeds{derive_seed(cfg.seed, {kViews, e64, b64, 0}),
                                     derive_seed(cfg.seed, {kViews, e64, b64, 1}),
                                     derive_seed(cfg.seed, {kViews, e64, b64, 2})};

      compute::Tape<float> tape;
      const auto views = encoder::encode_all_views(tape, base, art ? &art->pair : nullptr, store, cfg.encoder(),
                                                   seeds, true);
      objective::LossBreakdown br;
      try {
        const auto [loss, b] = objective::total_loss(tape, views, batch, ds.num_users, store, cfg.weights(),
                                                     cfg.quantizer());
        br = b;
        tape.backward(loss);
        for (const auto& e : store.entries())
          if (e.grad.squaredNorm() > 0) touched[e.name] = true;
        compute::adam_step(store, cfg.adam());
      } catch (const NumericError& err) {
        spdlog::error("epoch {} batch {}: {}", epoch, batches, err.what());
        throw;
      }
      if (opts.observer) opts.observer({epoch, batches, art ? &*art : nullptr, &br});
      sum.bpr += br.bpr;
      sum.code += br.code;
      sum.aug += br.aug;
      sum.sim += br.sim;
      sum.total += br.total;
      users_fallback += batch.users_without_positive;
      items_fallback += batch.items_without_positive;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    const double nb = std::max(batches, 1);
    rec.loss = {sum.bpr / nb, sum.code / nb, sum.aug / nb, sum.sim / nb, sum.total / nb};

    const auto [user_emb, item_emb] = final_embeddings(store, base, cfg);
    const auto valid = eval::full_rank_evaluate(user_emb, item_emb, ds, eval::Split::valid);
    rec.valid_recall = valid.recall;
    rec.valid_ndcg = valid.ndcg;
    valid_ndcg10.push_back(valid.ndcg.at(10));
    result.history.push_back(rec);
    const auto sel = eval::select_best(valid_ndcg10, cfg.patience);
    const bool improved = sel.best_epoch == epoch;
    if (improved) {
      result.store = store;
      result.best_epoch = epoch;
    }

    train_log.write({{"epoch", epoch},
                     {"loss", breakdown_json(rec.loss)},
                     {"batches", batches},
                     {"valid_recall@10", valid.recall.at(10)},
                     {"valid_ndcg@10", valid.ndcg.at(10)},
                     {"best_epoch", sel.best_epoch}});
    for (const auto& j : eval::metrics_records(valid, epoch, eval::Split::valid)) metrics_log.write(j);

    nlohmann::json diag = {{"epoch", epoch},
                           {"loss", breakdown_json(rec.loss)},
                           {"batch_users_without_positive", users_fallback},
                           {"batch_items_without_positive", items_fallback},
                           {"zero_norm_rows", compute::zero_norm_rows()}};
    {
      Mat<float> reps(static_cast<Eigen::Index>(2 * probe.size()), user_emb.cols());
      std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
      const auto np = static_cast<std::int32_t>(probe.size());
      for (std::int32_t k = 0; k < np; ++k) {
        reps.row(k) = user_emb.row(probe[static_cast<std::size_t>(k)].first);
        reps.row(np + k) = item_emb.row(probe[static_cast<std::size_t>(k)].second);
        pairs.emplace_back(k, np + k);
      }
      if (reps.rows() >= 2) {
        const auto au = objective::alignment_uniformity<float>(reps, pairs, cfg.tau);
        diag["alignment"] = au.alignment;
        diag["uniformity"] = au.uniformity;
      }
    }
    nlohmann::json untouched = nlohmann::json::array();
    for (const auto& e : store.entries())
      if (!touched.count(e.name)) untouched.push_back(e.name);
    diag["params_without_gradient"] = untouched;
    if (art) {
      diag["users_without_positive"] = art->index.count_without_positive(quantizer::Side::user);
      diag["items_without_positive"] = art->index.count_without_positive(quantizer::Side::item);
      diag["augment_ops"] = {graph::to_string(art->pair.op1), graph::to_string(art->pair.op2)};
      nlohmann::json usage = nlohmann::json::array();
      for (const auto* codes : {&art->codes.user_codes, &art->codes.item_codes})
        for (const auto& u : quantizer::code_usage(*codes, cfg.codebook_size))
          usage.push_back({{"distinct", u.distinct}, {"max_share", u.max_share}});
      diag["code_usage"] = usage;  // user levels then item levels
    }
    diag_log.write(diag);

    if (opts.out_dir) {
      if (improved) write_checkpoint(*opts.out_dir / "ckpt_best", store, checkpoint_meta(cfg, ds, epoch, epoch));
      write_checkpoint(*opts.out_dir / "ckpt_last", store, checkpoint_meta(cfg, ds, epoch, sel.best_epoch));
    }
    if (opts.log_progress)
      spdlog::info("epoch {:>3}  loss {:.4f} (bpr {:.4f} code {:.4f} aug {:.4f} sim {:.4f})  valid R@10 {:.4f} N@10 {:.4f}",
                   epoch, rec.loss.total, rec.loss.bpr, rec.loss.code, rec.loss.aug, rec.loss.sim,
                   valid.recall.at(10), valid.ndcg.at(10));
    if (sel.stop) {
      result.stopped_early = true;
      break;
    }
  }

  if (cfg.epochs == 0 && opts.out_dir) {
    write_checkpoint(*opts.out_dir / "ckpt_best", store, checkpoint_meta(cfg, ds, 0, 0));
    write_checkpoint(*opts.out_dir / "ckpt_last", store, checkpoint_meta(cfg, ds, 0, 0));
  }
  if (!ds.test.empty()) {
    const auto [user_emb, item_emb] = final_embeddings(result.store, base, cfg);
    result.test = eval::full_rank_evaluate(user_emb, item_emb, ds, eval::Split::test);
    for (const auto& j : eval::metrics_records(*result.test, result.best_epoch, eval::Split::test)) metrics_log.write(j);
  }
  return result;
}

}  // namespace cogcl::trainer
