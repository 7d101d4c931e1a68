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

#include "cogcl/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cogcl/checkpoint.hpp"

namespace cogcl::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    bool quoted = false;
    for (std::size_t k = 0; k < body.size(); ++k) {
      if (body[k] == '"') quoted = !quoted;
      if (body[k] == '#' && !quoted) {
        body.resize(k);
        break;
      }
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("{}:{}: expected 'key = value', got '{}'", origin, lineno, body));
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw UsageError(fmt::format("{}:{}: empty key", origin, lineno));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

trainer::TrainConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& file_items,
                                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  trainer::TrainConfig cfg;
  for (const auto& [k, v] : file_items) trainer::set_config_item(cfg, k, v);
  for (const auto& [k, v] : overrides) trainer::set_config_item(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::string render_config(const trainer::TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : trainer::config_items(cfg)) {
    const bool text = k == "mode" || k == "scheme" || k == "aug_grad_stop" || k == "sim_grad_stop";
    out += text ? fmt::format("{} = \"{}\"\n", k, v) : fmt::format("{} = {}\n", k, v);
  }
  return out;
}

void apply_variant(trainer::TrainConfig& cfg, const std::string& variant) {
  using compute::GradStop;
  if (variant == "wo_A") {
    cfg.aug_stop = cfg.sim_stop = GradStop::no_alignment;
  } else if (variant == "wo_U") {
    cfg.aug_stop = cfg.sim_stop = GradStop::no_uniformity;
  } else if (variant == "wo_AA") {
    cfg.aug_stop = GradStop::no_alignment;
  } else if (variant == "wo_AU") {
    cfg.aug_stop = GradStop::no_uniformity;
  } else if (variant == "wo_SA") {
    cfg.sim_stop = GradStop::no_alignment;
  } else if (variant == "wo_SU") {
    cfg.sim_stop = GradStop::no_uniformity;
  } else {
    throw UsageError("unknown variant '" + variant + "' (expected wo_A, wo_U, wo_AA, wo_AU, wo_SA or wo_SU)");
  }
}

namespace {

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(fmt::format("{} '{}' does not exist", what, p.string()));
}

struct LoadedModel {
  data::InteractionDataset ds;
  trainer::TrainConfig cfg;
  compute::ParameterStore<float> store;
  graph::CsrGraph base;
};

LoadedModel load_model(const fs::path& data_dir, const fs::path& ckpt_path) {
  require_exists(data_dir, "dataset directory");
  require_exists(ckpt_path, "checkpoint");
  LoadedModel m;
  m.ds = data::load_dataset(data_dir);
  Checkpoint ck = read_checkpoint(ckpt_path);
  if (!ck.meta.contains("config")) throw FormatError("checkpoint " + ckpt_path.string() + " carries no config");
  m.cfg = trainer::config_from_json(ck.meta.at("config"));
  if (ck.meta.value("num_users", -1) != m.ds.num_users || ck.meta.value("num_items", -1) != m.ds.num_items)
    throw FormatError(fmt::format("checkpoint was trained on {} users x {} items, dataset has {} x {}",
                                  ck.meta.value("num_users", -1), ck.meta.value("num_items", -1), m.ds.num_users,
                                  m.ds.num_items));
  m.store = std::move(ck.store);
  m.base = graph::build_base_graph(m.ds);
  return m;
}

void write_matrix_tsv(const fs::path& path, const Mat<float>& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << '\t' << fmt::format("{}", m(r, c));
    out << '\n';
  }
}

void write_codes_tsv(const fs::path& path, const IndexMat& codes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < codes.rows(); ++r) {
    out << r;
    for (Eigen::Index h = 0; h < codes.cols(); ++h) out << '\t' << codes(r, h);
    out << '\n';
  }
}

void print_metrics(const std::vector<nlohmann::json>& records, std::ostream* also = nullptr) {
  for (const auto& j : records) {
    std::cout << j.dump() << '\n';
    if (also) *also << j.dump() << '\n';
  }
}

/// Adds `--<key>` for every config key; values land in `store`.
void add_config_flags(CLI::App* sub, std::map<std::string, std::string>& store) {
  for (const auto& [key, value] : trainer::config_items(trainer::TrainConfig{}))
    sub->add_option("--" + key, store[key], fmt::format("config override (default {})", value));
}

std::vector<std::pair<std::string, std::string>> collect_overrides(CLI::App* sub,
                                                                   const std::map<std::string, std::string>& store,
                                                                   const std::optional<std::uint64_t>& seed) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, value] : trainer::config_items(trainer::TrainConfig{}))
    if (sub->count("--" + key) > 0) out.emplace_back(key, store.at(key));
  if (seed) out.emplace_back("seed", std::to_string(*seed));
  return out;
}

trainer::TrainConfig config_for(const std::string& config_path, CLI::App* sub,
                                const std::map<std::string, std::string>& flags,
                                const std::optional<std::uint64_t>& seed) {
  std::vector<std::pair<std::string, std::string>> file_items;
  if (!config_path.empty()) file_items = read_config_file(config_path);
  return resolve_config(file_items, collect_overrides(sub, flags, seed));
}

void echo_config(const fs::path& dir, const trainer::TrainConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.toml");
  if (!out) throw IoError("cannot write " + (dir / "config.toml").string());
  out << render_config(cfg);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"cogcl: graph contrastive collaborative filtering with discrete codes"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "global random seed (overrides config files)");

  // prepare
  auto* prep = app.add_subcommand("prepare", "filter, split and persist a raw interaction log");
  std::string prep_input, prep_out, prep_format = "tsv";
  int k_core = 5;
  std::optional<int> k_user, k_item;
  double valid_ratio = 0.1, test_ratio = 0.1;
  prep->add_option("--input", prep_input, "raw interaction file")->required();
  prep->add_option("--out", prep_out, "output dataset directory")->required();
  prep->add_option("--format", prep_format, "tsv or csv");
  prep->add_option("--k-core", k_core, "minimum interactions per user and item");
  prep->add_option("--k-user", k_user, "user threshold (defaults to --k-core)");
  prep->add_option("--k-item", k_item, "item threshold (defaults to --k-core)");
  prep->add_option("--valid-ratio", valid_ratio);
  prep->add_option("--test-ratio", test_ratio);

  // train
  auto* tr = app.add_subcommand("train", "train a model and write checkpoints into a run directory");
  std::string tr_data, tr_out, tr_config;
  std::map<std::string, std::string> tr_flags;
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "run directory")->required();
  tr->add_option("--config", tr_config, "key = value config file");
  add_config_flags(tr, tr_flags);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "full-ranking evaluation of a checkpoint");
  std::string ev_data, ev_ckpt, ev_split = "test", ev_out;
  int ev_groups = 0;
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--split", ev_split, "valid or test");
  ev->add_option("--groups", ev_groups, "also report this many sparsity groups");
  ev->add_option("--out", ev_out, "append metrics JSON lines to this file");

  // exports
  auto* xe = app.add_subcommand("export-embeddings", "write base-view user/item representations as TSV");
  auto* xc = app.add_subcommand("export-codes", "write user/item discrete codes as TSV");
  std::string x_data, x_ckpt, x_out;
  for (auto* sub : {xe, xc}) {
    sub->add_option("--data", x_data)->required();
    sub->add_option("--checkpoint", x_ckpt)->required();
    sub->add_option("--out", x_out, "output directory")->required();
  }

  // analyze
  auto* an = app.add_subcommand("analyze", "train a gradient-stop variant next to the unmodified model");
  std::string an_data, an_out, an_config, an_variant;
  std::map<std::string, std::string> an_flags;
  an->add_option("--data", an_data)->required();
  an->add_option("--out", an_out)->required();
  an->add_option("--config", an_config);
  an->add_option("--variant", an_variant, "wo_A, wo_U, wo_AA, wo_AU, wo_SA or wo_SU")->required();
  add_config_flags(an, an_flags);

  // dump-graph
  auto* dg = app.add_subcommand("dump-graph", "write the base or an augmented graph as an edge list");
  std::string dg_data, dg_ckpt, dg_out, dg_view = "base";
  int dg_epoch = 1;
  dg->add_option("--data", dg_data)->required();
  dg->add_option("--out", dg_out, "output TSV file")->required();
  dg->add_option("--checkpoint", dg_ckpt, "needed for augmented views");
  dg->add_option("--view", dg_view, "base, aug1 or aug2");
  dg->add_option("--epoch", dg_epoch, "epoch stamp used to seed the augmentation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prep) {
      require_exists(prep_input, "input path");
      const auto raw = data::load_interactions(prep_input, data::parse_input_format(prep_format));
      const auto dedup = data::deduplicate(raw);
      const auto filtered = data::k_core_filter(dedup, k_user.value_or(k_core), k_item.value_or(k_core));
      data::SplitRatios ratios;
      ratios.valid = valid_ratio;
      ratios.test = test_ratio;
      ratios.train = 1.0 - valid_ratio - test_ratio;
      const auto ds = data::split_dataset(filtered, ratios, seed.value_or(2024));
      data::save_dataset(ds, prep_out);
      const auto st = data::dataset_stats(ds);
      std::cout << fmt::format("{:<24}{:>10}{:>10}{:>15}{:>12}\n", "dataset", "#users", "#items", "#interactions",
                               "sparsity");
      std::cout << fmt::format("{:<24}{:>10}{:>10}{:>15}{:>11.4f}%\n", fs::path(prep_out).filename().string(),
                               st.users, st.items, st.interactions, 100.0 * st.sparsity);
      std::cout << fmt::format("split: train {} / valid {} / test {}\n", ds.train.size(), ds.valid.size(), ds.test.size());
      return kExitOk;
    }
    if (*tr) {
      require_exists(tr_data, "dataset directory");
      const auto cfg = config_for(tr_config, tr, tr_flags, seed);
      const auto ds = data::load_dataset(tr_data);
      echo_config(tr_out, cfg);
      trainer::TrainOptions opts;
      opts.out_dir = fs::path(tr_out);
      opts.log_progress = true;
      const auto res = trainer::train(ds, cfg, opts);
      if (res.test) print_metrics(eval::metrics_records(*res.test, res.best_epoch, eval::Split::test));
      return kExitOk;
    }
    if (*ev) {
      const auto split = eval::parse_split(ev_split);
      const auto m = load_model(ev_data, ev_ckpt);
      const auto [users, items] = trainer::final_embeddings(m.store, m.base, m.cfg);
      const auto metrics = eval::full_rank_evaluate(users, items, m.ds, split);
      std::ofstream file;
      if (!ev_out.empty()) {
        file.open(ev_out, std::ios::app);
        if (!file) throw IoError("cannot write " + ev_out);
      }
      std::ostream* also = file.is_open() ? &file : nullptr;
      print_metrics(eval::metrics_records(metrics, 0, split), also);
      if (ev_groups > 0) print_metrics(eval::group_records(eval::sparsity_group_report(metrics, m.ds, ev_groups), 0, split), also);
      return kExitOk;
    }
    if (*xe) {
      const auto m = load_model(x_data, x_ckpt);
      const auto [users, items] = trainer::final_embeddings(m.store, m.base, m.cfg);
      fs::create_directories(x_out);
      write_matrix_tsv(fs::path(x_out) / "user_embeddings.tsv", users);
      write_matrix_tsv(fs::path(x_out) / "item_embeddings.tsv", items);
      return kExitOk;
    }
    if (*xc) {
      const auto m = load_model(x_data, x_ckpt);
      if (m.cfg.mode != trainer::Mode::cogcl) throw UsageError("checkpoint was trained without codes (baseline mode)");
      const auto codes = quantizer::refresh_codes(m.store, m.base, m.cfg.encoder(), m.cfg.quantizer(), 0);
      fs::create_directories(x_out);
      write_codes_tsv(fs::path(x_out) / "user_codes.tsv", codes.user_codes);
      write_codes_tsv(fs::path(x_out) / "item_codes.tsv", codes.item_codes);
      return kExitOk;
    }
    if (*an) {
      require_exists(an_data, "dataset directory");
      const auto base_cfg = config_for(an_config, an, an_flags, seed);
      auto variant_cfg = base_cfg;
      apply_variant(variant_cfg, an_variant);
      const auto ds = data::load_dataset(an_data);
      std::ofstream report;
      fs::create_directories(an_out);
      report.open(fs::path(an_out) / "analyze.jsonl");
      for (const auto& [name, cfg] : {std::pair{std::string("unmodified"), base_cfg}, std::pair{an_variant, variant_cfg}}) {
        const fs::path dir = fs::path(an_out) / name;
        echo_config(dir, cfg);
        trainer::TrainOptions opts;
        opts.out_dir = dir;
        opts.log_progress = true;
        const auto res = trainer::train(ds, cfg, opts);
        if (!res.test) continue;
        for (auto j : eval::metrics_records(*res.test, res.best_epoch, eval::Split::test)) {
          j["run"] = name;
          std::cout << j.dump() << '\n';
          report << j.dump() << '\n';
        }
      }
      return kExitOk;
    }
    if (*dg) {
      require_exists(dg_data, "dataset directory");
      std::ofstream out(dg_out);
      if (!out) throw IoError("cannot write " + dg_out);
      if (dg_view == "base") {
        graph::write_edge_tsv(graph::build_base_graph(data::load_dataset(dg_data)), out);
        return kExitOk;
      }
      if (dg_view != "aug1" && dg_view != "aug2") throw UsageError("unknown view '" + dg_view + "'");
      if (dg_ckpt.empty()) throw UsageError("augmented views need --checkpoint");
      auto m = load_model(dg_data, dg_ckpt);
      if (seed) m.cfg.seed = *seed;
      if (m.cfg.mode != trainer::Mode::cogcl) throw UsageError("checkpoint was trained without codes (baseline mode)");
      const auto art = trainer::prepare_epoch(m.store, m.ds, m.base, m.cfg, dg_epoch);
      graph::write_edge_tsv(dg_view == "aug1" ? art.pair.graph1 : art.pair.graph2, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("cogcl");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cogcl::cli
