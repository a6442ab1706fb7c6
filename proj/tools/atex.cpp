// atex — aspect term extraction over review corpora.
//
// Subcommands: ingest, train, eval, kfold, predict, gradcheck. Options come
// from a key = value config file, overridable per flag; see README.md.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "atex/commands.hpp"
#include "atex/errors.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // raw key=value pairs
  std::string out_dir;
  std::string seed;
  std::string jobs;
};

void add_common(CLI::App* cmd, CliOptions* opts) {
  cmd->add_option("--config", opts->config_path, "key = value config file");
  cmd->add_option("--set", opts->overrides, "override a config key (key=value), repeatable");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--seed", opts->seed, "seed override");
  cmd->add_option("--jobs", opts->jobs, "parallel worker slots");
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const atex::ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const atex::OverlapError*>(&e)) return "overlap_error";
  if (dynamic_cast<const atex::ValidationError*>(&e)) return "validation_error";
  if (dynamic_cast<const atex::AlignmentError*>(&e)) return "alignment_error";
  if (dynamic_cast<const atex::ArgumentError*>(&e)) return "argument_error";
  if (dynamic_cast<const atex::CheckpointError*>(&e)) return "checkpoint_error";
  if (dynamic_cast<const atex::TrainError*>(&e)) return "train_error";
  if (dynamic_cast<const atex::IoError*>(&e)) return "io_error";
  return "error";
}

atex::RunConfig assemble(const CliOptions& opts,
                         const std::vector<std::pair<std::string, std::string>>& path_flags) {
  atex::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = atex::RunConfig::from_file(opts.config_path);
  for (const auto& [key, value] : path_flags) {
    if (!value.empty()) cfg.set(key, value);
  }
  for (const std::string& kv : opts.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw atex::ArgumentError("--set expects key=value, got \"" + kv + "\"");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.out_dir.empty()) cfg.set("out_dir", opts.out_dir);
  if (!opts.seed.empty()) cfg.set("seed", opts.seed);
  if (!opts.jobs.empty()) cfg.set("jobs", opts.jobs);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspect term extraction toolkit"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string xml, conllu, xml_test, conllu_test, data, data_test, vectors, contextual,
      checkpoint, text;

  CLI::App* ingest = app.add_subcommand("ingest", "XML (+ CoNLL-U) to a JSONL dataset");
  add_common(ingest, &opts);
  ingest->add_option("--xml", xml, "training/review XML file");
  ingest->add_option("--conllu", conllu, "dependency parses for --xml");
  ingest->add_option("--xml-test", xml_test, "test split XML file");
  ingest->add_option("--conllu-test", conllu_test, "dependency parses for --xml-test");

  CLI::App* train = app.add_subcommand("train", "train a tagger and write a checkpoint");
  add_common(train, &opts);
  train->add_option("--xml", xml, "training XML file");
  train->add_option("--conllu", conllu, "dependency parses for --xml");
  train->add_option("--data", data, "pre-ingested training dataset (JSONL)");
  train->add_option("--vectors", vectors, "pretrained word vectors");
  train->add_option("--contextual", contextual, "frozen contextual vectors (JSONL)");
  train->add_option("--checkpoint", checkpoint, "checkpoint output path");

  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  add_common(eval, &opts);
  eval->add_option("--checkpoint", checkpoint, "checkpoint to evaluate")->required();
  eval->add_option("--data", data_test, "evaluation dataset (JSONL)");
  eval->add_option("--xml", xml_test, "evaluation XML file");
  eval->add_option("--conllu", conllu_test, "dependency parses for --xml");
  eval->add_option("--contextual", contextual, "frozen contextual vectors (JSONL)");

  CLI::App* kfold = app.add_subcommand("kfold", "k-fold cross-validation");
  add_common(kfold, &opts);
  kfold->add_option("--xml", xml, "corpus XML file");
  kfold->add_option("--conllu", conllu, "dependency parses for --xml");
  kfold->add_option("--vectors", vectors, "pretrained word vectors");
  kfold->add_option("--contextual", contextual, "frozen contextual vectors (JSONL)");

  CLI::App* predict = app.add_subcommand("predict", "label new sentences");
  add_common(predict, &opts);
  predict->add_option("--checkpoint", checkpoint, "checkpoint to run")->required();
  predict->add_option("--data", data_test, "dataset to label (JSONL)");
  predict->add_option("--text", text, "raw sentences, one per line");
  predict->add_option("--conllu", conllu_test, "dependency parses for --text");
  predict->add_option("--contextual", contextual, "frozen contextual vectors (JSONL)");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(gradcheck, &opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::vector<std::pair<std::string, std::string>> path_flags = {
        {"xml_train", xml},         {"conllu_train", conllu},
        {"xml_test", xml_test},     {"conllu_test", conllu_test},
        {"data_train", data},       {"data_test", data_test},
        {"vectors", vectors},       {"contextual", contextual},
        {"checkpoint", checkpoint}, {"text", text}};
    const atex::RunConfig cfg = assemble(opts, path_flags);

    if (ingest->parsed()) return atex::cmd_ingest(cfg);
    if (train->parsed()) return atex::cmd_train(cfg);
    if (eval->parsed()) return atex::cmd_eval(cfg);
    if (kfold->parsed()) return atex::cmd_kfold(cfg);
    if (predict->parsed()) return atex::cmd_predict(cfg);
    if (gradcheck->parsed()) return atex::cmd_gradcheck(cfg);
    return 1;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
