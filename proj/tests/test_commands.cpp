#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "atex/batch.hpp"
#include "atex/commands.hpp"
#include "atex/errors.hpp"
#include "atex/metrics.hpp"
#include "atex/trainer.hpp"

using namespace atex;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = ATEX_FIXTURE_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("atex_cmd_" + std::to_string(std::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Small dimensions keep command-level runs fast.
void shrink(RunConfig& cfg) {
  cfg.set("word_dim", "24");
  cfg.set("pos_dim", "6");
  cfg.set("pe_dim", "8");
  cfg.set("hidden_dim", "12");
}

}  // namespace

TEST_SUITE_BEGIN("commands");

TEST_CASE("config files parse with overrides and reject junk") {
  TempDir tmp;
  spit(tmp.path / "run.cfg",
       "# experiment row\n"
       "position_mode = tree\n"
       "use_pos = true\n"
       "word_dim = 50\n"
       "learning_rate = 0.01\n"
       "optimizer = sgd\n"
       "seed = 9\n"
       "k = 4\n");
  RunConfig cfg = RunConfig::from_file(tmp.str("run.cfg"));
  CHECK(cfg.model.position_mode == PositionMode::tree);
  CHECK(cfg.model.word_dim == 50);
  CHECK(cfg.train.learning_rate == 0.01);
  CHECK(cfg.train.optimizer == Optimizer::sgd);
  CHECK(cfg.model.seed == 9);
  CHECK(cfg.train.seed == 9);
  CHECK(cfg.k == 4);

  cfg.set("position_mode", "none");
  CHECK(cfg.model.position_mode == PositionMode::none);
  CHECK_THROWS_AS(cfg.set("no_such_key", "1"), ArgumentError);
  CHECK_THROWS_AS(cfg.set("epochs", "many"), ArgumentError);

  spit(tmp.path / "bad.cfg", "word_dim 50\n");
  CHECK_THROWS_AS(RunConfig::from_file(tmp.str("bad.cfg")), ParseError);
}

TEST_CASE("validation rejects tree mode without parses, before any work") {
  TempDir tmp;
  RunConfig cfg;
  cfg.set("xml_train", kFixtures + "/synthetic50.xml");
  cfg.set("position_mode", "tree");
  cfg.set("use_pos", "false");
  cfg.out_dir = tmp.str("out");
  try {
    cfg.validate("train");
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("position_mode=tree") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(tmp.str("out")));

  cfg.set("conllu_train", kFixtures + "/synthetic50.conllu");
  CHECK_NOTHROW(cfg.validate("train"));

  RunConfig missing = cfg;
  missing.set("xml_train", tmp.str("absent.xml"));
  CHECK_THROWS_AS(missing.validate("train"), ArgumentError);
}

TEST_CASE("ingest joins trees and reports counts deterministically") {
  TempDir tmp;
  RunConfig cfg;
  cfg.set("xml_train", kFixtures + "/multi.xml");
  cfg.set("conllu_train", kFixtures + "/multi.conllu");
  cfg.out_dir = tmp.str("out");
  REQUIRE(cmd_ingest(cfg) == 0);

  const json report = json::parse(slurp(tmp.path / "out" / "ingest_report.json"));
  CHECK(report["train"]["reviews"] == 3);
  CHECK(report["train"]["sentences"] == 5);
  CHECK(report["train"]["opinions"] == 5);
  CHECK(report["train"]["null_opinions"] == 1);
  CHECK(report["train"]["labeled_spans"] == 4);

  const Dataset data = read_dataset_jsonl_file(tmp.str("out/train.jsonl"));
  REQUIRE(data.size() == 5);
  CHECK(data[0].sentence_id == "m1:1");
  CHECK(data[0].tokens.size() == 5);          // whitespace tokens, punct attached
  CHECK(data[0].labels[0] == Label::B);       // "servis"
  CHECK(data[0].upos[0] == "NOUN");
  CHECK(data[0].upos[4] == "ADJ");            // "küçük." takes the non-PUNCT tag
  CHECK(data[4].labels == std::vector<Label>{Label::B, Label::I, Label::I, Label::O});

  // Uncased by default.
  CHECK(data[0].tokens[0] == "servis");

  const std::string first = slurp(tmp.path / "out" / "train.jsonl");
  REQUIRE(cmd_ingest(cfg) == 0);
  CHECK(slurp(tmp.path / "out" / "train.jsonl") == first);  // byte-identical rerun
}

TEST_CASE("ingest errors when parses cannot be joined") {
  TempDir tmp;
  spit(tmp.path / "extra.conllu",
       "# sent_id = nomatch\n1\tbir\t_\tDET\t_\t_\t0\troot\t_\t_\n");
  RunConfig cfg;
  cfg.set("xml_train", kFixtures + "/multi.xml");
  cfg.set("conllu_train", tmp.str("extra.conllu"));
  cfg.out_dir = tmp.str("out");
  try {
    cmd_ingest(cfg);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(std::string(e.what()).find("m1:1") != std::string::npos);
  }
}

TEST_CASE("dataset JSONL round trips") {
  TempDir tmp;
  IngestStats stats;
  const Dataset data = ingest_files(kFixtures + "/synthetic50.xml",
                                    kFixtures + "/synthetic50.conllu", true, &stats);
  CHECK(stats.sentences == 50);
  write_dataset_jsonl_file(data, tmp.str("d.jsonl"));
  const Dataset back = read_dataset_jsonl_file(tmp.str("d.jsonl"));
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].sentence_id == data[i].sentence_id);
    CHECK(back[i].tokens == data[i].tokens);
    CHECK(back[i].labels == data[i].labels);
    CHECK(back[i].upos == data[i].upos);
    CHECK(back[i].levels == data[i].levels);
  }
}

TEST_CASE("train, eval and predict agree end to end") {
  TempDir tmp;

  RunConfig cfg;
  cfg.set("xml_train", kFixtures + "/multi.xml");
  cfg.set("conllu_train", kFixtures + "/multi.conllu");
  cfg.out_dir = tmp.str("out");
  shrink(cfg);
  cfg.set("epochs", "150");
  cfg.set("seed", "11");
  REQUIRE(cmd_train(cfg) == 0);
  const fs::path ckpt = tmp.path / "out" / "model.ckpt";
  REQUIRE(fs::exists(ckpt));
  const json history = json::parse(slurp(tmp.path / "out" / "history.json"));
  CHECK(history["history"].size() == 150);

  // Evaluate the overfit model on its own training fixture.
  RunConfig ecfg;
  ecfg.set("checkpoint", ckpt.string());
  ecfg.set("xml_test", kFixtures + "/multi.xml");
  ecfg.set("conllu_test", kFixtures + "/multi.conllu");
  ecfg.out_dir = tmp.str("eval");
  REQUIRE(cmd_eval(ecfg) == 0);
  const json report = json::parse(slurp(tmp.path / "eval" / "eval_report.json"));
  CHECK(report["weighted_f1"].get<double>() >= 0.95);

  // Predictions over the same data reproduce the eval report.
  IngestStats stats;
  const Dataset data =
      ingest_files(kFixtures + "/multi.xml", kFixtures + "/multi.conllu", true, &stats);
  write_dataset_jsonl_file(data, tmp.str("data.jsonl"));
  RunConfig pcfg;
  pcfg.set("checkpoint", ckpt.string());
  pcfg.set("data_test", tmp.str("data.jsonl"));
  pcfg.out_dir = tmp.str("pred");
  REQUIRE(cmd_predict(pcfg) == 0);

  std::vector<LabeledSequence> gold, pred;
  std::istringstream lines(slurp(tmp.path / "pred" / "predictions.jsonl"));
  std::string line;
  std::size_t idx = 0;
  while (std::getline(lines, line)) {
    REQUIRE(idx < data.size());
    const json j = json::parse(line);
    LabeledSequence p;
    p.sentence_id = j["sentence_id"];
    p.tokens = j["tokens"].get<std::vector<std::string>>();
    for (const auto& l : j["labels"]) {
      p.labels.push_back(label_from_string(l.get<std::string>()));
    }
    gold.push_back(data[idx].to_labeled());
    pred.push_back(std::move(p));
    ++idx;
  }
  REQUIRE(idx == data.size());
  const LabelReport manual = token_prf(gold, pred);
  CHECK(manual.weighted_f1 == doctest::Approx(report["weighted_f1"].get<double>()));
}

TEST_CASE("predict extracts spans from raw text lines") {
  TempDir tmp;

  // Train a tiny model on a fixture containing the target sentence.
  spit(tmp.path / "train.xml",
       "<Reviews><Review rid=\"p\"><sentences>"
       "<sentence id=\"p:0\"><text>lokumu tavsiye ederim.</text><Opinions>"
       "<Opinion target=\"lokumu\" category=\"FOOD#QUALITY\" polarity=\"positive\" "
       "from=\"0\" to=\"6\"/></Opinions></sentence>"
       "<sentence id=\"p:1\"><text>kahve güzeldi ama pahalı.</text><Opinions>"
       "<Opinion target=\"kahve\" category=\"DRINKS#QUALITY\" polarity=\"positive\" "
       "from=\"0\" to=\"5\"/></Opinions></sentence>"
       "</sentences></Review></Reviews>");

  RunConfig cfg;
  cfg.set("xml_train", tmp.str("train.xml"));
  cfg.set("use_pos", "false");
  cfg.out_dir = tmp.str("out");
  shrink(cfg);
  cfg.set("epochs", "120");
  REQUIRE(cmd_train(cfg) == 0);

  spit(tmp.path / "lines.txt", "lokumu tavsiye ederim.\n");
  RunConfig pcfg;
  pcfg.set("checkpoint", tmp.str("out/model.ckpt"));
  pcfg.set("text", tmp.str("lines.txt"));
  pcfg.out_dir = tmp.str("pred");
  REQUIRE(cmd_predict(pcfg) == 0);

  const json j = json::parse(slurp(tmp.path / "pred" / "predictions.jsonl"));
  CHECK(j["sentence_id"] == "line-1");
  REQUIRE(j["spans"].size() == 1);
  CHECK(j["spans"][0]["text"] == "lokumu");
  CHECK(j["spans"][0]["start"] == 0);
  CHECK(j["spans"][0]["end"] == 1);
}

TEST_CASE("kfold writes per-fold reports and an exact mean") {
  TempDir tmp;
  RunConfig cfg;
  cfg.set("xml_train", kFixtures + "/synthetic50.xml");
  cfg.set("conllu_train", kFixtures + "/synthetic50.conllu");
  cfg.out_dir = tmp.str("out");
  shrink(cfg);
  cfg.set("epochs", "8");
  cfg.set("k", "5");
  cfg.set("jobs", "2");
  REQUIRE(cmd_kfold(cfg) == 0);

  const json summary = json::parse(slurp(tmp.path / "out" / "kfold_summary.json"));
  REQUIRE(summary["folds"].size() == 5);
  CHECK(summary["split_level"] == "review");
  double mean = 0;
  for (const auto& fold : summary["folds"]) {
    mean += fold["weighted_f1"].get<double>();
  }
  mean /= 5;
  CHECK(summary["mean_weighted_f1"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
  for (int f = 0; f < 5; ++f) {
    CHECK(fs::exists(tmp.path / "out" / ("fold_" + std::to_string(f)) / "report.json"));
  }

  // Re-running with one worker produces the same summary.
  RunConfig serial_cfg = cfg;
  serial_cfg.out_dir = tmp.str("serial");
  serial_cfg.set("jobs", "1");
  REQUIRE(cmd_kfold(serial_cfg) == 0);
  CHECK(slurp(tmp.path / "serial" / "kfold_summary.json") ==
        slurp(tmp.path / "out" / "kfold_summary.json"));
}

TEST_CASE("gradcheck command passes") {
  RunConfig cfg;
  cfg.set("position_mode", "tree");
  CHECK(cmd_gradcheck(cfg) == 0);
}

TEST_SUITE_END();
