#include "atex/commands.hpp"

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

#include "atex/batch.hpp"
#include "atex/errors.hpp"
#include "atex/metrics.hpp"
#include "atex/parallel.hpp"
#include "atex/trainer.hpp"
#include "atex/utf8.hpp"

namespace atex {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

ordered_json stats_to_json(const IngestStats& stats) {
  ordered_json j;
  j["reviews"] = stats.reviews;
  j["sentences"] = stats.sentences;
  j["tokens"] = stats.tokens;
  j["opinions"] = stats.opinions;
  j["null_opinions"] = stats.null_opinions;
  j["labeled_spans"] = stats.labeled_spans;
  ordered_json drops = ordered_json::array();
  for (const OverlapWarning& w : stats.dropped_overlaps) {
    drops.push_back({{"sentence_id", w.sentence_id}, {"kept", w.kept}, {"dropped", w.dropped}});
  }
  j["dropped_overlaps"] = drops;
  return j;
}

ordered_json report_to_json(const LabelReport& report) {
  ordered_json j;
  ordered_json per;
  for (int l = 0; l < kNumLabels; ++l) {
    const LabelStats& s = report.per_label[static_cast<std::size_t>(l)];
    per[std::string(1, label_char(static_cast<Label>(l)))] = {
        {"tp", s.tp},       {"fp", s.fp},           {"fn", s.fn},
        {"support", s.support}, {"precision", s.precision}, {"recall", s.recall},
        {"f1", s.f1}};
  }
  j["per_label"] = per;
  j["macro_f1_all"] = report.macro_f1_all;
  j["macro_f1_bi"] = report.macro_f1_bi;
  j["weighted_f1"] = report.weighted_f1;
  j["total_tokens"] = report.total_tokens;
  return j;
}

ordered_json span_to_json(const SpanScore& s) {
  return {{"tp", s.tp},         {"gold", s.gold_count},   {"pred", s.pred_count},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

ordered_json history_to_json(const TrainResult& result) {
  ordered_json arr = ordered_json::array();
  for (const EpochStats& e : result.history) {
    ordered_json j;
    j["epoch"] = e.epoch;
    j["mean_loss"] = e.mean_loss;
    if (e.dev_weighted_f1 >= 0) j["dev_weighted_f1"] = e.dev_weighted_f1;
    arr.push_back(j);
  }
  ordered_json out;
  out["epochs_run"] = result.history.size();
  out["best_epoch"] = result.best_epoch;
  out["history"] = arr;
  return out;
}

// Loads whichever of dataset JSONL / XML(+CoNLL-U) the config provides.
Dataset load_split(const std::string& data_path, const std::string& xml_path,
                   const std::string& conllu_path, bool uncased, IngestStats* stats) {
  if (!data_path.empty()) return read_dataset_jsonl_file(data_path);
  return ingest_files(xml_path, conllu_path, uncased, stats);
}

TaggerModel build_model_for(const RunConfig& cfg, const Dataset& train_data,
                            const ContextualStore* contextual) {
  ModelConfig mcfg = cfg.model;
  switch (mcfg.word_source) {
    case WordSource::random:
      return build_model(mcfg, collect_vocab(train_data));
    case WordSource::pretrained: {
      const EmbeddingTable table = load_word_vectors_file(cfg.vectors);
      return build_model(mcfg, {}, &table);
    }
    case WordSource::contextual:
      if (contextual == nullptr) throw ArgumentError("contextual store missing");
      mcfg.word_dim = contextual->dim;
      return build_model(mcfg, {});
  }
  throw ArgumentError("unreachable word source");
}

}  // namespace

std::vector<const DepTree*> join_trees(const Corpus& corpus,
                                       const std::vector<DepTree>& trees) {
  std::unordered_map<std::string, const DepTree*> by_id;
  for (const DepTree& t : trees) by_id.emplace(t.sentence_id, &t);

  std::vector<const DepTree*> out;
  bool all_by_id = true;
  for (const Review& r : corpus.reviews) {
    for (const Sentence& s : r.sentences) {
      auto it = by_id.find(s.id);
      if (it == by_id.end()) {
        all_by_id = false;
        break;
      }
      out.push_back(it->second);
    }
    if (!all_by_id) break;
  }
  if (all_by_id && out.size() == corpus.sentence_count()) return out;

  // Fall back to document order; then the counts must agree exactly.
  if (trees.size() != corpus.sentence_count()) {
    std::string first_missing;
    for (const Review& r : corpus.reviews) {
      for (const Sentence& s : r.sentences) {
        if (by_id.find(s.id) == by_id.end()) {
          first_missing = s.id;
          break;
        }
      }
      if (!first_missing.empty()) break;
    }
    throw AlignmentError("cannot join parses: " + std::to_string(trees.size()) +
                         " trees for " + std::to_string(corpus.sentence_count()) +
                         " sentences and sentence id \"" + first_missing +
                         "\" has no tree");
  }
  out.clear();
  for (std::size_t i = 0; i < trees.size(); ++i) out.push_back(&trees[i]);
  return out;
}

Dataset build_dataset(const Corpus& corpus, const std::vector<DepTree>* trees,
                      IngestStats* stats) {
  std::vector<const DepTree*> joined;
  if (trees != nullptr) joined = join_trees(corpus, *trees);

  Dataset data;
  std::size_t sentence_index = 0;
  for (const Review& review : corpus.reviews) {
    if (stats != nullptr) ++stats->reviews;
    for (const Sentence& raw_sentence : review.sentences) {
      auto [tokens, spans] = whitespace_tokenize(raw_sentence.text);
      std::vector<OverlapWarning> local_warnings;
      const Sentence sentence = resolve_overlaps(
          raw_sentence, stats != nullptr ? &stats->dropped_overlaps : &local_warnings);
      const LabeledSequence seq = to_bio(sentence, tokens, spans);

      DataSentence ds;
      ds.sentence_id = sentence.id;
      ds.tokens = seq.tokens;
      ds.labels = seq.labels;
      if (trees != nullptr) {
        const DepTree& tree = *joined[sentence_index];
        const auto alignment = align_tokens(tokens, tree);
        const auto levels = level_indices(tree);
        const auto annotations = annotate_tokens(alignment, tree, levels);
        for (const TokenAnnotation& a : annotations) {
          ds.upos.push_back(a.upos);
          ds.levels.push_back(a.level);
        }
      }
      if (stats != nullptr) {
        ++stats->sentences;
        stats->tokens += static_cast<long>(ds.tokens.size());
        stats->opinions += static_cast<long>(raw_sentence.opinions.size());
        for (const Opinion& op : raw_sentence.opinions) {
          if (op.spanless()) ++stats->null_opinions;
        }
        for (const Opinion& op : sentence.opinions) {
          if (!op.spanless()) ++stats->labeled_spans;
        }
      }
      data.push_back(std::move(ds));
      ++sentence_index;
    }
  }
  return data;
}

Dataset ingest_files(const std::string& xml_path, const std::string& conllu_path,
                     bool uncased, IngestStats* stats) {
  Corpus corpus = parse_semeval_xml(read_file(xml_path));
  if (uncased) lowercase_corpus(corpus);
  if (conllu_path.empty()) return build_dataset(corpus, nullptr, stats);
  const std::vector<DepTree> trees = parse_conllu(read_file(conllu_path));
  return build_dataset(corpus, &trees, stats);
}

int cmd_ingest(const RunConfig& cfg) {
  cfg.validate("ingest");
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  ordered_json report;
  IngestStats train_stats;
  const Dataset train_data =
      ingest_files(cfg.xml_train, cfg.conllu_train, cfg.model.uncased, &train_stats);
  write_dataset_jsonl_file(train_data, (out_dir / "train.jsonl").string());
  report["train"] = stats_to_json(train_stats);

  if (!cfg.xml_test.empty()) {
    IngestStats test_stats;
    const Dataset test_data =
        ingest_files(cfg.xml_test, cfg.conllu_test, cfg.model.uncased, &test_stats);
    write_dataset_jsonl_file(test_data, (out_dir / "test.jsonl").string());
    report["test"] = stats_to_json(test_stats);
  }

  write_file(out_dir / "ingest_report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  cfg.validate("train");
  const fs::path out_dir(cfg.out_dir);

  ContextualStore store;
  const ContextualStore* ctx = nullptr;
  if (cfg.model.word_source == WordSource::contextual) {
    store = read_contextual_jsonl_file(cfg.contextual);
    ctx = &store;
  }

  const Dataset train_data =
      load_split(cfg.data_train, cfg.xml_train, cfg.conllu_train, cfg.model.uncased, nullptr);
  Dataset dev_data;
  if (!cfg.data_dev.empty()) dev_data = read_dataset_jsonl_file(cfg.data_dev);

  TaggerModel model = build_model_for(cfg, train_data, ctx);
  TrainResult result =
      train(train_data, dev_data.empty() ? nullptr : &dev_data, std::move(model), cfg.train, ctx);

  const fs::path ckpt_path =
      cfg.checkpoint.empty() ? out_dir / "model.ckpt" : fs::path(cfg.checkpoint);
  if (ckpt_path.has_parent_path()) fs::create_directories(ckpt_path.parent_path());
  save_checkpoint(result.model, ckpt_path);
  write_file(out_dir / "history.json", history_to_json(result).dump(2) + "\n");
  std::cout << "trained " << result.history.size() << " epochs, final mean loss "
            << result.history.back().mean_loss << ", checkpoint " << ckpt_path.string()
            << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  cfg.validate("eval");
  const fs::path out_dir(cfg.out_dir);

  const TaggerModel model = load_checkpoint(cfg.checkpoint);
  ContextualStore store;
  const ContextualStore* ctx = nullptr;
  if (model.config.word_source == WordSource::contextual) {
    if (cfg.contextual.empty()) {
      throw ArgumentError("checkpoint expects contextual vectors; set the contextual path");
    }
    store = read_contextual_jsonl_file(cfg.contextual);
    ctx = &store;
  }

  const Dataset data =
      load_split(cfg.data_test, cfg.xml_test, cfg.conllu_test, model.config.uncased, nullptr);
  const std::vector<Prediction> preds = predict_batch(model, data, ctx, cfg.jobs);

  std::vector<LabeledSequence> gold, pred;
  for (std::size_t i = 0; i < data.size(); ++i) {
    gold.push_back(data[i].to_labeled());
    pred.push_back({data[i].sentence_id, data[i].tokens, preds[i].labels});
  }
  const LabelReport report = token_prf(gold, pred);

  ordered_json j = report_to_json(report);
  j["span"] = span_to_json(span_exact_match(gold, pred));
  write_file(out_dir / "eval_report.json", j.dump(2) + "\n");
  std::cout << report_to_table(report);
  return 0;
}

int cmd_kfold(const RunConfig& cfg) {
  cfg.validate("kfold");
  const fs::path out_dir(cfg.out_dir);

  Corpus corpus = parse_semeval_xml(read_file(cfg.xml_train));
  if (cfg.model.uncased) lowercase_corpus(corpus);
  std::vector<DepTree> trees;
  if (!cfg.conllu_train.empty()) trees = parse_conllu(read_file(cfg.conllu_train));

  // Annotate every sentence once, then slice per fold by sentence id.
  const Dataset full_data =
      build_dataset(corpus, cfg.conllu_train.empty() ? nullptr : &trees, nullptr);
  std::unordered_map<std::string, const DataSentence*> by_id;
  for (const DataSentence& s : full_data) by_id.emplace(s.sentence_id, &s);
  const auto slice = [&](const Corpus& part) {
    Dataset out;
    for (const Review& r : part.reviews) {
      for (const Sentence& s : r.sentences) out.push_back(*by_id.at(s.id));
    }
    return out;
  };

  ContextualStore store;
  const ContextualStore* ctx = nullptr;
  if (cfg.model.word_source == WordSource::contextual) {
    store = read_contextual_jsonl_file(cfg.contextual);
    ctx = &store;
  }

  const auto folds = kfold_split(corpus, cfg.k, cfg.train.seed);
  std::vector<LabelReport> reports(folds.size());
  ExceptionCollector errors;
#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs)
  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(folds.size()); ++f) {
    errors.run([&, f] {
      const auto fold = static_cast<std::size_t>(f);
      const Dataset fold_train = slice(folds[fold].first);
      const Dataset fold_test = slice(folds[fold].second);

      RunConfig fold_cfg = cfg;
      fold_cfg.model.seed = cfg.model.seed + fold;  // independent fold initializations
      TrainConfig tcfg = cfg.train;
      tcfg.seed = cfg.train.seed + fold;

      TaggerModel model = build_model_for(fold_cfg, fold_train, ctx);
      TrainResult result = train(fold_train, nullptr, std::move(model), tcfg, ctx);
      reports[fold] = evaluate(result.model, fold_test, ctx, /*jobs=*/1);
    });
  }
  errors.rethrow();

  double mean = 0;
  for (const LabelReport& r : reports) mean += r.weighted_f1;
  mean /= static_cast<double>(reports.size());
  double var = 0;
  for (const LabelReport& r : reports) {
    var += (r.weighted_f1 - mean) * (r.weighted_f1 - mean);
  }
  var /= static_cast<double>(reports.size());

  ordered_json summary;
  summary["k"] = cfg.k;
  summary["split_level"] = "review";
  ordered_json fold_reports = ordered_json::array();
  for (std::size_t f = 0; f < reports.size(); ++f) {
    ordered_json fj = report_to_json(reports[f]);
    write_file(out_dir / ("fold_" + std::to_string(f)) / "report.json", fj.dump(2) + "\n");
    fold_reports.push_back(fj);
  }
  summary["folds"] = fold_reports;
  summary["mean_weighted_f1"] = mean;
  summary["stddev_weighted_f1"] = std::sqrt(var);
  write_file(out_dir / "kfold_summary.json", summary.dump(2) + "\n");
  std::cout << "k=" << cfg.k << " mean weighted F1 " << mean << " (stddev "
            << std::sqrt(var) << ")\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  cfg.validate("predict");
  const fs::path out_dir(cfg.out_dir);

  const TaggerModel model = load_checkpoint(cfg.checkpoint);
  ContextualStore store;
  const ContextualStore* ctx = nullptr;
  if (model.config.word_source == WordSource::contextual) {
    if (cfg.contextual.empty()) {
      throw ArgumentError("checkpoint expects contextual vectors; set the contextual path");
    }
    store = read_contextual_jsonl_file(cfg.contextual);
    ctx = &store;
  }

  Dataset data;
  if (!cfg.data_test.empty()) {
    data = read_dataset_jsonl_file(cfg.data_test);
  } else {
    // Raw sentences, one per line; labels are placeholders.
    const std::string content = read_file(cfg.text);
    std::istringstream in(content);
    std::vector<DepTree> trees;
    if (!cfg.conllu_test.empty()) trees = parse_conllu(read_file(cfg.conllu_test));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      DataSentence s;
      s.sentence_id = "line-" + std::to_string(line_no);
      const std::string text = model.config.uncased ? utf8::lower(line) : line;
      auto [tokens, spans] = whitespace_tokenize(text);
      s.tokens = std::move(tokens);
      s.labels.assign(s.tokens.size(), Label::O);
      data.push_back(std::move(s));
    }
    if (!trees.empty()) {
      if (trees.size() != data.size()) {
        throw AlignmentError("predict: " + std::to_string(trees.size()) + " trees for " +
                             std::to_string(data.size()) + " text lines");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto alignment = align_tokens(data[i].tokens, trees[i]);
        const auto levels = level_indices(trees[i]);
        for (const TokenAnnotation& a : annotate_tokens(alignment, trees[i], levels)) {
          data[i].upos.push_back(a.upos);
          data[i].levels.push_back(a.level);
        }
      }
    }
  }

  const std::vector<Prediction> preds = predict_batch(model, data, ctx, cfg.jobs);

  std::string out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<Label> repaired = repair_bio(preds[i].labels);
    ordered_json j;
    j["sentence_id"] = data[i].sentence_id;
    j["tokens"] = data[i].tokens;
    std::vector<std::string> labels;
    for (Label l : preds[i].labels) labels.emplace_back(1, label_char(l));
    j["labels"] = labels;
    ordered_json spans = ordered_json::array();
    for (const auto& [start, end] : extract_spans(repaired)) {
      std::string text;
      for (int t = start; t < end; ++t) {
        if (t > start) text += ' ';
        text += data[i].tokens[static_cast<std::size_t>(t)];
      }
      spans.push_back({{"start", start}, {"end", end}, {"text", text}});
    }
    j["spans"] = spans;
    out += j.dump() + "\n";
  }
  write_file(out_dir / "predictions.jsonl", out);
  std::cout << out;
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
  cfg.validate("gradcheck");

  // A small instance is enough to exercise every switch in the config.
  ModelConfig mcfg = cfg.model;
  mcfg.word_dim = 6;
  mcfg.pos_dim = 3;
  mcfg.pe_dim = 4;
  mcfg.hidden_dim = 3;
  if (mcfg.word_source == WordSource::contextual) mcfg.word_source = WordSource::random;

  DataSentence sentence;
  sentence.sentence_id = "gradcheck";
  sentence.tokens = {"iyi", "bir", "yer", "burası"};
  sentence.labels = {Label::O, Label::O, Label::B, Label::O};
  sentence.upos = {"ADJ", "DET", "NOUN", "PRON"};
  sentence.levels = {1, 0, 2, 1};

  const TaggerModel model = build_model(mcfg, collect_vocab({sentence}));
  const double eps = 1e-5;
  const double err = full_gradient_check(model, sentence, eps);

  ordered_json j;
  j["eps"] = eps;
  j["max_rel_error"] = err;
  j["pass"] = err <= 1e-4;
  std::cout << j.dump(2) << "\n";
  return err <= 1e-4 ? 0 : 1;
}

}  // namespace atex
