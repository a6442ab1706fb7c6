#pragma once

#include <string>
#include <vector>

#include "atex/model.hpp"
#include "atex/trainer.hpp"

namespace atex {

// Declarative run configuration: a key = value text file plus command-line
// overrides. Every experiment row (word/POS switches, position mode,
// embedding initialization) is expressible as one file.
struct RunConfig {
  // Input and output paths. Empty string = not set.
  std::string xml_train;
  std::string xml_test;
  std::string conllu_train;
  std::string conllu_test;
  std::string data_train;  // pre-ingested JSONL alternatives to the XML inputs
  std::string data_test;
  std::string data_dev;
  std::string vectors;     // pretrained word vectors
  std::string contextual;  // frozen contextual vectors (JSONL)
  std::string checkpoint;
  std::string text;  // raw sentences for predict, one per line
  std::string out_dir = ".";

  ModelConfig model;
  TrainConfig train;
  int k = 5;
  int jobs = 1;

  static RunConfig from_file(const std::string& path);

  // Applies one "key=value" pair; unknown keys raise ArgumentError.
  void set(const std::string& key, const std::string& value);

  // Pre-flight checks for one subcommand ("ingest", "train", ...). Verifies
  // that referenced inputs exist and that the switch combination is usable
  // before any work begins.
  void validate(const std::string& command) const;
};

}  // namespace atex
