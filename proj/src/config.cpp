#include "atex/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "atex/errors.hpp"

namespace atex {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ArgumentError("config key " + key + ": expected a boolean, got \"" + value + "\"");
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ArgumentError("config key " + key + ": expected an integer, got \"" + value + "\"");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ArgumentError("config key " + key + ": expected a number, got \"" + value + "\"");
  }
}

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw ArgumentError("config is missing the " + what + " path");
  if (!std::filesystem::exists(path)) {
    throw ArgumentError(what + " path does not exist: " + path);
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "expected key = value, got \"" + stripped + "\"");
    }
    try {
      cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    } catch (const ArgumentError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  // Paths.
  if (key == "xml_train") { xml_train = value; return; }
  if (key == "xml_test") { xml_test = value; return; }
  if (key == "conllu_train") { conllu_train = value; return; }
  if (key == "conllu_test") { conllu_test = value; return; }
  if (key == "data_train") { data_train = value; return; }
  if (key == "data_test") { data_test = value; return; }
  if (key == "data_dev") { data_dev = value; return; }
  if (key == "vectors") { vectors = value; return; }
  if (key == "contextual") { contextual = value; return; }
  if (key == "checkpoint") { checkpoint = value; return; }
  if (key == "text") { text = value; return; }
  if (key == "out_dir") { out_dir = value; return; }
  // Model switches and dimensions.
  if (key == "uncased") { model.uncased = parse_bool(key, value); return; }
  if (key == "use_pos") { model.use_pos = parse_bool(key, value); return; }
  if (key == "word_source" || key == "embedding_init") {
    model.word_source = word_source_from_string(value);
    return;
  }
  if (key == "position_mode") { model.position_mode = position_mode_from_string(value); return; }
  if (key == "word_dim") { model.word_dim = static_cast<int>(parse_long(key, value)); return; }
  if (key == "pos_dim") { model.pos_dim = static_cast<int>(parse_long(key, value)); return; }
  if (key == "pe_dim") { model.pe_dim = static_cast<int>(parse_long(key, value)); return; }
  if (key == "pe_constant") { model.pe_constant = parse_double(key, value); return; }
  if (key == "hidden_dim") { model.hidden_dim = static_cast<int>(parse_long(key, value)); return; }
  if (key == "forbid_oi") { model.forbid_oi = parse_bool(key, value); return; }
  // Training.
  if (key == "epochs") { train.epochs = static_cast<int>(parse_long(key, value)); return; }
  if (key == "learning_rate" || key == "lr") { train.learning_rate = parse_double(key, value); return; }
  if (key == "optimizer") { train.optimizer = optimizer_from_string(value); return; }
  if (key == "clip_norm") { train.clip_norm = parse_double(key, value); return; }
  if (key == "patience") { train.patience = static_cast<int>(parse_long(key, value)); return; }
  if (key == "shuffle") { train.shuffle = parse_bool(key, value); return; }
  // Shared.
  if (key == "seed") {
    const auto seed = static_cast<std::uint64_t>(parse_long(key, value));
    model.seed = seed;
    train.seed = seed;
    return;
  }
  if (key == "k") { k = static_cast<int>(parse_long(key, value)); return; }
  if (key == "jobs") { jobs = static_cast<int>(parse_long(key, value)); return; }
  throw ArgumentError("unknown config key \"" + key + "\"");
}

void RunConfig::validate(const std::string& command) const {
  if (model.word_dim <= 0 || model.hidden_dim <= 0) {
    throw ArgumentError("dimensions must be positive");
  }
  if (model.use_pos && model.pos_dim <= 0) throw ArgumentError("pos_dim must be positive");
  if (model.position_mode != PositionMode::none &&
      (model.pe_dim <= 0 || model.pe_dim % 2 != 0)) {
    throw ArgumentError("pe_dim must be a positive even number");
  }
  if (train.epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (train.learning_rate <= 0) throw ArgumentError("learning_rate must be positive");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");

  const bool train_from_xml = data_train.empty();
  const bool test_from_xml = data_test.empty();

  if (command == "ingest") {
    require_file("xml_train", xml_train);
    if (!conllu_train.empty()) require_file("conllu_train", conllu_train);
    if (!xml_test.empty()) require_file("xml_test", xml_test);
    if (!conllu_test.empty()) require_file("conllu_test", conllu_test);
    return;
  }
  if (command == "train") {
    if (train_from_xml) {
      require_file("xml_train", xml_train);
      if (model.position_mode == PositionMode::tree) {
        // Tree positional encoding is impossible without a dependency parse.
        require_file("conllu_train (required by position_mode=tree)", conllu_train);
      }
      if (model.use_pos) {
        require_file("conllu_train (required by use_pos=true)", conllu_train);
      }
    } else {
      require_file("data_train", data_train);
    }
    if (!data_dev.empty()) require_file("data_dev", data_dev);
    if (model.word_source == WordSource::pretrained) require_file("vectors", vectors);
    if (model.word_source == WordSource::contextual) require_file("contextual", contextual);
    return;
  }
  if (command == "eval") {
    require_file("checkpoint", checkpoint);
    if (test_from_xml) {
      require_file("xml_test", xml_test);
    } else {
      require_file("data_test", data_test);
    }
    return;
  }
  if (command == "kfold") {
    if (k < 2) throw ArgumentError("k must be >= 2");
    require_file("xml_train", xml_train);
    if (model.position_mode == PositionMode::tree) {
      require_file("conllu_train (required by position_mode=tree)", conllu_train);
    }
    if (model.use_pos) {
      require_file("conllu_train (required by use_pos=true)", conllu_train);
    }
    if (model.word_source == WordSource::pretrained) require_file("vectors", vectors);
    if (model.word_source == WordSource::contextual) require_file("contextual", contextual);
    return;
  }
  if (command == "predict") {
    require_file("checkpoint", checkpoint);
    if (text.empty() && data_test.empty()) {
      throw ArgumentError("predict needs either a data_test dataset or a text file");
    }
    if (!text.empty()) require_file("text", text);
    if (!data_test.empty()) require_file("data_test", data_test);
    return;
  }
  if (command == "gradcheck") return;
  throw ArgumentError("unknown command \"" + command + "\"");
}

}  // namespace atex
