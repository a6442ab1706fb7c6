#include "atex/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "atex/errors.hpp"

namespace atex {

using ordered_json = nlohmann::ordered_json;

Dataset read_dataset_jsonl(std::istream& in) {
  Dataset data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw ParseError(line_no, std::string("bad JSON: ") + e.what());
    }
    DataSentence s;
    try {
      s.sentence_id = j.at("sentence_id").get<std::string>();
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      for (const auto& l : j.at("labels")) {
        s.labels.push_back(label_from_string(l.get<std::string>()));
      }
      if (j.contains("upos")) s.upos = j["upos"].get<std::vector<std::string>>();
      if (j.contains("levels")) s.levels = j["levels"].get<std::vector<int>>();
    } catch (const ordered_json::exception& e) {
      throw ParseError(line_no, std::string("bad dataset record: ") + e.what());
    }
    if (s.tokens.size() != s.labels.size()) {
      throw ParseError(line_no, "sentence " + s.sentence_id + ": " +
                                    std::to_string(s.tokens.size()) + " tokens vs " +
                                    std::to_string(s.labels.size()) + " labels");
    }
    data.push_back(std::move(s));
  }
  return data;
}

Dataset read_dataset_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  return read_dataset_jsonl(in);
}

void write_dataset_jsonl(const Dataset& data, std::ostream& out) {
  for (const DataSentence& s : data) {
    ordered_json j;
    j["sentence_id"] = s.sentence_id;
    j["tokens"] = s.tokens;
    std::vector<std::string> labels;
    labels.reserve(s.labels.size());
    for (Label l : s.labels) labels.emplace_back(1, label_char(l));
    j["labels"] = labels;
    if (!s.upos.empty()) j["upos"] = s.upos;
    if (!s.levels.empty()) j["levels"] = s.levels;
    out << j.dump() << "\n";
  }
}

void write_dataset_jsonl_file(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset " + path);
  write_dataset_jsonl(data, out);
}

const Eigen::MatrixXd* ContextualStore::find(const std::string& sentence_id) const {
  auto it = by_sentence.find(sentence_id);
  return it == by_sentence.end() ? nullptr : &it->second;
}

ContextualStore read_contextual_jsonl(std::istream& in) {
  ContextualStore store;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw ParseError(line_no, std::string("bad JSON: ") + e.what());
    }
    std::string id;
    std::vector<std::vector<double>> rows;
    try {
      id = j.at("sentence_id").get<std::string>();
      rows = j.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const ordered_json::exception& e) {
      throw ParseError(line_no, std::string("bad contextual record: ") + e.what());
    }
    if (rows.empty()) throw ParseError(line_no, "sentence " + id + ": empty vector list");
    const int dim = static_cast<int>(rows.front().size());
    if (store.dim == 0) store.dim = dim;
    if (dim != store.dim) {
      throw ParseError(line_no, "sentence " + id + ": vector dim " + std::to_string(dim) +
                                    " differs from earlier dim " + std::to_string(store.dim));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != dim) {
        throw ParseError(line_no, "sentence " + id + ": ragged vector rows");
      }
      for (int c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    if (!store.by_sentence.emplace(id, std::move(m)).second) {
      throw ParseError(line_no, "duplicate contextual record for sentence " + id);
    }
  }
  return store;
}

ContextualStore read_contextual_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open contextual vectors " + path);
  return read_contextual_jsonl(in);
}

}  // namespace atex
