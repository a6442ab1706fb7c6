#include "atex/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "atex/errors.hpp"
#include "atex/rng.hpp"

namespace atex {

int EmbeddingTable::lookup(std::string_view token) const {
  auto it = index.find(std::string(token));
  if (it != index.end()) return it->second;
  return unk_id();
}

int EmbeddingTable::unk_id() const {
  auto it = index.find(std::string(kUnk));
  if (it == index.end()) throw ArgumentError("embedding table has no <UNK> entry");
  return it->second;
}

void EmbeddingTable::rebuild_index() {
  index.clear();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (!index.emplace(vocab[i], static_cast<int>(i)).second) {
      throw ArgumentError("duplicate vocabulary entry \"" + vocab[i] + "\"");
    }
  }
}

EmbeddingTable load_word_vectors(std::istream& in) {
  EmbeddingTable table;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  bool first_content_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);

    if (first_content_line) {
      // "<count> <dim>" header: exactly two integer fields.
      first_content_line = false;
      std::istringstream probe(line);
      long a = 0, b = 0;
      std::string extra;
      if (probe >> a >> b && !(probe >> extra) && a > 0 && b > 0) {
        continue;  // header consumed; counts are advisory only
      }
    }

    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    double v = 0;
    while (ss >> v) values.push_back(v);
    if (values.empty()) {
      throw ParseError(line_no, "no vector values for token \"" + token + "\"");
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ParseError(line_no, "vector for \"" + token + "\" has " +
                                    std::to_string(values.size()) + " values, expected " +
                                    std::to_string(rows.front().size()));
    }
    if (!seen.insert(token).second) {
      throw ParseError(line_no, "duplicate token \"" + token + "\"");
    }
    table.vocab.push_back(token);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(line_no, "vector file contains no vectors");

  table.dim = static_cast<int>(rows.front().size());
  const auto loaded = static_cast<Eigen::Index>(rows.size());
  table.vectors.resize(loaded + 2, table.dim);
  for (Eigen::Index r = 0; r < loaded; ++r) {
    for (int c = 0; c < table.dim; ++c) table.vectors(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  // <UNK> = element-wise mean of the loaded vectors, <PAD> = zero.
  table.vocab.emplace_back(EmbeddingTable::kUnk);
  table.vectors.row(loaded) = table.vectors.topRows(loaded).colwise().mean();
  table.vocab.emplace_back(EmbeddingTable::kPad);
  table.vectors.row(loaded + 1).setZero();
  table.trainable = true;
  table.rebuild_index();
  return table;
}

EmbeddingTable load_word_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file " + path);
  return load_word_vectors(in);
}

EmbeddingTable init_random_table(const std::vector<std::string>& vocab, int dim,
                                 std::uint64_t seed) {
  if (vocab.empty()) throw ArgumentError("init_random_table: empty vocabulary");
  if (dim <= 0) throw ArgumentError("init_random_table: dim must be positive");

  EmbeddingTable table;
  table.vocab = vocab;
  bool has_unk = false, has_pad = false;
  for (const std::string& v : table.vocab) {
    if (v == EmbeddingTable::kUnk) has_unk = true;
    if (v == EmbeddingTable::kPad) has_pad = true;
  }
  if (!has_unk) table.vocab.emplace_back(EmbeddingTable::kUnk);
  if (!has_pad) table.vocab.emplace_back(EmbeddingTable::kPad);

  table.dim = dim;
  table.vectors.resize(static_cast<Eigen::Index>(table.vocab.size()), dim);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < table.vectors.rows(); ++r) {
    for (int c = 0; c < dim; ++c) table.vectors(r, c) = rng.uniform(-0.1, 0.1);
  }
  table.rebuild_index();
  table.vectors.row(table.index.at(std::string(EmbeddingTable::kPad))).setZero();
  table.trainable = true;
  return table;
}

std::string_view position_mode_name(PositionMode m) {
  switch (m) {
    case PositionMode::none: return "none";
    case PositionMode::sequential: return "sequential";
    case PositionMode::tree: return "tree";
  }
  return "?";
}

PositionMode position_mode_from_string(std::string_view s) {
  if (s == "none") return PositionMode::none;
  if (s == "sequential" || s == "positional") return PositionMode::sequential;
  if (s == "tree" || s == "tpe") return PositionMode::tree;
  throw ArgumentError("unknown position mode \"" + std::string(s) + "\"");
}

namespace {

Eigen::VectorXd pe_vector(int position, const PositionalConfig& config) {
  if (config.dim <= 0 || config.dim % 2 != 0) {
    throw ArgumentError("positional encoding dim must be a positive even number");
  }
  if (!(config.m_constant > 1.0)) {
    throw ArgumentError("positional encoding constant must exceed 1");
  }
  Eigen::VectorXd out(config.dim);
  for (int i = 0; i < config.dim / 2; ++i) {
    const double freq = std::pow(config.m_constant, 2.0 * i / config.dim);
    const double arg = static_cast<double>(position) / freq;
    out(2 * i) = std::sin(arg);
    out(2 * i + 1) = std::cos(arg);
  }
  return out;
}

}  // namespace

Eigen::VectorXd sinusoidal_pe(int position, const PositionalConfig& config) {
  if (position < 0) throw ArgumentError("position must be non-negative");
  return pe_vector(position, config);
}

Eigen::VectorXd tree_pe(int level, const PositionalConfig& config) {
  if (level < 0) throw ArgumentError("level must be non-negative");
  return pe_vector(level, config);
}

EncodedSentence encode_sentence(const std::string& sentence_id,
                                const std::vector<std::string>& tokens,
                                const std::vector<std::string>& pos_tags,
                                const std::vector<int>& levels,
                                const EmbeddingTable* word_table,
                                const EmbeddingTable* pos_table,
                                const PositionalConfig& pconfig,
                                const Eigen::MatrixXd* contextual_vectors) {
  const auto t_count = static_cast<Eigen::Index>(tokens.size());
  if (word_table == nullptr && contextual_vectors == nullptr) {
    throw ArgumentError("encode_sentence: need a word table or contextual vectors");
  }
  if (pos_table != nullptr && pos_tags.size() != tokens.size()) {
    throw ArgumentError("encode_sentence: " + std::to_string(pos_tags.size()) +
                        " POS tags for " + std::to_string(tokens.size()) + " tokens");
  }
  if (pconfig.mode == PositionMode::tree && levels.size() != tokens.size()) {
    throw ArgumentError("encode_sentence: " + std::to_string(levels.size()) +
                        " level indices for " + std::to_string(tokens.size()) + " tokens");
  }
  if (contextual_vectors != nullptr && contextual_vectors->rows() != t_count) {
    throw ArgumentError("encode_sentence: contextual matrix has " +
                        std::to_string(contextual_vectors->rows()) + " rows for " +
                        std::to_string(tokens.size()) + " tokens");
  }

  const int word_dim = contextual_vectors != nullptr
                           ? static_cast<int>(contextual_vectors->cols())
                           : word_table->dim;
  const int pos_dim = pos_table != nullptr ? pos_table->dim : 0;
  const int pe_dim = pconfig.mode != PositionMode::none ? pconfig.dim : 0;
  const int d_in = word_dim + pos_dim + pe_dim;

  EncodedSentence enc;
  enc.sentence_id = sentence_id;
  enc.levels = levels;
  enc.matrix.resize(t_count, d_in);

  static bool warned_pos_unk = false;
  for (Eigen::Index t = 0; t < t_count; ++t) {
    int col = 0;
    if (contextual_vectors != nullptr) {
      enc.matrix.block(t, 0, 1, word_dim) = contextual_vectors->row(t);
    } else {
      const int wid = word_table->lookup(tokens[static_cast<std::size_t>(t)]);
      enc.word_ids.push_back(wid);
      enc.matrix.block(t, 0, 1, word_dim) = word_table->vectors.row(wid);
    }
    col += word_dim;
    if (pos_table != nullptr) {
      const int pid = pos_table->lookup(pos_tags[static_cast<std::size_t>(t)]);
      if (pid == pos_table->unk_id() && !warned_pos_unk) {
        // The UD tag set is closed; reaching <UNK> hints at bad input.
        std::cerr << "warning: POS tag \"" << pos_tags[static_cast<std::size_t>(t)]
                  << "\" not in the UD tag set, using <UNK>\n";
        warned_pos_unk = true;
      }
      enc.pos_ids.push_back(pid);
      enc.matrix.block(t, col, 1, pos_dim) = pos_table->vectors.row(pid);
      col += pos_dim;
    }
    if (pconfig.mode == PositionMode::sequential) {
      enc.matrix.block(t, col, 1, pe_dim) = sinusoidal_pe(static_cast<int>(t), pconfig).transpose();
    } else if (pconfig.mode == PositionMode::tree) {
      enc.matrix.block(t, col, 1, pe_dim) = tree_pe(levels[static_cast<std::size_t>(t)], pconfig).transpose();
    }
  }
  return enc;
}

}  // namespace atex
