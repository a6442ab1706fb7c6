#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atex {

// Trainable vocabulary -> vector map. "<UNK>" and "<PAD>" are always present;
// out-of-vocabulary lookups resolve to "<UNK>".
struct EmbeddingTable {
  static constexpr std::string_view kUnk = "<UNK>";
  static constexpr std::string_view kPad = "<PAD>";

  std::vector<std::string> vocab;
  std::unordered_map<std::string, int> index;
  Eigen::MatrixXd vectors;  // |vocab| x dim
  int dim = 0;
  bool trainable = true;

  int lookup(std::string_view token) const;
  int unk_id() const;
  void rebuild_index();
};

// Reads the whitespace-separated vector text format: an optional
// "<count> <dim>" header, then one token and dim decimals per line. "<UNK>"
// is set to the mean of all loaded vectors, "<PAD>" to zero.
EmbeddingTable load_word_vectors(std::istream& in);
EmbeddingTable load_word_vectors_file(const std::string& path);

// Uniform [-0.1, 0.1] initialization from a deterministic generator; "<UNK>"
// and "<PAD>" are appended when absent and "<PAD>" stays zero.
EmbeddingTable init_random_table(const std::vector<std::string>& vocab, int dim,
                                 std::uint64_t seed);

enum class PositionMode { none, sequential, tree };

std::string_view position_mode_name(PositionMode m);
PositionMode position_mode_from_string(std::string_view s);

struct PositionalConfig {
  PositionMode mode = PositionMode::none;
  int dim = 64;               // must be even
  double m_constant = 10000;  // frequency base, must be > 1
};

// Interleaved sine/cosine encoding: entry 2i is sin(pos / M^(2i/d)), entry
// 2i+1 is cos of the same argument.
Eigen::VectorXd sinusoidal_pe(int position, const PositionalConfig& config);

// Same closed form evaluated at a token's tree level index.
Eigen::VectorXd tree_pe(int level, const PositionalConfig& config);

struct EncodedSentence {
  std::string sentence_id;
  Eigen::MatrixXd matrix;  // T x D_in
  std::vector<int> word_ids;
  std::vector<int> pos_ids;
  std::vector<int> levels;
};

// Builds the per-token input rows: word vector (or a frozen contextual
// vector when supplied), then POS vector when a POS table is given, then the
// positional encoding when mode != none. Unknown words map to "<UNK>".
EncodedSentence encode_sentence(const std::string& sentence_id,
                                const std::vector<std::string>& tokens,
                                const std::vector<std::string>& pos_tags,
                                const std::vector<int>& levels,
                                const EmbeddingTable* word_table,
                                const EmbeddingTable* pos_table,
                                const PositionalConfig& pconfig,
                                const Eigen::MatrixXd* contextual_vectors = nullptr);

}  // namespace atex
