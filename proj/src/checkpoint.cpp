#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "atex/errors.hpp"
#include "atex/trainer.hpp"

// Checkpoint container layout (all integers and floats little-endian):
//   "ATEXCKPT"            8-byte magic
//   u32 format version    (currently 1)
//   u64 config length, config JSON bytes
//   u64 tensor count
//   per tensor: u32 name length, name bytes, u64 rows, u64 cols, f64 data
//               in row-major order
//   u64 FNV-1a checksum of everything before it
static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace atex {

namespace {

constexpr char kMagic[8] = {'A', 'T', 'E', 'X', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
 public:
  void raw(const void* data, std::size_t n) {
    buf_.append(static_cast<const char*>(data), n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const std::string& name, const Eigen::MatrixXd& m) {
    str(name);
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        raw(&v, sizeof v);
      }
    }
  }
  std::string finish() {
    const std::uint64_t checksum = fnv1a(buf_);
    u64(checksum);
    return std::move(buf_);
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : buf_(std::move(bytes)) {
    if (buf_.size() < sizeof(std::uint64_t)) {
      throw CheckpointError("checkpoint truncated: no room for a checksum");
    }
    const std::string body = buf_.substr(0, buf_.size() - sizeof(std::uint64_t));
    std::uint64_t stored = 0;
    std::memcpy(&stored, buf_.data() + buf_.size() - sizeof stored, sizeof stored);
    if (fnv1a(body) != stored) {
      throw CheckpointError("checkpoint integrity failure: checksum mismatch");
    }
    end_ = buf_.size() - sizeof(std::uint64_t);
  }

  void raw(void* out, std::size_t n) {
    if (pos_ + n > end_) throw CheckpointError("checkpoint truncated");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  Eigen::MatrixXd tensor_body() {
    const auto rows = static_cast<Eigen::Index>(u64());
    const auto cols = static_cast<Eigen::Index>(u64());
    if (rows < 0 || cols < 0 || (rows > 0 && cols > 0 &&
        static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) >
            (end_ - pos_) / sizeof(double))) {
      throw CheckpointError("checkpoint truncated inside a tensor");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        double v = 0;
        raw(&v, sizeof v);
        m(r, c) = v;
      }
    }
    return m;
  }
  bool at_end() const { return pos_ == end_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

nlohmann::json config_to_json(const TaggerModel& model) {
  const ModelConfig& c = model.config;
  nlohmann::json j;
  j["uncased"] = c.uncased;
  j["use_pos"] = c.use_pos;
  j["word_source"] = std::string(word_source_name(c.word_source));
  j["position_mode"] = std::string(position_mode_name(c.position_mode));
  j["word_dim"] = c.word_dim;
  j["pos_dim"] = c.pos_dim;
  j["pe_dim"] = c.pe_dim;
  j["pe_constant"] = c.pe_constant;
  j["hidden_dim"] = c.hidden_dim;
  j["forbid_oi"] = c.forbid_oi;
  j["seed"] = c.seed;
  j["label_order"] = c.label_order;
  if (model.uses_word_table()) {
    j["word_vocab"] = model.word_table.vocab;
    j["word_trainable"] = model.word_table.trainable;
  }
  if (c.use_pos) {
    j["pos_vocab"] = model.pos_table.vocab;
    j["pos_trainable"] = model.pos_table.trainable;
  }
  return j;
}

void config_from_json(const nlohmann::json& j, TaggerModel& model) {
  ModelConfig c;
  c.uncased = j.at("uncased").get<bool>();
  c.use_pos = j.at("use_pos").get<bool>();
  c.word_source = word_source_from_string(j.at("word_source").get<std::string>());
  c.position_mode = position_mode_from_string(j.at("position_mode").get<std::string>());
  c.word_dim = j.at("word_dim").get<int>();
  c.pos_dim = j.at("pos_dim").get<int>();
  c.pe_dim = j.at("pe_dim").get<int>();
  c.pe_constant = j.at("pe_constant").get<double>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.forbid_oi = j.at("forbid_oi").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.label_order = j.at("label_order").get<std::string>();
  if (c.label_order != "BIO") {
    throw CheckpointError("checkpoint label order \"" + c.label_order +
                          "\" does not match this build (BIO)");
  }
  model.config = c;
  if (model.uses_word_table()) {
    model.word_table.vocab = j.at("word_vocab").get<std::vector<std::string>>();
    model.word_table.trainable = j.at("word_trainable").get<bool>();
    model.word_table.dim = c.word_dim;
    model.word_table.rebuild_index();
  }
  if (c.use_pos) {
    model.pos_table.vocab = j.at("pos_vocab").get<std::vector<std::string>>();
    model.pos_table.trainable = j.at("pos_trainable").get<bool>();
    model.pos_table.dim = c.pos_dim;
    model.pos_table.rebuild_index();
  }
}

}  // namespace

void save_checkpoint(const TaggerModel& model, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.str(config_to_json(model).dump());

  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors;
  Eigen::MatrixXd fwd_bias = model.fwd.bias, bwd_bias = model.bwd.bias;
  Eigen::MatrixXd emit_bias = model.crf.emit_bias;
  Eigen::MatrixXd start = model.crf.start, end = model.crf.end;
  if (model.uses_word_table()) tensors.emplace_back("word_table", &model.word_table.vectors);
  if (model.config.use_pos) tensors.emplace_back("pos_table", &model.pos_table.vectors);
  tensors.emplace_back("fwd.w_input", &model.fwd.w_input);
  tensors.emplace_back("fwd.w_recur", &model.fwd.w_recur);
  tensors.emplace_back("fwd.bias", &fwd_bias);
  tensors.emplace_back("bwd.w_input", &model.bwd.w_input);
  tensors.emplace_back("bwd.w_recur", &model.bwd.w_recur);
  tensors.emplace_back("bwd.bias", &bwd_bias);
  tensors.emplace_back("crf.emit_weight", &model.crf.emit_weight);
  tensors.emplace_back("crf.emit_bias", &emit_bias);
  tensors.emplace_back("crf.transition", &model.crf.transition);
  tensors.emplace_back("crf.start", &start);
  tensors.emplace_back("crf.end", &end);

  w.u64(tensors.size());
  for (const auto& [name, m] : tensors) w.tensor(name, *m);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const std::string bytes = w.finish();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to checkpoint " + path.string());
}

TaggerModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Reader r(std::move(bytes));
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kVersion));
  }

  TaggerModel model;
  nlohmann::json config_json;
  try {
    config_json = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("corrupt config record: ") + e.what());
  }
  config_from_json(config_json, model);

  const std::uint64_t count = r.u64();
  std::map<std::string, Eigen::MatrixXd> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.str();
    tensors[name] = r.tensor_body();
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes after the last tensor");

  const auto take = [&](const std::string& name) -> Eigen::MatrixXd {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError("checkpoint lacks tensor " + name);
    return std::move(it->second);
  };
  const auto take_vec = [&](const std::string& name) -> Eigen::VectorXd {
    Eigen::MatrixXd m = take(name);
    if (m.cols() != 1) throw CheckpointError("tensor " + name + " is not a column vector");
    return m.col(0);
  };

  if (model.uses_word_table()) {
    model.word_table.vectors = take("word_table");
    if (model.word_table.vectors.rows() !=
        static_cast<Eigen::Index>(model.word_table.vocab.size())) {
      throw CheckpointError("word table shape does not match its vocabulary");
    }
  }
  if (model.config.use_pos) {
    model.pos_table.vectors = take("pos_table");
    if (model.pos_table.vectors.rows() !=
        static_cast<Eigen::Index>(model.pos_table.vocab.size())) {
      throw CheckpointError("pos table shape does not match its vocabulary");
    }
  }
  model.fwd.w_input = take("fwd.w_input");
  model.fwd.w_recur = take("fwd.w_recur");
  model.fwd.bias = take_vec("fwd.bias");
  model.bwd.w_input = take("bwd.w_input");
  model.bwd.w_recur = take("bwd.w_recur");
  model.bwd.bias = take_vec("bwd.bias");
  model.crf.emit_weight = take("crf.emit_weight");
  model.crf.emit_bias = take_vec("crf.emit_bias");
  model.crf.transition = take("crf.transition");
  model.crf.start = take_vec("crf.start");
  model.crf.end = take_vec("crf.end");
  return model;
}

}  // namespace atex
