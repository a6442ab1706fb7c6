#include "atex/deptree.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include "atex/errors.hpp"
#include "atex/utf8.hpp"

namespace atex {

bool is_upos(std::string_view tag) {
  return std::find(kUposTags.begin(), kUposTags.end(), tag) != kUposTags.end();
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

int parse_int(std::string_view s, int line_no, const std::string& what) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line_no, what + " \"" + std::string(s) + "\" is not an integer");
  }
  return out;
}

void validate_tree(DepTree& tree, int line_no) {
  const int n = static_cast<int>(tree.tokens.size());
  int root = 0;
  int root_count = 0;
  for (const DepToken& tok : tree.tokens) {
    if (tok.head < 0 || tok.head > n) {
      throw ValidationError("sentence " + tree.sentence_id + ": head " +
                            std::to_string(tok.head) + " of token " +
                            std::to_string(tok.index) + " out of range");
    }
    if (tok.head == tok.index) {
      throw ValidationError("sentence " + tree.sentence_id + ": token " +
                            std::to_string(tok.index) + " is its own head");
    }
    if (tok.head == 0) {
      root = tok.index;
      ++root_count;
    }
  }
  if (root_count != 1) {
    throw ValidationError("sentence " + tree.sentence_id + ": expected exactly one root, found " +
                          std::to_string(root_count) + " (near line " +
                          std::to_string(line_no) + ")");
  }
  tree.root_index = root;

  // Chase head pointers from every token; a revisit inside the current chain
  // is a cycle. 0 = unvisited, 1 = on current chain, 2 = done.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    if (state[start] != 0) continue;
    std::vector<int> chain;
    int cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      cur = tree.tokens[cur - 1].head;
    }
    if (state[cur] == 1) {
      // Extract the cycle portion of the chain for the message.
      std::string cycle;
      bool in_cycle = false;
      for (int idx : chain) {
        if (idx == cur) in_cycle = true;
        if (in_cycle) cycle += std::to_string(idx) + " -> ";
      }
      cycle += std::to_string(cur);
      throw ValidationError("sentence " + tree.sentence_id + ": head cycle " + cycle);
    }
    for (int idx : chain) state[idx] = 2;
  }
}

}  // namespace

std::vector<DepTree> parse_conllu(std::string_view text) {
  std::vector<DepTree> trees;
  DepTree current;
  int expected_index = 1;
  int block_start_line = 0;

  auto flush = [&](int line_no) {
    if (current.tokens.empty()) {
      current = DepTree{};
      expected_index = 1;
      return;
    }
    if (current.sentence_id.empty()) {
      current.sentence_id = "s" + std::to_string(trees.size() + 1);
    }
    validate_tree(current, line_no);
    trees.push_back(std::move(current));
    current = DepTree{};
    expected_index = 1;
  };

  const std::vector<std::string_view> lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    std::string_view line = lines[li];
    if (line.empty()) {
      flush(line_no);
      continue;
    }
    if (line[0] == '#') {
      constexpr std::string_view kSentId = "# sent_id";
      if (line.substr(0, kSentId.size()) == kSentId) {
        std::size_t eq = line.find('=');
        if (eq != std::string_view::npos) {
          std::string_view v = line.substr(eq + 1);
          while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
          while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
          current.sentence_id = std::string(v);
        }
      }
      continue;
    }

    std::vector<std::string_view> cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, got " +
                                    std::to_string(cols.size()));
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos) continue;  // multiword range
    if (id.find('.') != std::string_view::npos) {
      throw ParseError(line_no, "empty-node id \"" + std::string(id) + "\" is not supported");
    }
    if (current.tokens.empty()) block_start_line = line_no;

    DepToken tok;
    tok.index = parse_int(id, line_no, "token id");
    if (tok.index != expected_index) {
      throw ParseError(line_no, "token id " + std::to_string(tok.index) +
                                    " out of sequence, expected " +
                                    std::to_string(expected_index));
    }
    ++expected_index;
    tok.form = std::string(cols[1]);
    tok.upos = std::string(cols[3]);
    if (!is_upos(tok.upos)) {
      throw ParseError(line_no, "UPOS \"" + tok.upos + "\" is not one of the 17 UD tags");
    }
    tok.head = parse_int(cols[6], line_no, "head");
    tok.deprel = std::string(cols[7]);
    current.tokens.push_back(std::move(tok));
  }
  flush(static_cast<int>(lines.size()));
  (void)block_start_line;
  return trees;
}

std::string to_conllu(const std::vector<DepTree>& trees) {
  std::string out;
  for (const DepTree& tree : trees) {
    out += "# sent_id = " + tree.sentence_id + "\n";
    for (const DepToken& tok : tree.tokens) {
      out += std::to_string(tok.index) + "\t" + tok.form + "\t_\t" + tok.upos +
             "\t_\t_\t" + std::to_string(tok.head) + "\t" + tok.deprel + "\t_\t_\n";
    }
    out += "\n";
  }
  return out;
}

LevelIndexVector level_indices(const DepTree& tree) {
  const int n = static_cast<int>(tree.tokens.size());
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n) + 1);
  for (const DepToken& tok : tree.tokens) {
    children[tok.head].push_back(tok.index);
  }

  // Breadth-first walk from the root assigns depth in edges.
  std::vector<int> depth(static_cast<std::size_t>(n) + 1, 0);
  std::deque<int> queue{tree.root_index};
  int max_depth = 0;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    max_depth = std::max(max_depth, depth[cur]);
    for (int child : children[cur]) {
      depth[child] = depth[cur] + 1;
      queue.push_back(child);
    }
  }

  LevelIndexVector out;
  out.max_index = max_depth;
  out.values.resize(n);
  for (int i = 1; i <= n; ++i) out.values[i - 1] = max_depth - depth[i];
  return out;
}

std::vector<std::vector<int>> align_tokens(const std::vector<std::string>& sentence_tokens,
                                           const DepTree& tree) {
  const std::size_t n_tree = tree.tokens.size();

  // Fast path: equal counts and forms that match position by position.
  if (sentence_tokens.size() == n_tree) {
    bool identical = true;
    for (std::size_t i = 0; i < n_tree; ++i) {
      if (utf8::lower(sentence_tokens[i]) != utf8::lower(tree.tokens[i].form)) {
        identical = false;
        break;
      }
    }
    if (identical) {
      std::vector<std::vector<int>> out(sentence_tokens.size());
      for (std::size_t i = 0; i < n_tree; ++i) out[i] = {static_cast<int>(i)};
      return out;
    }
  }

  // Greedy left-to-right: consume tree tokens until their concatenation
  // reproduces the whitespace token.
  std::vector<std::vector<int>> out(sentence_tokens.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < sentence_tokens.size(); ++i) {
    const std::string want = utf8::lower(sentence_tokens[i]);
    std::string have;
    while (have.size() < want.size() && j < n_tree) {
      const std::string piece = utf8::lower(tree.tokens[j].form);
      if (want.compare(have.size(), piece.size(), piece) != 0) break;
      have += piece;
      out[i].push_back(static_cast<int>(j));
      ++j;
    }
    if (have != want) {
      throw AlignmentError("sentence " + tree.sentence_id + ": cannot align token \"" +
                           sentence_tokens[i] + "\" against tree forms");
    }
  }
  if (j != n_tree) {
    throw AlignmentError("sentence " + tree.sentence_id + ": " +
                         std::to_string(n_tree - j) + " unconsumed tree tokens");
  }
  return out;
}

std::vector<TokenAnnotation> annotate_tokens(const std::vector<std::vector<int>>& alignment,
                                             const DepTree& tree,
                                             const LevelIndexVector& levels) {
  std::vector<TokenAnnotation> out;
  out.reserve(alignment.size());
  for (const std::vector<int>& mapped : alignment) {
    if (mapped.empty()) {
      throw ArgumentError("annotate_tokens: empty alignment entry");
    }
    int pick = mapped.front();
    for (int idx : mapped) {
      if (tree.tokens[static_cast<std::size_t>(idx)].upos != "PUNCT") {
        pick = idx;
        break;
      }
    }
    out.push_back({tree.tokens[static_cast<std::size_t>(pick)].upos,
                   levels.values[static_cast<std::size_t>(pick)]});
  }
  return out;
}

}  // namespace atex
