#include "atex/xml.hpp"

#include <cctype>

#include "atex/errors.hpp"
#include "atex/utf8.hpp"

namespace atex::xml {

const std::string* Node::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Node* Node::child(std::string_view name) const {
  for (const Node& c : children) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<const Node*> Node::children_named(std::string_view name) const {
  std::vector<const Node*> out;
  for (const Node& c : children) {
    if (c.name == name) out.push_back(&c);
  }
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Node parse_document() {
    skip_prolog();
    Node root = parse_element();
    skip_misc();
    if (pos_ != doc_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  std::string_view doc_;
  std::size_t pos_ = 0;
  int line_ = 1;

  [[noreturn]] void fail(const std::string& what) { throw ParseError(line_, what); }

  bool eof() const { return pos_ >= doc_.size(); }
  char peek() const { return doc_[pos_]; }

  char advance() {
    char c = doc_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  bool starts_with(std::string_view s) const {
    return doc_.substr(pos_, s.size()) == s;
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
      advance();
    }
  }

  void skip_until(std::string_view terminator) {
    while (!eof() && !starts_with(terminator)) advance();
    if (eof()) fail(std::string("unterminated construct, expected \"") + std::string(terminator) + "\"");
    for (std::size_t i = 0; i < terminator.size(); ++i) advance();
  }

  void skip_prolog() {
    skip_ws();
    if (starts_with("<?")) skip_until("?>");
    skip_misc();
    if (!eof() && starts_with("<!DOCTYPE")) skip_until(">");
    skip_misc();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_until("-->");
      } else {
        break;
      }
    }
  }

  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == ':';
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) advance();
    if (pos_ == start) fail("expected a name");
    return std::string(doc_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out.push_back(raw[i++]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity reference");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") {
        out.push_back('&');
      } else if (ent == "lt") {
        out.push_back('<');
      } else if (ent == "gt") {
        out.push_back('>');
      } else if (ent == "quot") {
        out.push_back('"');
      } else if (ent == "apos") {
        out.push_back('\'');
      } else if (!ent.empty() && ent[0] == '#') {
        char32_t cp = 0;
        try {
          cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                   ? static_cast<char32_t>(std::stoul(std::string(ent.substr(2)), nullptr, 16))
                   : static_cast<char32_t>(std::stoul(std::string(ent.substr(1))));
        } catch (const std::exception&) {
          fail("bad numeric character reference &" + std::string(ent) + ";");
        }
        out += utf8::encode({cp});
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi + 1;
    }
    return out;
  }

  Node parse_element() {
    skip_ws();
    if (eof() || peek() != '<') fail("expected an element");
    Node node;
    node.line = line_;
    expect('<');
    node.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag <" + node.name);
      if (peek() == '/') {
        advance();
        expect('>');
        return node;  // self-closing
      }
      if (peek() == '>') {
        advance();
        break;
      }
      std::string key = parse_name();
      skip_ws();
      expect('=');
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) fail("expected a quoted attribute value");
      char quote = advance();
      std::size_t start = pos_;
      while (!eof() && peek() != quote) advance();
      if (eof()) fail("unterminated attribute value");
      std::string value = decode_entities(doc_.substr(start, pos_ - start));
      advance();  // closing quote
      node.attrs.emplace_back(std::move(key), std::move(value));
    }
    // Content: text, children, CDATA and comments until the matching end tag.
    for (;;) {
      if (eof()) fail("missing end tag </" + node.name + ">");
      if (peek() == '<') {
        if (starts_with("<!--")) {
          skip_until("-->");
          continue;
        }
        if (starts_with("<![CDATA[")) {
          for (std::size_t i = 0; i < 9; ++i) advance();
          std::size_t start = pos_;
          while (!eof() && !starts_with("]]>")) advance();
          if (eof()) fail("unterminated CDATA section");
          node.text += std::string(doc_.substr(start, pos_ - start));
          for (std::size_t i = 0; i < 3; ++i) advance();
          continue;
        }
        if (starts_with("</")) {
          advance();
          advance();
          std::string closing = parse_name();
          if (closing != node.name) {
            fail("mismatched end tag </" + closing + ">, expected </" + node.name + ">");
          }
          skip_ws();
          expect('>');
          return node;
        }
        node.children.push_back(parse_element());
      } else {
        std::size_t start = pos_;
        while (!eof() && peek() != '<') advance();
        node.text += decode_entities(doc_.substr(start, pos_ - start));
      }
    }
  }
};

void write_node(const Node& node, std::string& out, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out += pad + "<" + node.name;
  for (const auto& [k, v] : node.attrs) {
    out += " " + k + "=\"" + escape(v) + "\"";
  }
  if (node.children.empty() && node.text.empty()) {
    out += "/>\n";
    return;
  }
  out += ">";
  if (node.children.empty()) {
    out += escape(node.text) + "</" + node.name + ">\n";
    return;
  }
  out += "\n";
  for (const Node& c : node.children) write_node(c, out, depth + 1);
  out += pad + "</" + node.name + ">\n";
}

}  // namespace

Node parse(std::string_view doc) { return Parser(doc).parse_document(); }

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string to_string(const Node& root) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_node(root, out, 0);
  return out;
}

}  // namespace atex::xml
