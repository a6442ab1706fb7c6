#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace atex::xml {

// Small DOM for the review-corpus XML dialect: elements, attributes and
// character data. No namespaces, DTDs or processing beyond skipping the
// declaration and comments.
struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Node> children;
  std::string text;  // concatenated character data directly inside this element
  int line = 0;      // 1-based line of the start tag

  const std::string* attr(std::string_view key) const;
  const Node* child(std::string_view name) const;  // first match or nullptr
  std::vector<const Node*> children_named(std::string_view name) const;
};

// Parses a document and returns its root element. Throws ParseError with the
// line number on malformed input.
Node parse(std::string_view doc);

std::string escape(std::string_view raw);

// Serializes with two-space indentation. Elements that carry text and no
// children are written inline.
std::string to_string(const Node& root);

}  // namespace atex::xml
