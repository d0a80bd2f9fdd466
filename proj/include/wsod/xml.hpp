#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wsod::xml {

/// Element tree produced by parse(). Attributes are validated but not
/// retained; character data directly inside an element accumulates in
/// `text`. Good enough for annotation files, not a general XML library.
struct Node {
  std::string name;
  std::string text;
  std::vector<Node> children;
  int line = 0;

  /// First child element with the given tag name, or nullptr.
  const Node* child(std::string_view tag) const;
};

/// Parses one XML document (prolog, comments, CDATA and the five standard
/// entities are handled; DTDs are skipped). Throws ParseError with a line
/// number on any malformed input; never crashes on arbitrary bytes.
Node parse(std::string_view text);

/// Escapes &, <, >, " and ' for element content.
std::string escape(std::string_view raw);

}  // namespace wsod::xml
