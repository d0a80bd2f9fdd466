#include "wsod/xml.hpp"

#include <cctype>

#include "wsod/error.hpp"

namespace wsod::xml {

namespace {

constexpr int kMaxDepth = 128;

struct Cursor {
  std::string_view s;
  size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  char take() {
    char c = s[pos++];
    if (c == '\n') ++line;
    return c;
  }

  bool starts_with(std::string_view prefix) const {
    return s.compare(pos, prefix.size(), prefix) == 0;
  }

  void advance(size_t n) {
    for (size_t i = 0; i < n && !eof(); ++i) take();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("xml parse error at line " + std::to_string(line) + ": " +
                     message);
  }
};

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         c == '-' || c == '.';
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

void skip_space(Cursor& cur) {
  while (!cur.eof() && is_space(cur.peek())) cur.take();
}

std::string read_name(Cursor& cur) {
  if (cur.eof() || !is_name_start(cur.peek())) cur.fail("expected a tag name");
  std::string name;
  while (!cur.eof() && is_name_char(cur.peek())) name += cur.take();
  return name;
}

void skip_until(Cursor& cur, std::string_view terminator,
                const std::string& what) {
  while (!cur.eof()) {
    if (cur.starts_with(terminator)) {
      cur.advance(terminator.size());
      return;
    }
    cur.take();
  }
  cur.fail("unterminated " + what);
}

// <!DOCTYPE ...> possibly with an internal subset in brackets.
void skip_doctype(Cursor& cur) {
  int brackets = 0;
  while (!cur.eof()) {
    char c = cur.take();
    if (c == '[') ++brackets;
    if (c == ']' && brackets > 0) --brackets;
    if (c == '>' && brackets == 0) return;
  }
  cur.fail("unterminated <! declaration");
}

void append_entity(Cursor& cur, std::string& out) {
  cur.take();  // '&'
  std::string entity;
  while (!cur.eof() && cur.peek() != ';') {
    entity += cur.take();
    if (entity.size() > 10) cur.fail("malformed entity reference");
  }
  if (cur.eof()) cur.fail("unterminated entity reference");
  cur.take();  // ';'
  if (entity == "lt") {
    out += '<';
  } else if (entity == "gt") {
    out += '>';
  } else if (entity == "amp") {
    out += '&';
  } else if (entity == "apos") {
    out += '\'';
  } else if (entity == "quot") {
    out += '"';
  } else if (!entity.empty() && entity[0] == '#') {
    int base = 10;
    size_t digits = 1;
    if (entity.size() > 1 && (entity[1] == 'x' || entity[1] == 'X')) {
      base = 16;
      digits = 2;
    }
    if (entity.size() <= digits) cur.fail("malformed character reference");
    long code = 0;
    for (size_t i = digits; i < entity.size(); ++i) {
      int digit;
      char c = entity[i];
      if (c >= '0' && c <= '9') {
        digit = c - '0';
      } else if (base == 16 && c >= 'a' && c <= 'f') {
        digit = c - 'a' + 10;
      } else if (base == 16 && c >= 'A' && c <= 'F') {
        digit = c - 'A' + 10;
      } else {
        cur.fail("malformed character reference &" + entity + ";");
      }
      code = code * base + digit;
      if (code > 0x10FFFF) cur.fail("character reference out of range");
    }
    if (code == 0) cur.fail("character reference out of range");
    // Encode as UTF-8.
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
  } else {
    cur.fail("unknown entity &" + entity + ";");
  }
}

void skip_attributes(Cursor& cur) {
  while (true) {
    skip_space(cur);
    if (cur.eof()) cur.fail("unterminated start tag");
    char c = cur.peek();
    if (c == '>' || c == '/') return;
    read_name(cur);
    skip_space(cur);
    if (cur.eof() || cur.peek() != '=') cur.fail("attribute without value");
    cur.take();
    skip_space(cur);
    if (cur.eof() || (cur.peek() != '"' && cur.peek() != '\'')) {
      cur.fail("attribute value must be quoted");
    }
    char quote = cur.take();
    while (!cur.eof() && cur.peek() != quote) cur.take();
    if (cur.eof()) cur.fail("unterminated attribute value");
    cur.take();
  }
}

Node parse_element(Cursor& cur, int depth);

// Parses content after the start tag's '>', up to and including the
// matching close tag.
void parse_content(Cursor& cur, Node& node, int depth) {
  while (true) {
    if (cur.eof()) cur.fail("missing closing tag </" + node.name + ">");
    char c = cur.peek();
    if (c == '<') {
      if (cur.starts_with("</")) {
        int close_line = cur.line;
        cur.advance(2);
        std::string name = read_name(cur);
        skip_space(cur);
        if (cur.eof() || cur.peek() != '>') cur.fail("malformed closing tag");
        cur.take();
        if (name != node.name) {
          throw ParseError("xml parse error at line " +
                           std::to_string(close_line) + ": closing tag </" +
                           name + "> does not match <" + node.name + ">");
        }
        return;
      }
      if (cur.starts_with("<!--")) {
        cur.advance(4);
        skip_until(cur, "-->", "comment");
        continue;
      }
      if (cur.starts_with("<![CDATA[")) {
        cur.advance(9);
        while (!cur.eof() && !cur.starts_with("]]>")) node.text += cur.take();
        if (cur.eof()) cur.fail("unterminated CDATA section");
        cur.advance(3);
        continue;
      }
      if (cur.starts_with("<?")) {
        cur.advance(2);
        skip_until(cur, "?>", "processing instruction");
        continue;
      }
      if (cur.starts_with("<!")) cur.fail("unexpected <! declaration");
      node.children.push_back(parse_element(cur, depth + 1));
      continue;
    }
    if (c == '&') {
      append_entity(cur, node.text);
      continue;
    }
    node.text += cur.take();
  }
}

Node parse_element(Cursor& cur, int depth) {
  if (depth > kMaxDepth) cur.fail("element nesting too deep");
  Node node;
  node.line = cur.line;
  cur.take();  // '<'
  node.name = read_name(cur);
  skip_attributes(cur);
  if (cur.peek() == '/') {
    cur.take();
    if (cur.eof() || cur.peek() != '>') cur.fail("malformed self-closing tag");
    cur.take();
    return node;
  }
  cur.take();  // '>'
  parse_content(cur, node, depth);
  return node;
}

void skip_misc(Cursor& cur) {
  while (true) {
    skip_space(cur);
    if (cur.starts_with("<?")) {
      cur.advance(2);
      skip_until(cur, "?>", "processing instruction");
    } else if (cur.starts_with("<!--")) {
      cur.advance(4);
      skip_until(cur, "-->", "comment");
    } else if (cur.starts_with("<!")) {
      cur.advance(2);
      skip_doctype(cur);
    } else {
      return;
    }
  }
}

}  // namespace

const Node* Node::child(std::string_view tag) const {
  for (const Node& c : children) {
    if (c.name == tag) return &c;
  }
  return nullptr;
}

Node parse(std::string_view text) {
  Cursor cur{text};
  if (cur.starts_with("\xEF\xBB\xBF")) cur.advance(3);
  skip_misc(cur);
  if (cur.eof() || cur.peek() != '<') cur.fail("expected a root element");
  Node root = parse_element(cur, 0);
  skip_misc(cur);
  if (!cur.eof()) cur.fail("trailing content after the root element");
  return root;
}

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
      default: out += c;
    }
  }
  return out;
}

}  // namespace wsod::xml
