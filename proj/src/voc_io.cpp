#include "wsod/voc_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "wsod/csv.hpp"
#include "wsod/xml.hpp"

namespace wsod {

namespace {

std::string trim(const std::string& s) {
  size_t lo = s.find_first_not_of(" \t\r\n");
  if (lo == std::string::npos) return "";
  size_t hi = s.find_last_not_of(" \t\r\n");
  return s.substr(lo, hi - lo + 1);
}

const xml::Node& require_child(const xml::Node& parent, const char* tag,
                               const std::string& context = "") {
  if (const xml::Node* c = parent.child(tag)) return *c;
  std::string where = context.empty() ? "<" + parent.name + ">" : context;
  throw SchemaError("missing required tag <" + std::string(tag) + "> in " +
                    where);
}

double node_real(const xml::Node& node, const std::string& context) {
  const std::string text = trim(node.text);
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || !std::isfinite(value)) {
    throw DataError(context + ": <" + node.name + "> value \"" + text +
                    "\" is not a finite number");
  }
  return value;
}

int node_positive_int(const xml::Node& node) {
  double value = node_real(node, "<" + node.name + ">");
  double rounded = std::floor(value + 0.5);
  if (rounded < 1 || rounded != value) {
    throw DataError("<" + node.name + "> must be a positive integer, got \"" +
                    trim(node.text) + "\"");
  }
  return static_cast<int>(rounded);
}

std::string strip_image_extension(std::string name) {
  static const char* kExtensions[] = {".jpg", ".jpeg", ".png", ".bmp"};
  for (const char* ext : kExtensions) {
    size_t n = std::string(ext).size();
    if (name.size() > n) {
      std::string tail = name.substr(name.size() - n);
      std::transform(tail.begin(), tail.end(), tail.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (tail == ext) return name.substr(0, name.size() - n);
    }
  }
  return name;
}

long long round_half_up(double v) {
  return static_cast<long long>(std::floor(v + 0.5));
}

}  // namespace

ImageAnnotation parse_annotation(std::string_view xml_text,
                                 std::vector<std::string>* warnings) {
  xml::Node root = xml::parse(xml_text);
  if (root.name != "annotation") {
    throw SchemaError("root tag must be <annotation>, found <" + root.name +
                      ">");
  }
  ImageAnnotation a;
  a.image_id = strip_image_extension(trim(require_child(root, "filename").text));
  if (a.image_id.empty()) throw DataError("<filename> is empty");
  const xml::Node& size = require_child(root, "size");
  a.width = node_positive_int(require_child(size, "width"));
  a.height = node_positive_int(require_child(size, "height"));

  int index = 0;
  for (const xml::Node& child : root.children) {
    if (child.name != "object") continue;
    const std::string context = "object " + std::to_string(index);
    const std::string class_name =
        trim(require_child(child, "name", context).text);
    if (class_name.empty()) throw DataError(context + ": <name> is empty");
    const xml::Node& bnd = require_child(child, "bndbox", context);
    double xmin = node_real(require_child(bnd, "xmin", context), context);
    double ymin = node_real(require_child(bnd, "ymin", context), context);
    double xmax = node_real(require_child(bnd, "xmax", context), context);
    double ymax = node_real(require_child(bnd, "ymax", context), context);

    double cx0 = std::clamp(xmin, 0.0, static_cast<double>(a.width));
    double cy0 = std::clamp(ymin, 0.0, static_cast<double>(a.height));
    double cx1 = std::clamp(xmax, 0.0, static_cast<double>(a.width));
    double cy1 = std::clamp(ymax, 0.0, static_cast<double>(a.height));
    if (warnings && (cx0 != xmin || cy0 != ymin || cx1 != xmax || cy1 != ymax)) {
      warnings->push_back(a.image_id + " " + context + " (" + class_name +
                          "): box clamped to image bounds");
    }
    if (!(cx0 < cx1) || !(cy0 < cy1)) {
      throw DataError(context + " (" + class_name +
                      "): box is degenerate after clamping to image bounds");
    }
    a.objects.push_back({class_name, BBox(cx0, cy0, cx1, cy1)});
    ++index;
  }
  return a;
}

std::string write_annotation(const ImageAnnotation& annotation) {
  std::string out;
  out += "<annotation>\n";
  out += "  <filename>" + xml::escape(annotation.image_id) + "</filename>\n";
  out += "  <size>\n";
  out += "    <width>" + std::to_string(annotation.width) + "</width>\n";
  out += "    <height>" + std::to_string(annotation.height) + "</height>\n";
  out += "  </size>\n";
  for (const LabeledBox& obj : annotation.objects) {
    out += "  <object>\n";
    out += "    <name>" + xml::escape(obj.class_name) + "</name>\n";
    out += "    <bndbox>\n";
    out += "      <xmin>" + std::to_string(round_half_up(obj.bbox.xmin)) +
           "</xmin>\n";
    out += "      <ymin>" + std::to_string(round_half_up(obj.bbox.ymin)) +
           "</ymin>\n";
    out += "      <xmax>" + std::to_string(round_half_up(obj.bbox.xmax)) +
           "</xmax>\n";
    out += "      <ymax>" + std::to_string(round_half_up(obj.bbox.ymax)) +
           "</ymax>\n";
    out += "    </bndbox>\n";
    out += "  </object>\n";
  }
  out += "</annotation>\n";
  return out;
}

ImageLevelLabels image_level_labels(const ImageAnnotation& annotation) {
  ImageLevelLabels labels;
  labels.image_id = annotation.image_id;
  for (const LabeledBox& obj : annotation.objects) {
    labels.classes.insert(obj.class_name);
  }
  return labels;
}

namespace {

double parse_real_field(const std::string& token, int line_no,
                        const char* field) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (token.empty() || end != begin + token.size() || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": field " + field +
                     " (\"" + token + "\") is not a finite number");
  }
  return value;
}

}  // namespace

std::vector<Detection> parse_detections(std::string_view text) {
  std::vector<Detection> out;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::istringstream fields(body);
    std::vector<std::string> tokens;
    std::string token;
    while (fields >> token) tokens.push_back(token);
    if (tokens.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 "
                       "fields (image_id class score xmin ymin xmax ymax), "
                       "got " + std::to_string(tokens.size()));
    }
    double score = parse_real_field(tokens[2], line_no, "score");
    if (score < 0.0 || score > 1.0) {
      throw DataError("line " + std::to_string(line_no) + ": score " +
                      tokens[2] + " outside [0,1]");
    }
    double xmin = parse_real_field(tokens[3], line_no, "xmin");
    double ymin = parse_real_field(tokens[4], line_no, "ymin");
    double xmax = parse_real_field(tokens[5], line_no, "xmax");
    double ymax = parse_real_field(tokens[6], line_no, "ymax");
    try {
      out.push_back({tokens[0], tokens[1], score, BBox(xmin, ymin, xmax, ymax)});
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string write_detections(const std::vector<Detection>& detections) {
  std::string out;
  for (const Detection& d : detections) {
    out += d.image_id + " " + d.class_name + " " + fmt_fixed(d.score, 6) +
           " " + fmt_fixed(d.bbox.xmin, 2) + " " + fmt_fixed(d.bbox.ymin, 2) +
           " " + fmt_fixed(d.bbox.xmax, 2) + " " + fmt_fixed(d.bbox.ymax, 2) +
           "\n";
  }
  return out;
}

std::vector<ImageLevelLabels> parse_label_lines(std::string_view text) {
  std::vector<ImageLevelLabels> out;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::istringstream fields(body);
    ImageLevelLabels labels;
    fields >> labels.image_id;
    std::string cls;
    while (fields >> cls) labels.classes.insert(cls);
    out.push_back(std::move(labels));
  }
  return out;
}

std::string write_label_lines(const std::vector<ImageLevelLabels>& labels) {
  std::string out;
  for (const ImageLevelLabels& l : labels) {
    out += l.image_id;
    for (const std::string& cls : l.classes) out += " " + cls;
    out += "\n";
  }
  return out;
}

}  // namespace wsod
