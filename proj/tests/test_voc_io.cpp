#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "wsod/rng.hpp"
#include "wsod/voc_io.hpp"
#include "support/synth.hpp"

using namespace wsod;

namespace {

const char* kTwoDogs = R"(<?xml version="1.0"?>
<annotation>
  <folder>sample</folder>
  <filename>000007.jpg</filename>
  <size><width>353</width><height>500</height><depth>3</depth></size>
  <object>
    <name>dog</name>
    <pose>Left</pose>
    <truncated>1</truncated>
    <difficult>0</difficult>
    <bndbox><xmin>48</xmin><ymin>240</ymin><xmax>195</xmax><ymax>371</ymax></bndbox>
  </object>
  <object>
    <name>dog</name>
    <bndbox><xmin>8</xmin><ymin>12</ymin><xmax>352</xmax><ymax>498</ymax></bndbox>
  </object>
</annotation>
)";

}  // namespace

TEST_CASE("parse a VOC file with extra tags") {
  ImageAnnotation a = parse_annotation(kTwoDogs);
  CHECK(a.image_id == "000007");  // extension stripped
  CHECK(a.width == 353);
  CHECK(a.height == 500);
  REQUIRE(a.objects.size() == 2);
  CHECK(a.objects[0].class_name == "dog");
  CHECK(a.objects[0].bbox == BBox(48, 240, 195, 371));
  CHECK(a.objects[1].bbox == BBox(8, 12, 352, 498));
  CHECK(image_level_labels(a).classes == std::set<std::string>{"dog"});
}

TEST_CASE("annotation without objects") {
  ImageAnnotation a = parse_annotation(
      "<annotation><filename>x</filename>"
      "<size><width>10</width><height>10</height></size></annotation>");
  CHECK(a.objects.empty());
  CHECK(image_level_labels(a).classes.empty());
}

TEST_CASE("schema and data errors carry context") {
  CHECK_THROWS_AS(parse_annotation("<annotation><filename>x</filename>"
                                   "</annotation>"),
                  SchemaError);
  CHECK_THROWS_AS(parse_annotation("<root/>"), SchemaError);
  // xmin == xmax
  CHECK_THROWS_AS(
      parse_annotation(
          "<annotation><filename>x</filename>"
          "<size><width>10</width><height>10</height></size>"
          "<object><name>cat</name>"
          "<bndbox><xmin>3</xmin><ymin>1</ymin><xmax>3</xmax><ymax>5</ymax>"
          "</bndbox></object></annotation>"),
      DataError);
  // malformed XML reports a line
  try {
    parse_annotation("<annotation>\n<filename>x</filename>\n<oops");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("boxes past the image bounds are clamped with a warning") {
  std::vector<std::string> warnings;
  ImageAnnotation a = parse_annotation(
      "<annotation><filename>x</filename>"
      "<size><width>100</width><height>100</height></size>"
      "<object><name>cat</name>"
      "<bndbox><xmin>-5</xmin><ymin>0</ymin><xmax>50</xmax><ymax>103</ymax>"
      "</bndbox></object></annotation>",
      &warnings);
  CHECK(a.objects[0].bbox == BBox(0, 0, 50, 100));
  CHECK(warnings.size() == 1);

  // fully outside: clamping degenerates the box
  CHECK_THROWS_AS(
      parse_annotation(
          "<annotation><filename>x</filename>"
          "<size><width>100</width><height>100</height></size>"
          "<object><name>cat</name>"
          "<bndbox><xmin>200</xmin><ymin>0</ymin><xmax>300</xmax>"
          "<ymax>50</ymax></bndbox></object></annotation>"),
      DataError);
}

TEST_CASE("write/parse annotation round trip") {
  ImageAnnotation a = parse_annotation(kTwoDogs);
  CHECK(parse_annotation(write_annotation(a)) == a);

  ImageAnnotation empty{"img0", 20, 30, {}};
  const std::string xml = write_annotation(empty);
  CHECK(xml.find("<object>") == std::string::npos);
  CHECK(parse_annotation(xml) == empty);
}

TEST_CASE("round trip preserves randomized annotations") {
  wsod::Rng rng(7);
  testsupport::DatasetSpec spec;
  spec.images = 200;
  spec.max_classes = 3;
  spec.max_instances = 3;
  spec.min_box = 1;
  for (const ImageAnnotation& a : testsupport::make_dataset(rng, spec)) {
    CAPTURE(a.image_id);
    CHECK(parse_annotation(write_annotation(a)) == a);
  }
}

TEST_CASE("label extraction is idempotent under duplication") {
  wsod::Rng rng(8);
  testsupport::DatasetSpec spec;
  spec.images = 50;
  spec.max_classes = 3;
  spec.max_instances = 2;
  for (ImageAnnotation a : testsupport::make_dataset(rng, spec)) {
    if (a.objects.empty()) continue;
    const ImageLevelLabels before = image_level_labels(a);
    a.objects.push_back(a.objects[rng.next_below(a.objects.size())]);
    CHECK(image_level_labels(a) == before);
  }
}

TEST_CASE("detection line parsing") {
  const std::vector<Detection> ds = parse_detections(
      "# comment\n"
      "000001 dog 0.9 10 10 50 80\n"
      "\n"
      "000002 cat 1 0.5 0.25 20.75 30.5\n");
  REQUIRE(ds.size() == 2);
  CHECK(ds[0] == Detection{"000001", "dog", 0.9, BBox(10, 10, 50, 80)});
  CHECK(ds[1].score == 1.0);

  CHECK(parse_detections("").empty());
  CHECK_THROWS_AS(parse_detections("000001 dog 1.5 10 10 50 80"), DataError);
  CHECK_THROWS_AS(parse_detections("000001 dog 0.5 10 10 50"), ParseError);
  CHECK_THROWS_AS(parse_detections("000001 dog zero 10 10 50 80"), ParseError);
  CHECK_THROWS_AS(parse_detections("000001 dog 0.5 50 10 10 80"), DataError);
  // line numbers in messages
  try {
    parse_detections("000001 dog 0.5 10 10 50 80\nbroken line\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("detection write/parse round trip on quantized values") {
  wsod::Rng rng(9);
  std::vector<Detection> ds;
  for (int i = 0; i < 200; ++i) {
    // Values on the writer's decimal grids: scores 6dp, coordinates 2dp.
    const double score = static_cast<double>(rng.next_below(1000001)) / 1e6;
    const long long x0 = static_cast<long long>(rng.next_below(30000));
    const long long y0 = static_cast<long long>(rng.next_below(30000));
    const long long w = 1 + static_cast<long long>(rng.next_below(8000));
    const long long h = 1 + static_cast<long long>(rng.next_below(8000));
    ds.push_back({"img" + std::to_string(i % 7), "cls", score,
                  BBox(static_cast<double>(x0) / 100, static_cast<double>(y0) / 100,
                       static_cast<double>(x0 + w) / 100,
                       static_cast<double>(y0 + h) / 100)});
  }
  CHECK(parse_detections(write_detections(ds)) == ds);
}

TEST_CASE("label line round trip") {
  const std::vector<ImageLevelLabels> ls = parse_label_lines(
      "000001 dog cat\n000002\n000003 person person dog\n");
  REQUIRE(ls.size() == 3);
  CHECK(ls[0].classes == std::set<std::string>{"cat", "dog"});
  CHECK(ls[1].classes.empty());
  CHECK(ls[2].classes == std::set<std::string>{"dog", "person"});
  CHECK(parse_label_lines(write_label_lines(ls)) == ls);
}

TEST_CASE("parser returns structured errors on mangled input") {
  wsod::Rng rng(10);
  const std::string seed_doc = kTwoDogs;
  int parsed = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::string doc = seed_doc;
    const int edits = 1 + static_cast<int>(rng.next_below(8));
    for (int e = 0; e < edits; ++e) {
      const size_t pos = rng.next_below(doc.size());
      switch (rng.next_below(4)) {
        case 0: doc[pos] = static_cast<char>(rng.next_below(256)); break;
        case 1: doc.erase(pos, rng.next_below(20) + 1); break;
        case 2: doc.insert(pos, "<&]]>"); break;
        default: doc.resize(pos); break;
      }
      if (doc.empty()) doc = "<";
    }
    try {
      parse_annotation(doc);
      ++parsed;  // mutation kept the document valid
    } catch (const Error&) {
      // structured, expected
    }
  }
  CHECK(parsed < 500);
}
