#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wsod/clustering.hpp"
#include "wsod/csv.hpp"
#include "wsod/error.hpp"
#include "wsod/evaluation.hpp"
#include "wsod/loss_kernels.hpp"
#include "wsod/pgt_miner.hpp"
#include "wsod/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wsod::cli {

namespace {

void check_writable_id(const std::string& image_id) {
  if (image_id.find('/') != std::string::npos ||
      image_id.find('\\') != std::string::npos ||
      image_id.find("..") != std::string::npos) {
    throw DataError("image id \"" + image_id +
                    "\" cannot be used as an output filename");
  }
}

void write_pgt_tree(const std::vector<ScoredPgt>& pgt, const fs::path& dir) {
  fs::create_directories(dir);
  for (const ScoredPgt& p : pgt) {
    check_writable_id(p.image_id);
    write_file((dir / (p.image_id + ".xml")).string(),
               write_annotation(to_annotation(p)));
  }
}

struct LabeledInput {
  std::vector<ImageLevelLabels> labels;
  std::map<std::string, ImageSize> sizes;
};

LabeledInput labels_from_annotations(const std::vector<ImageAnnotation>& gts) {
  LabeledInput in;
  for (const ImageAnnotation& a : gts) {
    in.labels.push_back(image_level_labels(a));
    in.sizes[a.image_id] = {a.width, a.height};
  }
  return in;
}

/// Sizes for label-file mining: the smallest integer box covering every
/// detection of the image (1x1 when it has none).
LabeledInput labels_from_file(const std::string& path,
                              const std::vector<Detection>& dets) {
  LabeledInput in;
  in.labels = parse_label_lines(read_file(path));
  for (const ImageLevelLabels& l : in.labels) {
    in.sizes[l.image_id] = {1, 1};
  }
  for (const Detection& d : dets) {
    auto it = in.sizes.find(d.image_id);
    if (it == in.sizes.end()) continue;  // mine_dataset reports unknown ids
    it->second.width = std::max(
        it->second.width, static_cast<int>(std::ceil(d.bbox.xmax)));
    it->second.height = std::max(
        it->second.height, static_cast<int>(std::ceil(d.bbox.ymax)));
  }
  return in;
}

OracleConfig validated(const OracleConfig& config) {
  DetectorOracle probe(config);  // constructor validates
  return probe.config();
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("failed while writing file: " + path);
}

std::vector<ImageAnnotation> load_annotation_dir(const std::string& dir,
                                                 std::ostream& log) {
  if (!fs::is_directory(dir)) {
    throw DataError("annotation directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ImageAnnotation> out;
  for (const fs::path& file : files) {
    std::vector<std::string> warnings;
    try {
      out.push_back(parse_annotation(read_file(file.string()), &warnings));
    } catch (const DataError& e) {
      throw DataError(file.string() + ": " + e.what());
    }
    for (const std::string& w : warnings) {
      log << "warning: " << file.string() << ": " << w << "\n";
    }
  }
  return out;
}

void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out,
                  std::ostream& log) {
  const std::vector<ImageAnnotation> gts = load_annotation_dir(opt.gt_dir, log);
  const std::vector<Detection> dets = parse_detections(read_file(opt.detections));

  std::map<std::string, PRCurve> curves;
  const EvalReport report =
      evaluate(dets, gts, opt.iou_threshold,
               opt.jobs, opt.pr_curves.empty() ? nullptr : &curves);

  // Aggregate per-class match counts at the evaluation threshold.
  std::map<std::string, std::map<std::string, std::vector<BBox>>> gt_by_class;
  for (const ImageAnnotation& a : gts) {
    for (const LabeledBox& o : a.objects) {
      gt_by_class[o.class_name][a.image_id].push_back(o.bbox);
    }
  }
  std::map<std::string, std::map<std::string, std::vector<Detection>>>
      det_by_class;
  for (const Detection& d : dets) {
    det_by_class[d.class_name][d.image_id].push_back(d);
  }
  for (const auto& [cls, per_image_gt] : gt_by_class) {
    MatchResult total;
    total.iou_threshold = opt.iou_threshold;
    std::set<std::string> ids;
    for (const auto& [id, unused] : per_image_gt) ids.insert(id);
    auto det_it = det_by_class.find(cls);
    if (det_it != det_by_class.end()) {
      for (const auto& [id, unused] : det_it->second) ids.insert(id);
    }
    for (const std::string& id : ids) {
      static const std::vector<Detection> kNoDets;
      static const std::vector<BBox> kNoBoxes;
      const std::vector<Detection>* image_dets = &kNoDets;
      if (det_it != det_by_class.end()) {
        auto it = det_it->second.find(id);
        if (it != det_it->second.end()) image_dets = &it->second;
      }
      const std::vector<BBox>* image_gts = &kNoBoxes;
      auto git = per_image_gt.find(id);
      if (git != per_image_gt.end()) image_gts = &git->second;
      MatchResult m =
          match_class_in_image(*image_dets, *image_gts, opt.iou_threshold);
      total.is_tp.insert(total.is_tp.end(), m.is_tp.begin(), m.is_tp.end());
      total.fn += m.fn;
    }
    const auto [precision, recall] = precision_recall(total);
    log << "class=" << cls << " tp=" << total.tp() << " fp=" << total.fp()
        << " fn=" << total.fn << " precision=" << fmt_fixed(precision, 6)
        << " recall=" << fmt_fixed(recall, 6) << "\n";
  }

  const std::string csv = report_csv(report);
  if (opt.output == "-") {
    out << csv;
  } else {
    write_file(opt.output, csv);
  }
  if (!opt.pr_curves.empty()) {
    write_file(opt.pr_curves, pr_curves_csv(curves));
  }
  log << "evaluated " << dets.size() << " detections on " << gts.size()
      << " images: mAP=" << fmt_fixed(report.map, 6) << "\n";
}

void cmd_mine(const MineOptions& opt, std::ostream& log) {
  if (opt.gt_dir.empty() == opt.labels_file.empty()) {
    throw DataError("mine-pgt needs exactly one of --gt-dir or --labels");
  }
  const std::vector<Detection> dets = parse_detections(read_file(opt.detections));
  LabeledInput in = opt.gt_dir.empty()
                        ? labels_from_file(opt.labels_file, dets)
                        : labels_from_annotations(
                              load_annotation_dir(opt.gt_dir, log));

  std::vector<MiningWarning> warnings;
  const std::vector<ScoredPgt> pgt =
      mine_dataset(dets, in.labels, in.sizes, {opt.k}, &warnings, opt.jobs);
  for (const MiningWarning& w : warnings) {
    log << "warning: image " << w.image_id << " class " << w.class_name << ": "
        << w.message << "\n";
  }
  write_pgt_tree(pgt, opt.out_dir);
  size_t objects = 0;
  for (const ScoredPgt& p : pgt) objects += p.entries.size();
  log << "mined " << objects << " pseudo-ground-truth objects over "
      << pgt.size() << " images (k=" << opt.k << ") into " << opt.out_dir
      << "\n";
}

TimingRule parse_timing(const std::string& name) {
  if (name == "every") return TimingRule::kEveryEpoch;
  if (name == "third") return TimingRule::kEveryThird;
  if (name == "last3") return TimingRule::kLastThree;
  if (name == "once23") return TimingRule::kOnceAtTwoThirds;
  throw DataError("unknown timing rule \"" + name +
                  "\" (expected every|third|last3|once23)");
}

UpdateRule parse_update(const std::string& name) {
  if (name == "all") return UpdateRule::kAll;
  if (name == "best-half") return UpdateRule::kBestHalf;
  if (name == "worst-half") return UpdateRule::kWorstHalf;
  throw DataError("unknown update rule \"" + name +
                  "\" (expected all|best-half|worst-half)");
}

void cmd_refine_loop(const RefineLoopOptions& opt, std::ostream& log) {
  const std::vector<ImageAnnotation> gts = load_annotation_dir(opt.gt_dir, log);
  RefinementPolicy policy{parse_timing(opt.timing), parse_update(opt.update),
                          opt.k};
  if (policy.k < 1) throw DataError("k must be >= 1");
  if (auto warning = policy_warning(policy)) {
    log << "warning: " << *warning << "\n";
  }

  DetectorOracle oracle(validated(opt.oracle));
  const RefinementRun run = run_refinement_loop(
      oracle, gts, policy, opt.max_epochs, opt.iou_threshold, opt.jobs);

  fs::create_directories(opt.out_dir);
  write_file((fs::path(opt.out_dir) / "epochs.csv").string(),
             epoch_csv(run.epochs));
  write_pgt_tree(run.final_pgt, fs::path(opt.out_dir) / "pgt");

  int refinements = 0;
  for (const EpochRecord& e : run.epochs) refinements += e.refined ? 1 : 0;
  log << "ran " << opt.max_epochs << " epochs with " << refinements
      << " refinement(s); final map="
      << fmt_fixed(run.epochs.back().map, 6) << "\n";
}

void cmd_cluster(const ClusterOptions& opt, std::ostream& out,
                 std::ostream& log) {
  const std::vector<Detection> dets = parse_detections(read_file(opt.detections));
  std::vector<ScoredProposal> proposals;
  proposals.reserve(dets.size());
  for (size_t i = 0; i < dets.size(); ++i) {
    proposals.push_back({dets[i].bbox, dets[i].score, static_cast<int>(i)});
  }
  const ProposalGraph graph = build_graph(proposals, opt.edge_threshold);
  const std::vector<ScoredProposal> centers = select_centers(graph, proposals);
  const ClusterAssignment assignment =
      assign_clusters(proposals, centers, opt.assign_threshold);

  const std::string csv = assignment_csv(assignment);
  if (opt.output == "-") {
    out << csv;
  } else {
    write_file(opt.output, csv);
  }
  log << "clustered " << proposals.size() << " proposals into "
      << centers.size() << " cluster(s) (" << graph.edge_count()
      << " graph edges)\n";
}

void cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                  std::ostream& log) {
  const std::vector<ImageAnnotation> gts = load_annotation_dir(opt.gt_dir, log);
  DetectorOracle oracle(validated(opt.oracle));
  for (int i = 0; i < opt.advance_epochs; ++i) oracle.advance_epoch();
  const std::vector<Detection> dets = oracle.detect_all(gts, opt.jobs);
  const std::string text = write_detections(dets);
  if (opt.output == "-") {
    out << text;
  } else {
    write_file(opt.output, text);
  }
  log << "simulated " << dets.size() << " detections over " << gts.size()
      << " images at epoch " << oracle.epochs_advanced() << "\n";
}

// ---------------------------------------------------------------------------
// loss-check
// ---------------------------------------------------------------------------

namespace {

// Shipped fixture set; data/loss_fixtures.json carries the same content.
constexpr const char* kDefaultFixtures = R"JSON({
  "smooth_l1": [
    {"x": 0.0, "expected": 0.0},
    {"x": 1.0, "expected": 0.5},
    {"x": -1.0, "expected": 0.5},
    {"x": 2.0, "expected": 1.5},
    {"x": 0.5, "expected": 0.125}
  ],
  "frcnn": [
    {"p": [1.0], "u": 0, "predicted": [9, 9, 9, 9], "target": [0, 0, 0, 0],
     "lambda": 1.0, "expected": 0.0},
    {"p": [0.0, 1.0], "u": 1, "predicted": [1, 2, 3, 4],
     "target": [1, 2, 3, 4], "lambda": 1.0, "expected": 0.0},
    {"p": [0.5, 0.5], "u": 1, "predicted": [0.5, 0, 0, 0],
     "target": [0, 0, 0, 0], "lambda": 1.0,
     "expected": 0.8181471805599453}
  ],
  "rpn": [
    {"anchors": [{"p": 1.0, "label": 1, "predicted": [0, 0, 0, 0],
                  "target": [0, 0, 0, 0]}],
     "n_cls": 1.0, "n_reg": 1.0, "lambda": 1.0, "expected": 0.0},
    {"anchors": [{"p": 0.5, "label": 0, "predicted": [0, 0, 0, 0],
                  "target": [0, 0, 0, 0]}],
     "n_cls": 1.0, "n_reg": 1.0, "lambda": 7.0,
     "expected": 0.6931471805599453}
  ],
  "bag": [
    {"R": 1, "clusters": [{"confidence": 1.0, "member_scores": [1.0]}],
     "background": [], "expected": 0.0},
    {"R": 1, "clusters": [],
     "background": [{"weight": 1.0, "score": 1.0}], "expected": 0.0},
    {"R": 2, "clusters": [{"confidence": 0.5, "member_scores": [0.8, 0.6]}],
     "background": [], "expected": 0.17833747196936622}
  ]
})JSON";

constexpr double kFixtureTolerance = 1e-9;

std::array<double, 4> read_vec4(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw DataError("loss fixture: expected a 4-element coordinate array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

struct KernelReport {
  int total = 0;
  int passed = 0;
  double max_error = 0.0;

  void record(double got, double expected) {
    ++total;
    const double err = std::fabs(got - expected);
    max_error = std::max(max_error, err);
    if (err <= kFixtureTolerance) ++passed;
  }
  bool ok() const { return passed == total; }
};

json load_fixtures(const std::string& path) {
  const std::string text = path.empty() ? kDefaultFixtures : read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("loss fixture file is not valid JSON: " +
                    std::string(e.what()));
  }
}

}  // namespace

bool cmd_loss_check(const LossCheckOptions& opt, std::ostream& out) {
  const json fixtures = load_fixtures(opt.fixtures);
  if (!fixtures.is_object()) {
    throw DataError("loss fixture file must hold a JSON object");
  }

  KernelReport smooth, frcnn, rpn, bag;
  try {
    for (const json& c : fixtures.value("smooth_l1", json::array())) {
      smooth.record(smooth_l1(c.at("x").get<double>()),
                    c.at("expected").get<double>());
    }
    for (const json& c : fixtures.value("frcnn", json::array())) {
      ClassDistribution p{c.at("p").get<std::vector<double>>()};
      RegressionTarget t{read_vec4(c.at("predicted")),
                         read_vec4(c.at("target"))};
      frcnn.record(frcnn_loss(p, c.at("u").get<int>(), t,
                              c.value("lambda", 1.0)),
                   c.at("expected").get<double>());
    }
    for (const json& c : fixtures.value("rpn", json::array())) {
      RpnBatch batch;
      for (const json& a : c.at("anchors")) {
        batch.anchors.push_back({a.at("p").get<double>(),
                                 a.at("label").get<int>(),
                                 read_vec4(a.at("predicted")),
                                 read_vec4(a.at("target"))});
      }
      batch.n_cls = c.value("n_cls", 1.0);
      batch.n_reg = c.value("n_reg", 1.0);
      batch.lambda = c.value("lambda", 1.0);
      rpn.record(rpn_loss(batch), c.at("expected").get<double>());
    }
    for (const json& c : fixtures.value("bag", json::array())) {
      BagLossInput input;
      input.proposal_count = c.at("R").get<int>();
      for (const json& cl : c.at("clusters")) {
        input.clusters.push_back(
            {cl.at("confidence").get<double>(),
             cl.at("member_scores").get<std::vector<double>>()});
      }
      for (const json& b : c.at("background")) {
        input.background.push_back(
            {b.at("weight").get<double>(), b.at("score").get<double>()});
      }
      bag.record(pcl_bag_loss(input), c.at("expected").get<double>());
    }
  } catch (const json::exception& e) {
    throw DataError("loss fixture file is malformed: " + std::string(e.what()));
  }

  // Central finite differences against the analytic smooth-L1 derivative,
  // away from the kink at |x| = 1.
  Rng rng(1729);
  double fd_max = 0.0;
  int fd_points = 0;
  while (fd_points < 100) {
    const double x = rng.uniform(-3.0, 3.0);
    if (std::fabs(x) >= 0.999 && std::fabs(x) <= 1.001) continue;
    ++fd_points;
    const double h = 1e-5;
    const double fd = (smooth_l1(x + h) - smooth_l1(x - h)) / (2.0 * h);
    const double analytic = std::fabs(x) < 1.0 ? x : (x > 0 ? 1.0 : -1.0);
    fd_max = std::max(fd_max, std::fabs(fd - analytic));
  }
  const bool fd_ok = fd_max < 1e-6;

  // Randomized re-summation: each kernel against a direct recomputation.
  Rng gen(20240817);
  double resum_max = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 1 + static_cast<int>(gen.next_below(5));
    std::vector<double> p(classes + 1);
    double sum = 0.0;
    for (double& v : p) sum += (v = 0.05 + gen.next_double());
    for (double& v : p) v /= sum;
    const int u = static_cast<int>(gen.next_below(p.size()));
    RegressionTarget t;
    for (int i = 0; i < 4; ++i) {
      t.predicted[i] = gen.uniform(-2.0, 2.0);
      t.target[i] = gen.uniform(-2.0, 2.0);
    }
    const double lambda = gen.uniform(0.0, 2.0);
    double expected = -std::log(p[u]);
    if (u >= 1) {
      for (int i = 0; i < 4; ++i) {
        const double d = t.predicted[i] - t.target[i];
        expected += lambda * (std::fabs(d) < 1.0 ? 0.5 * d * d
                                                 : std::fabs(d) - 0.5);
      }
    }
    resum_max = std::max(
        resum_max, std::fabs(frcnn_loss({p}, u, t, lambda) - expected));
  }
  const bool resum_ok = resum_max < 1e-12;

  out << "smooth_l1: fixtures " << smooth.passed << "/" << smooth.total
      << ", finite-difference max error " << fd_max << " (limit 1e-6)\n";
  out << "frcnn_loss: fixtures " << frcnn.passed << "/" << frcnn.total
      << ", re-summation max error " << resum_max << "\n";
  out << "rpn_loss: fixtures " << rpn.passed << "/" << rpn.total << "\n";
  out << "pcl_bag_loss: fixtures " << bag.passed << "/" << bag.total << "\n";

  const bool ok = smooth.ok() && frcnn.ok() && rpn.ok() && bag.ok() && fd_ok &&
                  resum_ok;
  out << "loss-check: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

int run_with_exit_code(const std::function<void()>& body, std::ostream& log) {
  try {
    body();
    return 0;
  } catch (const DataError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wsod::cli
