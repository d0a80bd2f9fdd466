#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wsod/clustering.hpp"
#include "wsod/csv.hpp"
#include "wsod/error.hpp"
#include "wsod/evaluation.hpp"
#include "wsod/loss_kernels.hpp"
#include "wsod/pgt_miner.hpp"
#include "wsod/refinement.hpp"
#include "wsod/sim_detector.hpp"
#include "wsod/voc_io.hpp"

namespace py = pybind11;
using namespace wsod;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudo-ground-truth mining, refinement scheduling, proposal "
            "clustering, VOC-2007 evaluation and detection loss kernels";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<BBox>(m, "BBox")
      .def(py::init<double, double, double, double>(), py::arg("xmin"),
           py::arg("ymin"), py::arg("xmax"), py::arg("ymax"))
      .def_readonly("xmin", &BBox::xmin)
      .def_readonly("ymin", &BBox::ymin)
      .def_readonly("xmax", &BBox::xmax)
      .def_readonly("ymax", &BBox::ymax)
      .def("width", &BBox::width)
      .def("height", &BBox::height)
      .def(py::self == py::self)
      .def("__repr__", [](const BBox& b) {
        std::ostringstream s;
        s << "BBox(" << b.xmin << ", " << b.ymin << ", " << b.xmax << ", "
          << b.ymax << ")";
        return s.str();
      });
  m.def("area", &area);
  m.def("iou", &iou);

  py::class_<LabeledBox>(m, "LabeledBox")
      .def(py::init<std::string, BBox>(), py::arg("class_name"),
           py::arg("bbox"))
      .def_readwrite("class_name", &LabeledBox::class_name)
      .def_readwrite("bbox", &LabeledBox::bbox)
      .def(py::self == py::self);

  py::class_<ImageAnnotation>(m, "ImageAnnotation")
      .def(py::init<>())
      .def(py::init([](std::string image_id, int width, int height,
                       std::vector<LabeledBox> objects) {
             return ImageAnnotation{std::move(image_id), width, height,
                                    std::move(objects)};
           }),
           py::arg("image_id"), py::arg("width"), py::arg("height"),
           py::arg("objects") = std::vector<LabeledBox>{})
      .def_readwrite("image_id", &ImageAnnotation::image_id)
      .def_readwrite("width", &ImageAnnotation::width)
      .def_readwrite("height", &ImageAnnotation::height)
      .def_readwrite("objects", &ImageAnnotation::objects)
      .def(py::self == py::self);

  py::class_<ImageLevelLabels>(m, "ImageLevelLabels")
      .def(py::init<>())
      .def(py::init([](std::string image_id, std::set<std::string> classes) {
             return ImageLevelLabels{std::move(image_id), std::move(classes)};
           }),
           py::arg("image_id"), py::arg("classes"))
      .def_readwrite("image_id", &ImageLevelLabels::image_id)
      .def_readwrite("classes", &ImageLevelLabels::classes)
      .def(py::self == py::self);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](std::string image_id, std::string class_name,
                       double score, BBox bbox) {
             return Detection{std::move(image_id), std::move(class_name),
                              score, bbox};
           }),
           py::arg("image_id"), py::arg("class_name"), py::arg("score"),
           py::arg("bbox"))
      .def_readwrite("image_id", &Detection::image_id)
      .def_readwrite("class_name", &Detection::class_name)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("bbox", &Detection::bbox)
      .def(py::self == py::self);

  m.def("parse_annotation",
        [](const std::string& text) { return parse_annotation(text); });
  m.def("write_annotation", &write_annotation);
  m.def("image_level_labels", &image_level_labels);
  m.def("parse_detections",
        [](const std::string& text) { return parse_detections(text); });
  m.def("write_detections", &write_detections);
  m.def("parse_label_lines",
        [](const std::string& text) { return parse_label_lines(text); });
  m.def("write_label_lines", &write_label_lines);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("is_tp", &MatchResult::is_tp)
      .def_readonly("fn", &MatchResult::fn)
      .def_readonly("iou_threshold", &MatchResult::iou_threshold)
      .def("tp", &MatchResult::tp)
      .def("fp", &MatchResult::fp);
  m.def("match_class_in_image", &match_class_in_image, py::arg("dets"),
        py::arg("gts"), py::arg("iou_threshold") = 0.5);
  m.def("precision_recall", &precision_recall);

  py::class_<PrPoint>(m, "PrPoint")
      .def_readonly("score", &PrPoint::score)
      .def_readonly("recall", &PrPoint::recall)
      .def_readonly("precision", &PrPoint::precision);
  py::class_<PRCurve>(m, "PRCurve")
      .def_readonly("points", &PRCurve::points)
      .def_readonly("total_positives", &PRCurve::total_positives)
      .def("has_ground_truth", &PRCurve::has_ground_truth);
  m.def("pr_curve", &pr_curve, py::arg("dets"), py::arg("gts_by_image"),
        py::arg("iou_threshold") = 0.5);
  m.def("ap_11point", &ap_11point);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("ap_by_class", &EvalReport::ap_by_class)
      .def_readonly("map", &EvalReport::map);
  m.def("evaluate",
        [](const std::vector<Detection>& dets,
           const std::vector<ImageAnnotation>& gt, double iou_threshold,
           int jobs) { return evaluate(dets, gt, iou_threshold, jobs); },
        py::arg("dets"), py::arg("gt"), py::arg("iou_threshold") = 0.5,
        py::arg("jobs") = 1);
  m.def("report_csv", &report_csv);

  py::class_<ImageSize>(m, "ImageSize")
      .def(py::init([](int width, int height) {
             return ImageSize{width, height};
           }),
           py::arg("width"), py::arg("height"))
      .def_readwrite("width", &ImageSize::width)
      .def_readwrite("height", &ImageSize::height);
  py::class_<MiningConfig>(m, "MiningConfig")
      .def(py::init([](int k) { return MiningConfig{k}; }), py::arg("k") = 1)
      .def_readwrite("k", &MiningConfig::k);
  py::class_<ScoredPgtEntry>(m, "ScoredPgtEntry")
      .def(py::init([](std::string class_name, BBox bbox, double score) {
             return ScoredPgtEntry{std::move(class_name), bbox, score};
           }),
           py::arg("class_name"), py::arg("bbox"), py::arg("score"))
      .def_readwrite("class_name", &ScoredPgtEntry::class_name)
      .def_readwrite("bbox", &ScoredPgtEntry::bbox)
      .def_readwrite("score", &ScoredPgtEntry::score)
      .def(py::self == py::self);
  py::class_<ScoredPgt>(m, "ScoredPgt")
      .def(py::init<>())
      .def_readwrite("image_id", &ScoredPgt::image_id)
      .def_readwrite("width", &ScoredPgt::width)
      .def_readwrite("height", &ScoredPgt::height)
      .def_readwrite("entries", &ScoredPgt::entries)
      .def(py::self == py::self);
  m.def("to_annotation", &to_annotation);
  m.def("pgt_as_detections", &pgt_as_detections);
  m.def("mine_image",
        [](const std::vector<Detection>& dets, const ImageLevelLabels& labels,
           int k, ImageSize size) {
          return mine_image(dets, labels, {k}, size);
        },
        py::arg("dets"), py::arg("labels"), py::arg("k"), py::arg("size"));
  m.def("mine_dataset",
        [](const std::vector<Detection>& dets,
           const std::vector<ImageLevelLabels>& labels,
           const std::map<std::string, ImageSize>& sizes, int k, int jobs) {
          return mine_dataset(dets, labels, sizes, {k}, nullptr, jobs);
        },
        py::arg("dets"), py::arg("labels"), py::arg("sizes"), py::arg("k"),
        py::arg("jobs") = 1);

  py::enum_<TimingRule>(m, "TimingRule")
      .value("EVERY_EPOCH", TimingRule::kEveryEpoch)
      .value("EVERY_THIRD", TimingRule::kEveryThird)
      .value("LAST_THREE", TimingRule::kLastThree)
      .value("ONCE_AT_TWO_THIRDS", TimingRule::kOnceAtTwoThirds);
  py::enum_<UpdateRule>(m, "UpdateRule")
      .value("ALL", UpdateRule::kAll)
      .value("BEST_HALF", UpdateRule::kBestHalf)
      .value("WORST_HALF", UpdateRule::kWorstHalf);
  py::class_<RefinementPolicy>(m, "RefinementPolicy")
      .def(py::init([](TimingRule timing, UpdateRule update, int k) {
             return RefinementPolicy{timing, update, k};
           }),
           py::arg("timing"), py::arg("update"), py::arg("k"))
      .def_readwrite("timing", &RefinementPolicy::timing)
      .def_readwrite("update", &RefinementPolicy::update)
      .def_readwrite("k", &RefinementPolicy::k);
  m.def("policy_warning", &policy_warning);
  m.def("should_refine", &should_refine, py::arg("epoch"),
        py::arg("max_epochs"), py::arg("timing"));
  m.def("refine_image_class", &refine_image_class, py::arg("current"),
        py::arg("fresh"), py::arg("update"), py::arg("k"));
  m.def("refine_dataset",
        [](const std::vector<ScoredPgt>& pgt,
           const std::vector<Detection>& fresh,
           const std::vector<ImageLevelLabels>& labels,
           const RefinementPolicy& policy, int jobs) {
          return refine_dataset(pgt, fresh, labels, policy, nullptr, jobs);
        },
        py::arg("pgt"), py::arg("fresh"), py::arg("labels"), py::arg("policy"),
        py::arg("jobs") = 1);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("refined", &EpochRecord::refined)
      .def_readonly("map", &EpochRecord::map);
  py::class_<RefinementRun>(m, "RefinementRun")
      .def_readonly("epochs", &RefinementRun::epochs)
      .def_readonly("final_pgt", &RefinementRun::final_pgt);
  m.def("run_refinement_loop", &run_refinement_loop, py::arg("oracle"),
        py::arg("gt"), py::arg("policy"), py::arg("max_epochs"),
        py::arg("iou_threshold") = 0.5, py::arg("jobs") = 1);
  m.def("epoch_csv", &epoch_csv);

  py::class_<ScoredProposal>(m, "ScoredProposal")
      .def(py::init([](BBox bbox, double score, int index) {
             return ScoredProposal{bbox, score, index};
           }),
           py::arg("bbox"), py::arg("score"), py::arg("index"))
      .def_readwrite("bbox", &ScoredProposal::bbox)
      .def_readwrite("score", &ScoredProposal::score)
      .def_readwrite("index", &ScoredProposal::index)
      .def(py::self == py::self);
  py::class_<ProposalGraph>(m, "ProposalGraph")
      .def_readonly("vertex_count", &ProposalGraph::vertex_count)
      .def_readonly("adjacency", &ProposalGraph::adjacency)
      .def_readonly("edge_threshold", &ProposalGraph::edge_threshold)
      .def("edge_count", &ProposalGraph::edge_count);
  py::class_<ClusterAssignment>(m, "ClusterAssignment")
      .def_readonly("centers", &ClusterAssignment::centers)
      .def_readonly("proposal_index", &ClusterAssignment::proposal_index)
      .def_readonly("cluster_of", &ClusterAssignment::cluster_of)
      .def_readonly("center_iou", &ClusterAssignment::center_iou);
  m.def("build_graph", &build_graph, py::arg("candidates"),
        py::arg("edge_threshold") = 0.4);
  m.def("select_centers", &select_centers, py::arg("graph"),
        py::arg("candidates"));
  m.def("assign_clusters", &assign_clusters, py::arg("proposals"),
        py::arg("centers"), py::arg("assign_threshold") = 0.5);
  m.attr("BACKGROUND_CLUSTER") = kBackgroundCluster;

  m.def("smooth_l1", &smooth_l1);
  m.def("frcnn_loss",
        [](const std::vector<double>& p, int u,
           const std::array<double, 4>& predicted,
           const std::array<double, 4>& target, double lambda) {
          return frcnn_loss({p}, u, {predicted, target}, lambda);
        },
        py::arg("p"), py::arg("u"), py::arg("predicted"), py::arg("target"),
        py::arg("lambda") = 1.0);
  py::class_<RpnAnchor>(m, "RpnAnchor")
      .def(py::init([](double p, int label, std::array<double, 4> predicted,
                       std::array<double, 4> target) {
             return RpnAnchor{p, label, predicted, target};
           }),
           py::arg("p"), py::arg("label"),
           py::arg("predicted") = std::array<double, 4>{},
           py::arg("target") = std::array<double, 4>{})
      .def_readwrite("p", &RpnAnchor::p)
      .def_readwrite("label", &RpnAnchor::label);
  m.def("rpn_loss",
        [](const std::vector<RpnAnchor>& anchors, double n_cls, double n_reg,
           double lambda) {
          return rpn_loss({anchors, n_cls, n_reg, lambda});
        },
        py::arg("anchors"), py::arg("n_cls") = 1.0, py::arg("n_reg") = 1.0,
        py::arg("lambda") = 1.0);
  py::class_<ProposalCluster>(m, "ProposalCluster")
      .def(py::init([](double confidence, std::vector<double> member_scores) {
             return ProposalCluster{confidence, std::move(member_scores)};
           }),
           py::arg("confidence"), py::arg("member_scores"))
      .def_readwrite("confidence", &ProposalCluster::confidence)
      .def_readwrite("member_scores", &ProposalCluster::member_scores);
  py::class_<BackgroundProposal>(m, "BackgroundProposal")
      .def(py::init([](double weight, double score) {
             return BackgroundProposal{weight, score};
           }),
           py::arg("weight"), py::arg("score"))
      .def_readwrite("weight", &BackgroundProposal::weight)
      .def_readwrite("score", &BackgroundProposal::score);
  m.def("pcl_bag_loss",
        [](int proposal_count, const std::vector<ProposalCluster>& clusters,
           const std::vector<BackgroundProposal>& background) {
          return pcl_bag_loss({proposal_count, clusters, background});
        },
        py::arg("proposal_count"), py::arg("clusters"),
        py::arg("background") = std::vector<BackgroundProposal>{});

  py::class_<OracleConfig>(m, "OracleConfig")
      .def(py::init([](uint64_t seed, double jitter_frac, double miss_rate,
                       double fp_rate, double score_noise, double epoch_gain) {
             return OracleConfig{seed,    jitter_frac, miss_rate,
                                 fp_rate, score_noise, epoch_gain};
           }),
           py::arg("seed") = 0, py::arg("jitter_frac") = 0.0,
           py::arg("miss_rate") = 0.0, py::arg("fp_rate") = 0.0,
           py::arg("score_noise") = 0.0, py::arg("epoch_gain") = 0.0)
      .def_readwrite("seed", &OracleConfig::seed)
      .def_readwrite("jitter_frac", &OracleConfig::jitter_frac)
      .def_readwrite("miss_rate", &OracleConfig::miss_rate)
      .def_readwrite("fp_rate", &OracleConfig::fp_rate)
      .def_readwrite("score_noise", &OracleConfig::score_noise)
      .def_readwrite("epoch_gain", &OracleConfig::epoch_gain);
  py::class_<DetectorOracle>(m, "DetectorOracle")
      .def(py::init<const OracleConfig&>(), py::arg("config"))
      .def("advance_epoch", &DetectorOracle::advance_epoch)
      .def("epochs_advanced", &DetectorOracle::epochs_advanced)
      .def("effective_jitter", &DetectorOracle::effective_jitter)
      .def("effective_miss_rate", &DetectorOracle::effective_miss_rate)
      .def("detect", &DetectorOracle::detect, py::arg("gt"))
      .def("detect_all", &DetectorOracle::detect_all, py::arg("gts"),
           py::arg("jobs") = 1);

  m.def("fmt_fixed", &fmt_fixed, py::arg("value"), py::arg("decimals"));
}
