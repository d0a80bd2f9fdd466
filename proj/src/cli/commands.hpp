#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsod/refinement.hpp"
#include "wsod/sim_detector.hpp"
#include "wsod/voc_io.hpp"

namespace wsod::cli {

/// Reads every *.xml file of a directory (sorted by filename) as a VOC
/// annotation. Parse failures are rethrown with the filename attached;
/// clamp warnings go to `log`.
std::vector<ImageAnnotation> load_annotation_dir(const std::string& dir,
                                                 std::ostream& log);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

struct EvaluateOptions {
  std::string gt_dir;
  std::string detections;
  std::string output = "-";  // "-" = stdout
  std::string pr_curves;     // optional CSV dump
  double iou_threshold = 0.5;
  int jobs = 1;
};
void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out,
                  std::ostream& log);

struct MineOptions {
  std::string gt_dir;       // labels derived from annotations (boxes unused)
  std::string labels_file;  // alternative: image-level label lines
  std::string detections;
  std::string out_dir;
  int k = 1;
  int jobs = 1;
};
void cmd_mine(const MineOptions& opt, std::ostream& log);

struct RefineLoopOptions {
  std::string gt_dir;
  std::string out_dir;
  std::string timing = "every";  // every|third|last3|once23
  std::string update = "all";    // all|best-half|worst-half
  int k = 1;
  int max_epochs = 12;
  double iou_threshold = 0.5;
  OracleConfig oracle;
  int jobs = 1;
};
void cmd_refine_loop(const RefineLoopOptions& opt, std::ostream& log);

struct ClusterOptions {
  std::string detections;
  std::string output = "-";
  double edge_threshold = 0.4;
  double assign_threshold = 0.5;
};
void cmd_cluster(const ClusterOptions& opt, std::ostream& out,
                 std::ostream& log);

struct LossCheckOptions {
  std::string fixtures;  // empty = built-in fixture set
};
/// Runs the fixture cases, the smooth-L1 finite-difference suite, and
/// randomized re-summation checks; prints a per-kernel report. Returns
/// true when everything passed.
bool cmd_loss_check(const LossCheckOptions& opt, std::ostream& out);

struct SimulateOptions {
  std::string gt_dir;
  std::string output = "-";
  int advance_epochs = 0;
  OracleConfig oracle;
  int jobs = 1;
};
void cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                  std::ostream& log);

TimingRule parse_timing(const std::string& name);
UpdateRule parse_update(const std::string& name);

/// Maps exceptions to process exit codes: 0 ok, 2 bad input data,
/// 1 anything else.
int run_with_exit_code(const std::function<void()>& body, std::ostream& log);

}  // namespace wsod::cli
