#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../src/cli/commands.hpp"
#include "wsod/error.hpp"

namespace {

std::string strip(const std::string& s) {
  const size_t lo = s.find_first_not_of(" \t\r\n");
  if (lo == std::string::npos) return "";
  const size_t hi = s.find_last_not_of(" \t\r\n");
  return s.substr(lo, hi - lo + 1);
}

/// Flat `key = value` config lines, one option per line, '#' comments.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wsod::DataError("cannot open config file: " + path);
  std::vector<std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip(line);
    if (body.empty() || body[0] == '#') continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw wsod::DataError("config file " + path + " line " +
                            std::to_string(line_no) +
                            ": expected `key = value`");
    }
    const std::string key = strip(body.substr(0, eq));
    const std::string value = strip(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw wsod::DataError("config file " + path + " line " +
                            std::to_string(line_no) +
                            ": empty key or value");
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

/// Splices config-file options right after the subcommand token, so that
/// anything typed on the command line wins under take-last resolution.
void splice_config(std::vector<std::string>& args) {
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return;
  const std::vector<std::string> extra = config_file_args(config_path);
  for (size_t i = 0; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {  // the subcommand token
      args.insert(args.begin() + i + 1, extra.begin(), extra.end());
      return;
    }
  }
}

void add_common_flags(CLI::App* cmd, int* jobs) {
  if (jobs) {
    cmd->add_option("--jobs", *jobs,
                    "Worker threads (outputs do not depend on this)")
        ->check(CLI::PositiveNumber);
  }
  cmd->add_option("--config", "Config file with flat `key = value` lines; "
                              "command-line flags win");
  // Config values are spliced in before the typed flags; last one wins.
  for (CLI::Option* opt : cmd->get_options()) {
    if (opt->get_expected_min() >= 1) {
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }
}

void add_oracle_flags(CLI::App* cmd, wsod::OracleConfig& oracle) {
  cmd->add_option("--seed", oracle.seed, "Oracle seed");
  cmd->add_option("--jitter", oracle.jitter_frac,
                  "Box corner perturbation as a fraction of box size");
  cmd->add_option("--miss-rate", oracle.miss_rate,
                  "Probability of dropping a ground-truth object");
  cmd->add_option("--fp-rate", oracle.fp_rate,
                  "Expected spurious boxes per image");
  cmd->add_option("--score-noise", oracle.score_noise,
                  "Subtractive score noise amplitude");
  cmd->add_option("--epoch-gain", oracle.epoch_gain,
                  "Per-epoch multiplicative shrink of jitter and miss rate");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-ground-truth mining, refinement and VOC-2007 "
               "evaluation toolkit"};
  app.require_subcommand(1);

  wsod::cli::EvaluateOptions eval_opt;
  CLI::App* eval = app.add_subcommand(
      "evaluate", "Score detections against ground truth (per-class AP, mAP)");
  eval->add_option("--gt-dir", eval_opt.gt_dir, "Directory of VOC XML files")
      ->required();
  eval->add_option("--detections", eval_opt.detections,
                   "Detection text file")->required();
  eval->add_option("--iou-threshold", eval_opt.iou_threshold,
                   "Match threshold in (0,1)");
  eval->add_option("--output", eval_opt.output, "Report CSV path ('-' = "
                                                "stdout)");
  eval->add_option("--pr-curves", eval_opt.pr_curves,
                   "Optional per-class PR curve CSV path");
  add_common_flags(eval, &eval_opt.jobs);

  wsod::cli::MineOptions mine_opt;
  CLI::App* mine = app.add_subcommand(
      "mine-pgt", "Select top-k detections per labeled class as pseudo "
                  "ground truth");
  mine->add_option("--gt-dir", mine_opt.gt_dir,
                   "Directory of VOC XML files (only image-level labels are "
                   "used)");
  mine->add_option("--labels", mine_opt.labels_file,
                   "Image-level label file (`image_id class1 class2 ...`)");
  mine->add_option("--detections", mine_opt.detections,
                   "Detection text file")->required();
  mine->add_option("--k", mine_opt.k, "Top boxes per present class")
      ->check(CLI::PositiveNumber);
  mine->add_option("--out-dir", mine_opt.out_dir,
                   "Output directory for PGT XML files")->required();
  add_common_flags(mine, &mine_opt.jobs);

  wsod::cli::RefineLoopOptions loop_opt;
  CLI::App* loop = app.add_subcommand(
      "refine-loop", "Run the epoch-driven mining/refinement loop against a "
                     "synthetic detector");
  loop->add_option("--gt-dir", loop_opt.gt_dir, "Directory of VOC XML files")
      ->required();
  loop->add_option("--out-dir", loop_opt.out_dir,
                   "Output directory (epochs.csv + pgt/)")->required();
  loop->add_option("--timing", loop_opt.timing,
                   "Refinement timing: every|third|last3|once23");
  loop->add_option("--update", loop_opt.update,
                   "Update rule: all|best-half|worst-half");
  loop->add_option("--k", loop_opt.k, "Top boxes per present class")
      ->check(CLI::PositiveNumber);
  loop->add_option("--max-epochs", loop_opt.max_epochs, "Epoch count")
      ->check(CLI::PositiveNumber);
  loop->add_option("--iou-threshold", loop_opt.iou_threshold,
                   "Evaluation threshold");
  add_oracle_flags(loop, loop_opt.oracle);
  add_common_flags(loop, &loop_opt.jobs);

  wsod::cli::ClusterOptions cluster_opt;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "Greedy max-degree cluster-center selection over scored "
                 "proposals");
  cluster->add_option("--detections", cluster_opt.detections,
                      "Detection text file; the whole file is one candidate "
                      "set")->required();
  cluster->add_option("--edge-threshold", cluster_opt.edge_threshold,
                      "Graph edge IoU threshold (strictly greater)");
  cluster->add_option("--assign-threshold", cluster_opt.assign_threshold,
                      "Minimum IoU to join a center's cluster");
  cluster->add_option("--output", cluster_opt.output,
                      "Assignment CSV path ('-' = stdout)");
  add_common_flags(cluster, nullptr);

  wsod::cli::LossCheckOptions loss_opt;
  CLI::App* loss = app.add_subcommand(
      "loss-check", "Verify the loss kernels against fixtures and finite "
                    "differences");
  loss->add_option("--fixtures", loss_opt.fixtures,
                   "Fixture JSON file (defaults to the built-in set)");
  add_common_flags(loss, nullptr);

  wsod::cli::SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Dump synthetic detections for a ground-truth directory");
  sim->add_option("--gt-dir", sim_opt.gt_dir, "Directory of VOC XML files")
      ->required();
  sim->add_option("--output", sim_opt.output,
                  "Detection text path ('-' = stdout)");
  sim->add_option("--advance-epochs", sim_opt.advance_epochs,
                  "Advance the oracle this many epochs before detecting")
      ->check(CLI::NonNegativeNumber);
  add_oracle_flags(sim, sim_opt.oracle);
  add_common_flags(sim, &sim_opt.jobs);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    splice_config(args);
  } catch (const wsod::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  return wsod::cli::run_with_exit_code(
      [&] {
        if (eval->parsed()) {
          wsod::cli::cmd_evaluate(eval_opt, std::cout, std::cerr);
        } else if (mine->parsed()) {
          wsod::cli::cmd_mine(mine_opt, std::cerr);
        } else if (loop->parsed()) {
          wsod::cli::cmd_refine_loop(loop_opt, std::cerr);
        } else if (cluster->parsed()) {
          wsod::cli::cmd_cluster(cluster_opt, std::cout, std::cerr);
        } else if (loss->parsed()) {
          if (!wsod::cli::cmd_loss_check(loss_opt, std::cout)) {
            throw wsod::Error("loss kernel verification failed");
          }
        } else if (sim->parsed()) {
          wsod::cli::cmd_simulate(sim_opt, std::cout, std::cerr);
        }
      },
      std::cerr);
}
