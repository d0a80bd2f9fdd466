#pragma once

#include <array>
#include <vector>

namespace wsod {

/// 0.5*x^2 for |x| < 1, |x| - 0.5 otherwise. Continuous at |x| = 1.
double smooth_l1(double x);

/// Probability distribution over C+1 classes; index 0 is background.
struct ClassDistribution {
  std::vector<double> p;
};

/// Predicted and target box offsets (x, y, w, h).
struct RegressionTarget {
  std::array<double, 4> predicted{};
  std::array<double, 4> target{};
};

/// Multi-task detection loss: -log p_u plus lambda times the smooth-L1
/// offset loss, with the localization term gated off for u = 0
/// (background). p_u = 0 is a domain error.
double frcnn_loss(const ClassDistribution& p, int u, const RegressionTarget& t,
                  double lambda = 1.0);

struct RpnAnchor {
  double p = 0.5;  // predicted objectness probability
  int label = 0;   // 1 positive, 0 negative
  std::array<double, 4> predicted{};
  std::array<double, 4> target{};
};

struct RpnBatch {
  std::vector<RpnAnchor> anchors;
  double n_cls = 1.0;
  double n_reg = 1.0;
  double lambda = 1.0;
};

/// Two-class log loss averaged by n_cls plus lambda/n_reg times the
/// smooth-L1 coordinate loss over positive anchors. A log evaluated at
/// zero (p = 0 for a positive, p = 1 for a negative) is a domain error.
double rpn_loss(const RpnBatch& batch);

/// One proposal cluster acting as a bag: its confidence, and the member
/// scores for the bag's class.
struct ProposalCluster {
  double confidence = 0.0;            // S_n in [0,1]
  std::vector<double> member_scores;  // each in (0,1]; size M_n >= 1
};

struct BackgroundProposal {
  double weight = 0.0;  // in [0,1]
  double score = 0.0;   // background-class score in (0,1]
};

struct BagLossInput {
  int proposal_count = 0;  // R; must equal total members + background size
  std::vector<ProposalCluster> clusters;
  std::vector<BackgroundProposal> background;
};

/// Cluster-level bag loss: -(1/R) * (sum_n S_n * M_n * log(bag mean score)
/// + sum_background weight * log(score)). The cluster term takes the log
/// of the mean member score, treating the cluster as one bag.
double pcl_bag_loss(const BagLossInput& input);

}  // namespace wsod
