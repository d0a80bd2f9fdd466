#include "wsod/loss_kernels.hpp"

#include <cmath>
#include <string>

#include "wsod/error.hpp"

namespace wsod {

namespace {

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw DataError(std::string(name) + " must be finite");
  }
}

}  // namespace

double smooth_l1(double x) {
  check_finite(x, "smooth_l1 argument");
  const double a = std::fabs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double frcnn_loss(const ClassDistribution& p, int u, const RegressionTarget& t,
                  double lambda) {
  if (p.p.empty()) throw DataError("class distribution is empty");
  double sum = 0.0;
  for (double v : p.p) {
    check_finite(v, "class probability");
    if (v < 0.0 || v > 1.0) {
      throw DataError("class probability outside [0,1]");
    }
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw DataError("class probabilities sum to " + std::to_string(sum) +
                    ", expected 1");
  }
  if (u < 0 || u >= static_cast<int>(p.p.size())) {
    throw ContractError("class index " + std::to_string(u) +
                        " outside the distribution");
  }
  check_finite(lambda, "lambda");
  const double p_u = p.p[static_cast<size_t>(u)];
  if (p_u == 0.0) {
    throw DomainError("frcnn_loss: log of zero probability for class " +
                      std::to_string(u));
  }
  double loss = -std::log(p_u);
  if (u >= 1) {
    double loc = 0.0;
    for (size_t i = 0; i < 4; ++i) {
      check_finite(t.predicted[i], "regression offset");
      check_finite(t.target[i], "regression offset");
      loc += smooth_l1(t.predicted[i] - t.target[i]);
    }
    loss += lambda * loc;
  }
  return loss;
}

double rpn_loss(const RpnBatch& batch) {
  if (!(batch.n_cls > 0.0) || !(batch.n_reg > 0.0)) {
    throw DataError("rpn normalizers must be positive");
  }
  check_finite(batch.lambda, "lambda");
  double cls = 0.0;
  double reg = 0.0;
  for (const RpnAnchor& a : batch.anchors) {
    check_finite(a.p, "anchor probability");
    if (a.p < 0.0 || a.p > 1.0) {
      throw DataError("anchor probability outside [0,1]");
    }
    if (a.label != 0 && a.label != 1) {
      throw DataError("anchor label must be 0 or 1");
    }
    if (a.label == 1) {
      if (a.p == 0.0) throw DomainError("rpn_loss: log(0) for positive anchor");
      cls += -std::log(a.p);
      double loc = 0.0;
      for (size_t i = 0; i < 4; ++i) {
        check_finite(a.predicted[i], "anchor coordinate");
        check_finite(a.target[i], "anchor coordinate");
        loc += smooth_l1(a.predicted[i] - a.target[i]);
      }
      reg += loc;
    } else {
      if (a.p == 1.0) throw DomainError("rpn_loss: log(0) for negative anchor");
      cls += -std::log(1.0 - a.p);
    }
  }
  return cls / batch.n_cls + batch.lambda * reg / batch.n_reg;
}

double pcl_bag_loss(const BagLossInput& input) {
  if (input.proposal_count < 1) {
    throw DataError("bag loss proposal count must be >= 1");
  }
  int members = 0;
  for (const ProposalCluster& c : input.clusters) {
    if (c.member_scores.empty()) {
      throw DataError("proposal cluster must contain at least one member");
    }
    members += static_cast<int>(c.member_scores.size());
  }
  if (members + static_cast<int>(input.background.size()) !=
      input.proposal_count) {
    throw DataError("bag loss proposal count mismatch: clusters plus "
                    "background must equal R");
  }

  double cluster_term = 0.0;
  for (const ProposalCluster& c : input.clusters) {
    check_finite(c.confidence, "cluster confidence");
    if (c.confidence < 0.0 || c.confidence > 1.0) {
      throw DataError("cluster confidence outside [0,1]");
    }
    double sum = 0.0;
    for (double s : c.member_scores) {
      check_finite(s, "member score");
      if (s == 0.0) {
        throw DomainError("pcl_bag_loss: log of zero member score");
      }
      if (s < 0.0 || s > 1.0) throw DataError("member score outside (0,1]");
      sum += s;
    }
    const double m = static_cast<double>(c.member_scores.size());
    cluster_term += c.confidence * m * std::log(sum / m);
  }
  double background_term = 0.0;
  for (const BackgroundProposal& b : input.background) {
    check_finite(b.weight, "background weight");
    if (b.weight < 0.0 || b.weight > 1.0) {
      throw DataError("background weight outside [0,1]");
    }
    check_finite(b.score, "background score");
    if (b.score == 0.0) {
      throw DomainError("pcl_bag_loss: log of zero background score");
    }
    if (b.score < 0.0 || b.score > 1.0) {
      throw DataError("background score outside (0,1]");
    }
    background_term += b.weight * std::log(b.score);
  }
  return -(cluster_term + background_term) /
         static_cast<double>(input.proposal_count);
}

}  // namespace wsod
