#include "wsod/clustering.hpp"

#include <algorithm>

#include "wsod/csv.hpp"
#include "wsod/error.hpp"

namespace wsod {

int ProposalGraph::edge_count() const {
  int twice = 0;
  for (const std::vector<int>& n : adjacency) {
    twice += static_cast<int>(n.size());
  }
  return twice / 2;
}

ProposalGraph build_graph(const std::vector<ScoredProposal>& candidates,
                          double edge_threshold) {
  if (!(edge_threshold > 0.0) || !(edge_threshold < 1.0)) {
    throw ContractError("edge_threshold must lie in (0,1)");
  }
  ProposalGraph g;
  g.vertex_count = static_cast<int>(candidates.size());
  g.edge_threshold = edge_threshold;
  g.adjacency.assign(candidates.size(), {});
  for (size_t i = 0; i < candidates.size(); ++i) {
    for (size_t j = i + 1; j < candidates.size(); ++j) {
      if (iou(candidates[i].bbox, candidates[j].bbox) > edge_threshold) {
        g.adjacency[i].push_back(static_cast<int>(j));
        g.adjacency[j].push_back(static_cast<int>(i));
      }
    }
  }
  return g;
}

std::vector<ScoredProposal> select_centers(
    const ProposalGraph& graph, const std::vector<ScoredProposal>& candidates) {
  if (graph.vertex_count != static_cast<int>(candidates.size())) {
    throw ContractError("graph and candidate list sizes differ");
  }
  const int n = graph.vertex_count;
  std::vector<char> alive(n, 1);
  std::vector<int> degree(n, 0);
  for (int v = 0; v < n; ++v) {
    degree[v] = static_cast<int>(graph.adjacency[v].size());
  }

  std::vector<ScoredProposal> centers;
  int remaining = n;
  while (remaining > 0) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      if (best < 0 || degree[v] > degree[best] ||
          (degree[v] == degree[best] &&
           (candidates[v].score > candidates[best].score ||
            (candidates[v].score == candidates[best].score &&
             candidates[v].index < candidates[best].index)))) {
        best = v;
      }
    }
    centers.push_back(candidates[best]);

    // Remove the center and its remaining neighbors; fix up degrees of the
    // survivors adjacent to anything removed.
    std::vector<int> removed{best};
    for (int u : graph.adjacency[best]) {
      if (alive[u]) removed.push_back(u);
    }
    for (int r : removed) {
      alive[r] = 0;
      --remaining;
    }
    for (int r : removed) {
      for (int u : graph.adjacency[r]) {
        if (alive[u]) --degree[u];
      }
    }
  }
  return centers;
}

ClusterAssignment assign_clusters(const std::vector<ScoredProposal>& proposals,
                                  const std::vector<ScoredProposal>& centers,
                                  double assign_threshold) {
  if (!(assign_threshold > 0.0) || !(assign_threshold < 1.0)) {
    throw ContractError("assign_threshold must lie in (0,1)");
  }
  ClusterAssignment out;
  out.centers = centers;
  out.proposal_index.reserve(proposals.size());
  out.cluster_of.reserve(proposals.size());
  out.center_iou.reserve(proposals.size());
  for (const ScoredProposal& p : proposals) {
    int best = kBackgroundCluster;
    double best_iou = 0.0;
    for (size_t c = 0; c < centers.size(); ++c) {
      if (centers[c].index == p.index) {  // centers belong to themselves
        best = static_cast<int>(c);
        best_iou = 1.0;
        break;
      }
      double v = iou(p.bbox, centers[c].bbox);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(c);
      }
    }
    if (best != kBackgroundCluster && centers[best].index != p.index &&
        best_iou < assign_threshold) {
      best = kBackgroundCluster;
    }
    out.proposal_index.push_back(p.index);
    out.cluster_of.push_back(best);
    out.center_iou.push_back(best_iou);
  }
  return out;
}

std::string assignment_csv(const ClusterAssignment& assignment) {
  std::string out = "index,center,iou\n";
  for (size_t i = 0; i < assignment.cluster_of.size(); ++i) {
    out += std::to_string(assignment.proposal_index[i]) + ",";
    const int cluster = assignment.cluster_of[i];
    if (cluster == kBackgroundCluster) {
      out += "background";
    } else {
      out += std::to_string(assignment.centers[cluster].index);
    }
    out += "," + fmt_fixed(assignment.center_iou[i], 6) + "\n";
  }
  return out;
}

}  // namespace wsod
