#pragma once

#include <string>
#include <vector>

#include "wsod/geometry.hpp"

namespace wsod {

struct ScoredProposal {
  BBox bbox;
  double score = 0.0;
  int index = 0;  // ordinal in the candidate list, unique

  friend bool operator==(const ScoredProposal&,
                         const ScoredProposal&) = default;
};

/// Overlap graph on cluster-center candidates: one vertex per proposal,
/// an edge wherever the pairwise IoU strictly exceeds the threshold.
struct ProposalGraph {
  int vertex_count = 0;
  std::vector<std::vector<int>> adjacency;  // sorted, symmetric, no self-edges
  double edge_threshold = 0.4;

  int edge_count() const;
};

ProposalGraph build_graph(const std::vector<ScoredProposal>& candidates,
                          double edge_threshold);

/// Greedy center selection: repeatedly take the remaining vertex of
/// maximal degree (ties: higher score, then lower index), then delete it
/// together with its neighbors and their edges, until nothing remains.
/// Returns the centers in selection order.
std::vector<ScoredProposal> select_centers(
    const ProposalGraph& graph, const std::vector<ScoredProposal>& candidates);

inline constexpr int kBackgroundCluster = -1;

struct ClusterAssignment {
  std::vector<ScoredProposal> centers;
  /// Per proposal: the proposal's own index.
  std::vector<int> proposal_index;
  /// Per proposal: index into `centers`, or kBackgroundCluster.
  std::vector<int> cluster_of;
  /// Per proposal: IoU with its best center (0 when there are no centers).
  std::vector<double> center_iou;
};

/// Assigns each proposal to the center of maximal IoU when that IoU
/// reaches assign_threshold, otherwise to the background cluster. Ties
/// go to the earlier center; a proposal that is itself a center always
/// joins its own cluster.
ClusterAssignment assign_clusters(const std::vector<ScoredProposal>& proposals,
                                  const std::vector<ScoredProposal>& centers,
                                  double assign_threshold);

/// CSV rows `index,center,iou` where center is a center index or the
/// literal `background`.
std::string assignment_csv(const ClusterAssignment& assignment);

}  // namespace wsod
