#include <doctest.h>

#include <set>

#include "wsod/clustering.hpp"
#include "wsod/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace wsod;

namespace {

ScoredProposal prop(double x0, double y0, double x1, double y1, double score,
                    int index) {
  return {BBox(x0, y0, x1, y1), score, index};
}

}  // namespace

TEST_CASE("graph construction") {
  SUBCASE("single candidate") {
    const auto g = build_graph({prop(0, 0, 10, 10, 0.5, 0)}, 0.4);
    CHECK(g.vertex_count == 1);
    CHECK(g.edge_count() == 0);
  }

  SUBCASE("identical boxes connect") {
    const auto g = build_graph({prop(0, 0, 10, 10, 0.5, 0),
                                prop(0, 0, 10, 10, 0.6, 1)},
                               0.4);
    CHECK(g.edge_count() == 1);
  }

  SUBCASE("three boxes with IoUs above, above and below the threshold") {
    // A-B and B-C overlap by 7/13; A-C by 0.25
    const auto g = build_graph({prop(0, 0, 10, 10, 0.5, 0),
                                prop(0, 3, 10, 13, 0.5, 1),
                                prop(0, 6, 10, 16, 0.5, 2)},
                               0.4);
    CHECK(g.edge_count() == 2);
    CHECK(g.adjacency[0] == std::vector<int>{1});
    CHECK(g.adjacency[1] == std::vector<int>{0, 2});
    CHECK(g.adjacency[2] == std::vector<int>{1});
  }

  SUBCASE("the edge comparison is strict") {
    // IoU exactly 0.5: two 10x10 boxes overlapping by hmm 2/3 width
    const auto boxes = std::vector<ScoredProposal>{
        prop(0, 0, 3, 1, 0.5, 0), prop(1, 0, 4, 1, 0.5, 1)};  // IoU = 2/4
    CHECK(build_graph(boxes, 0.5).edge_count() == 0);
    CHECK(build_graph(boxes, 0.49).edge_count() == 1);
  }
}

TEST_CASE("greedy center selection") {
  SUBCASE("edgeless graphs make every vertex a center") {
    const std::vector<ScoredProposal> cands{prop(0, 0, 10, 10, 0.2, 0),
                                            prop(50, 0, 60, 10, 0.9, 1),
                                            prop(0, 50, 10, 60, 0.5, 2)};
    const auto centers = select_centers(build_graph(cands, 0.4), cands);
    REQUIRE(centers.size() == 3);
    // zero degrees everywhere: picked by score descending
    CHECK(centers[0].index == 1);
    CHECK(centers[1].index == 2);
    CHECK(centers[2].index == 0);
  }

  SUBCASE("the max-degree vertex eats its neighbors") {
    // B overlaps A; C overlaps A; B and C do not overlap
    const std::vector<ScoredProposal> cands{prop(0, 3, 10, 13, 0.1, 0),
                                            prop(0, 0, 10, 10, 0.9, 1),
                                            prop(0, 6, 10, 16, 0.9, 2)};
    const auto centers = select_centers(build_graph(cands, 0.4), cands);
    REQUIRE(centers.size() == 1);
    CHECK(centers[0].index == 0);
  }

  SUBCASE("single vertex") {
    const std::vector<ScoredProposal> cands{prop(0, 0, 10, 10, 0.5, 0)};
    CHECK(select_centers(build_graph(cands, 0.4), cands).size() == 1);
  }

  SUBCASE("degree ties break by score, then index") {
    const std::vector<ScoredProposal> cands{prop(0, 0, 10, 10, 0.3, 0),
                                            prop(40, 0, 50, 10, 0.8, 1),
                                            prop(80, 0, 90, 10, 0.8, 2)};
    const auto centers = select_centers(build_graph(cands, 0.4), cands);
    REQUIRE(centers.size() == 3);
    CHECK(centers[0].index == 1);  // score tie with 2, lower index wins
    CHECK(centers[1].index == 2);
    CHECK(centers[2].index == 0);
  }
}

TEST_CASE("cluster assignment") {
  const std::vector<ScoredProposal> centers{prop(0, 0, 10, 10, 0.9, 0),
                                            prop(100, 0, 110, 10, 0.8, 1)};

  SUBCASE("a proposal identical to a center joins it") {
    const auto out = assign_clusters({prop(100, 0, 110, 10, 0.2, 7)}, centers,
                                     0.5);
    CHECK(out.cluster_of == std::vector<int>{1});
    CHECK(out.center_iou[0] == 1.0);
  }

  SUBCASE("disjoint proposals fall to the background") {
    const auto out = assign_clusters({prop(500, 500, 510, 510, 0.2, 7)},
                                     centers, 0.5);
    CHECK(out.cluster_of == std::vector<int>{kBackgroundCluster});
    CHECK(out.center_iou[0] == 0.0);
  }

  SUBCASE("the higher-IoU center wins") {
    // IoU 2/3 with the first center, 10/11 with the second
    const std::vector<ScoredProposal> two{prop(0, 0, 10, 10, 0.9, 0),
                                          prop(0, 1, 10, 12, 0.8, 1)};
    const auto out = assign_clusters({prop(0, 2, 10, 12, 0.5, 9)}, two, 0.5);
    CHECK(out.cluster_of == std::vector<int>{1});
  }

  SUBCASE("centers assign to themselves even with an identical twin") {
    const std::vector<ScoredProposal> twins{prop(0, 0, 10, 10, 0.9, 0),
                                            prop(0, 0, 10, 10, 0.8, 1)};
    const auto out = assign_clusters(twins, twins, 0.5);
    CHECK(out.cluster_of == std::vector<int>{0, 1});
  }

  SUBCASE("no centers sends everything to the background") {
    const auto out = assign_clusters({prop(0, 0, 10, 10, 0.5, 0)}, {}, 0.5);
    CHECK(out.cluster_of == std::vector<int>{kBackgroundCluster});
  }
}

TEST_CASE("clustering invariants on random candidate sets") {
  wsod::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(12));
    const auto cands = testsupport::random_proposals(rng, n);
    const double threshold = 0.3 + 0.4 * rng.next_double();
    const auto graph = build_graph(cands, threshold);
    const auto centers = select_centers(graph, cands);

    CHECK(!centers.empty());
    CHECK(centers.size() <= cands.size());

    // independence: no two centers overlap above the edge threshold
    for (size_t i = 0; i < centers.size(); ++i) {
      for (size_t j = i + 1; j < centers.size(); ++j) {
        CHECK(iou(centers[i].bbox, centers[j].bbox) <= threshold);
      }
    }
    // domination: every non-center overlaps some center above the threshold
    std::set<int> center_ids;
    for (const auto& c : centers) center_ids.insert(c.index);
    for (const auto& cand : cands) {
      if (center_ids.count(cand.index)) continue;
      bool covered = false;
      for (const auto& c : centers) {
        if (iou(cand.bbox, c.bbox) > threshold) covered = true;
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("greedy selection matches the brute-force reference") {
  wsod::Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(10));
    const auto cands = testsupport::random_proposals(rng, n);
    const double threshold = 0.3 + 0.4 * rng.next_double();

    std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j &&
            testsupport::ref_iou(cands[i].bbox, cands[j].bbox) > threshold) {
          adjacent[i][j] = true;
        }
      }
    }
    std::vector<double> scores;
    for (const auto& c : cands) scores.push_back(c.score);

    const auto got = select_centers(build_graph(cands, threshold), cands);
    const auto want = testsupport::brute_greedy_centers(adjacent, scores);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].index == want[i]);
    }
  }
}
