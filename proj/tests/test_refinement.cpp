#include <doctest.h>

#include <set>

#include "wsod/refinement.hpp"
#include "wsod/rng.hpp"
#include "support/synth.hpp"

using namespace wsod;

namespace {

ScoredPgtEntry entry(const std::string& cls, double x, double score) {
  return {cls, BBox(x, 0, x + 10, 10), score};
}

Detection fresh_det(const std::string& cls, double x, double score) {
  return {"i", cls, score, BBox(x, 0, x + 10, 10)};
}

}  // namespace

TEST_CASE("refinement timing rules") {
  CHECK(should_refine(5, 12, TimingRule::kEveryEpoch));
  for (int e = 1; e <= 12; ++e) {
    CHECK(should_refine(e, 12, TimingRule::kEveryThird) == (e % 3 == 0));
    CHECK(should_refine(e, 12, TimingRule::kLastThree) == (e >= 10));
    CHECK(should_refine(e, 12, TimingRule::kOnceAtTwoThirds) == (e == 8));
  }

  SUBCASE("counts over a 12-epoch run") {
    std::map<TimingRule, int> fired;
    for (int e = 1; e <= 12; ++e) {
      for (TimingRule t : {TimingRule::kEveryEpoch, TimingRule::kEveryThird,
                           TimingRule::kLastThree,
                           TimingRule::kOnceAtTwoThirds}) {
        fired[t] += should_refine(e, 12, t) ? 1 : 0;
      }
    }
    CHECK(fired[TimingRule::kEveryEpoch] == 12);
    CHECK(fired[TimingRule::kEveryThird] == 4);
    CHECK(fired[TimingRule::kLastThree] == 3);
    CHECK(fired[TimingRule::kOnceAtTwoThirds] == 1);
  }

  SUBCASE("two-thirds rounding is half-up") {
    CHECK(should_refine(7, 10, TimingRule::kOnceAtTwoThirds));   // 6.67 -> 7
    CHECK(should_refine(5, 7, TimingRule::kOnceAtTwoThirds));    // 4.67 -> 5
    CHECK(should_refine(6, 9, TimingRule::kOnceAtTwoThirds));    // exact 6
    CHECK_FALSE(should_refine(6, 10, TimingRule::kOnceAtTwoThirds));
  }

  SUBCASE("contract errors") {
    CHECK_THROWS_AS(should_refine(0, 12, TimingRule::kEveryEpoch),
                    ContractError);
    CHECK_THROWS_AS(should_refine(13, 12, TimingRule::kEveryEpoch),
                    ContractError);
    CHECK_THROWS_AS(should_refine(1, 2, TimingRule::kEveryThird),
                    ContractError);
    CHECK_THROWS_AS(should_refine(1, 2, TimingRule::kLastThree),
                    ContractError);
  }
}

TEST_CASE("policy warnings for no-op half updates") {
  CHECK(policy_warning({TimingRule::kEveryEpoch, UpdateRule::kBestHalf, 1})
            .has_value());
  CHECK_FALSE(policy_warning({TimingRule::kEveryEpoch, UpdateRule::kAll, 1})
                  .has_value());
  CHECK_FALSE(
      policy_warning({TimingRule::kEveryEpoch, UpdateRule::kWorstHalf, 2})
          .has_value());
}

TEST_CASE("refine_image_class update rules") {
  const std::vector<ScoredPgtEntry> current{entry("c", 0, 0.9),
                                            entry("c", 20, 0.6)};
  const std::vector<Detection> fresh{fresh_det("c", 40, 0.8),
                                     fresh_det("c", 60, 0.5)};

  SUBCASE("all: fresh top-k replaces everything") {
    const auto out = refine_image_class(current, fresh, UpdateRule::kAll, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == entry("c", 40, 0.8));
    CHECK(out[1] == entry("c", 60, 0.5));
  }

  SUBCASE("best half: the strongest current entry is replaced") {
    const auto out =
        refine_image_class(current, fresh, UpdateRule::kBestHalf, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == entry("c", 40, 0.8));  // replaced boxA
    CHECK(out[1] == entry("c", 20, 0.6));  // kept boxB
  }

  SUBCASE("worst half: the weakest current entry is replaced") {
    const auto out =
        refine_image_class(current, fresh, UpdateRule::kWorstHalf, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == entry("c", 0, 0.9));   // kept boxA
    CHECK(out[1] == entry("c", 40, 0.8));  // replaced boxB
  }

  SUBCASE("k=1 half updates are no-ops") {
    const std::vector<ScoredPgtEntry> one{entry("c", 0, 0.9)};
    CHECK(refine_image_class(one, fresh, UpdateRule::kBestHalf, 1) == one);
    CHECK(refine_image_class(one, fresh, UpdateRule::kWorstHalf, 1) == one);
  }

  SUBCASE("fresh duplicates of kept entries are skipped") {
    // fresh top equals the kept entry, so the next candidate replaces
    const std::vector<Detection> dup{fresh_det("c", 20, 0.95),
                                     fresh_det("c", 40, 0.5)};
    const auto out = refine_image_class(current, dup, UpdateRule::kBestHalf, 2);
    REQUIRE(out.size() == 2);
    std::set<double> xs{out[0].bbox.xmin, out[1].bbox.xmin};
    CHECK(xs == std::set<double>{20.0, 40.0});
  }

  SUBCASE("shortfall keeps the unreplaced entries") {
    const auto out =
        refine_image_class(current, {}, UpdateRule::kBestHalf, 2);
    CHECK(out == current);
    const auto all_out = refine_image_class(current, {}, UpdateRule::kAll, 2);
    CHECK(all_out.empty());
  }

  SUBCASE("fixed point when fresh equals current") {
    std::vector<Detection> same{fresh_det("c", 0, 0.9),
                                fresh_det("c", 20, 0.6)};
    for (UpdateRule u : {UpdateRule::kAll, UpdateRule::kBestHalf,
                         UpdateRule::kWorstHalf}) {
      CHECK(refine_image_class(current, same, u, 2) == current);
    }
  }
}

TEST_CASE("half updates touch complementary halves") {
  wsod::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 * (1 + static_cast<int>(rng.next_below(3)));  // even m
    std::vector<ScoredPgtEntry> current;
    std::vector<Detection> fresh;
    for (int i = 0; i < k; ++i) {
      current.push_back(entry("c", 30 * i, rng.next_double()));
      fresh.push_back(fresh_det("c", 500 + 30 * i, rng.next_double()));
    }
    const auto best = refine_image_class(current, fresh, UpdateRule::kBestHalf,
                                         k);
    const auto worst =
        refine_image_class(current, fresh, UpdateRule::kWorstHalf, k);
    CHECK(best.size() == current.size());
    CHECK(worst.size() == current.size());

    auto surviving = [&](const std::vector<ScoredPgtEntry>& refined) {
      std::set<double> kept;
      for (const auto& e : refined) {
        for (const auto& c : current) {
          if (e == c) kept.insert(c.bbox.xmin);
        }
      }
      return kept;
    };
    const std::set<double> kept_best = surviving(best);
    const std::set<double> kept_worst = surviving(worst);
    CHECK(kept_best.size() == static_cast<size_t>(k) / 2);
    CHECK(kept_worst.size() == static_cast<size_t>(k) / 2);
    // complementary: every current entry survives exactly one of the two
    for (const auto& c : current) {
      CHECK(kept_best.count(c.bbox.xmin) + kept_worst.count(c.bbox.xmin) == 1);
    }
  }
}

TEST_CASE("refine_dataset semantics") {
  wsod::Rng rng(32);
  testsupport::DatasetSpec spec;
  spec.images = 8;
  spec.max_classes = 2;
  spec.max_instances = 2;
  const auto gts = testsupport::make_dataset(rng, spec);
  const auto labels = testsupport::dataset_labels(gts);
  const auto sizes = testsupport::dataset_sizes(gts);
  std::vector<std::string> ids;
  for (const auto& a : gts) ids.push_back(a.image_id);
  const auto dets = testsupport::random_detections(rng, ids, spec.vocabulary,
                                                   40, spec.width, spec.height);
  const auto pgt = mine_dataset(dets, labels, sizes, {2});

  SUBCASE("fixed point on identical fresh detections") {
    const auto fresh = pgt_as_detections(pgt);
    for (UpdateRule u : {UpdateRule::kAll, UpdateRule::kBestHalf,
                         UpdateRule::kWorstHalf}) {
      const RefinementPolicy policy{TimingRule::kEveryEpoch, u, 2};
      CHECK(refine_dataset(pgt, fresh, labels, policy) == pgt);
    }
  }

  SUBCASE("the all rule equals re-mining from fresh detections") {
    const auto fresh = testsupport::random_detections(
        rng, ids, spec.vocabulary, 60, spec.width, spec.height);
    const RefinementPolicy policy{TimingRule::kEveryEpoch, UpdateRule::kAll, 2};
    CHECK(refine_dataset(pgt, fresh, labels, policy) ==
          mine_dataset(fresh, labels, sizes, {2}));
  }

  SUBCASE("half rules preserve per-image-class object counts") {
    const auto fresh = testsupport::random_detections(
        rng, ids, spec.vocabulary, 60, spec.width, spec.height);
    for (UpdateRule u : {UpdateRule::kBestHalf, UpdateRule::kWorstHalf}) {
      const RefinementPolicy policy{TimingRule::kEveryEpoch, u, 2};
      const auto refined = refine_dataset(pgt, fresh, labels, policy);
      REQUIRE(refined.size() == pgt.size());
      for (size_t i = 0; i < pgt.size(); ++i) {
        std::map<std::string, int> before, after;
        for (const auto& e : pgt[i].entries) ++before[e.class_name];
        for (const auto& e : refined[i].entries) ++after[e.class_name];
        CHECK(after == before);
      }
    }
  }

  SUBCASE("unknown fresh image id is a data error") {
    const RefinementPolicy policy{TimingRule::kEveryEpoch, UpdateRule::kAll, 2};
    CHECK_THROWS_AS(
        refine_dataset(pgt, {{"ghost", "cat", 0.5, BBox(0, 0, 5, 5)}}, labels,
                       policy),
        DataError);
  }
}

TEST_CASE("refinement loop with an exact oracle") {
  wsod::Rng rng(33);
  testsupport::DatasetSpec spec;
  spec.images = 10;
  spec.max_classes = 2;  // single instance per class
  const auto gts = testsupport::make_dataset(rng, spec);

  SUBCASE("exact detections keep the pseudo ground truth at mAP 1") {
    DetectorOracle oracle(OracleConfig{.seed = 5});
    const RefinementPolicy policy{TimingRule::kEveryEpoch, UpdateRule::kAll, 1};
    const RefinementRun run = run_refinement_loop(oracle, gts, policy, 12);
    REQUIRE(run.epochs.size() == 12);
    for (const EpochRecord& e : run.epochs) {
      CHECK(e.refined);
      CHECK(e.map == 1.0);
    }
  }

  SUBCASE("once-at-two-thirds refines exactly once") {
    DetectorOracle oracle(OracleConfig{.seed = 5});
    const RefinementPolicy policy{TimingRule::kOnceAtTwoThirds,
                                  UpdateRule::kAll, 1};
    const RefinementRun run = run_refinement_loop(oracle, gts, policy, 12);
    int refined = 0;
    for (const EpochRecord& e : run.epochs) refined += e.refined ? 1 : 0;
    CHECK(refined == 1);
    CHECK(run.epochs[7].refined);  // epoch 8
  }

  SUBCASE("a seeded noisy run is reproducible") {
    const OracleConfig noisy{.seed = 77,
                             .jitter_frac = 0.2,
                             .miss_rate = 0.2,
                             .fp_rate = 0.7,
                             .score_noise = 0.3,
                             .epoch_gain = 0.1};
    const RefinementPolicy policy{TimingRule::kEveryThird,
                                  UpdateRule::kBestHalf, 2};
    DetectorOracle first(noisy);
    DetectorOracle second(noisy);
    const RefinementRun run1 = run_refinement_loop(first, gts, policy, 9);
    const RefinementRun run2 = run_refinement_loop(second, gts, policy, 9);
    CHECK(epoch_csv(run1.epochs) == epoch_csv(run2.epochs));
    CHECK(run1.final_pgt == run2.final_pgt);
    // and independent of the worker count
    DetectorOracle third(noisy);
    const RefinementRun run3 =
        run_refinement_loop(third, gts, policy, 9, 0.5, 4);
    CHECK(epoch_csv(run3.epochs) == epoch_csv(run1.epochs));
    CHECK(run3.final_pgt == run1.final_pgt);
  }
}
