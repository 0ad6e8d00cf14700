#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "truthgrid/matrix.hpp"
#include "truthgrid/types.hpp"

namespace truthgrid {

// One-coin annotator: answers with the true label with probability
// `accuracy`. 0.5 is a spammer, below 0.5 an adversary.
struct AnnotatorProfile {
    std::string id;
    double accuracy = 1.0;
};

// (count, accuracy) groups, e.g. {{3, 0.9}, {2, 0.5}} -> 5 workers.
std::vector<AnnotatorProfile> generate_population(
    const std::vector<std::pair<uint32_t, double>>& groups);

// Items with a known side, mixed into every HIT so worker quality is
// measurable downstream.
struct GoldMix {
    std::vector<std::string> sarc_pool;
    std::vector<std::string> notsarc_pool;
    uint32_t sarc_per_hit = 2;
    uint32_t notsarc_per_hit = 2;
};

// A HIT is a bundle of hit_size items completed by the same set of distinct
// workers. Every item belongs to exactly one HIT, so it receives exactly as
// many judgments as its HIT has workers.
struct AssignmentGraph {
    struct Hit {
        std::vector<uint32_t> workers;  // population indices, distinct
        std::vector<std::string> items;
    };
    std::vector<Hit> hits;
    uint32_t judgments_per_item = 0;
    uint32_t max_judgments_per_item = 0;  // == judgments_per_item when fixed
};

// Partitions `items` into HITs of hit_size and assigns each HIT a seeded
// draw of distinct workers. With max_judgments_per_item > judgments_per_item
// the worker count per HIT is drawn uniformly from that range. With a
// GoldMix, every HIT is composed of sarc_per_hit + notsarc_per_hit pool
// items plus main items, which requires the pool sizes to divide evenly;
// infeasible layouts throw.
AssignmentGraph generate_assignment(uint32_t worker_count, std::vector<std::string> items,
                                    uint32_t hit_size, uint32_t judgments_per_item,
                                    const std::optional<GoldMix>& gold_mix, uint64_t seed,
                                    uint32_t max_judgments_per_item = 0);

// Draws one judgment per (worker, item) edge of the graph, keyed by
// (seed, worker id, item id) so the matrix does not depend on traversal
// order. Items listed in `ambiguous` ignore worker quality and come up SARC
// with their own probability q. `truth` must cover every item.
AnnotationMatrix simulate_annotations(const std::vector<AnnotatorProfile>& population,
                                      const AssignmentGraph& graph, const GoldStandard& truth,
                                      uint64_t seed,
                                      const std::map<std::string, double>& ambiguous = {});

}  // namespace truthgrid
