#include "truthgrid/simulator.hpp"

#include <algorithm>

#include "truthgrid/rng.hpp"

namespace truthgrid {

namespace {

std::string padded_id(char prefix, uint32_t index, size_t width) {
    std::string digits = std::to_string(index);
    std::string out(1, prefix);
    out.append(width > digits.size() ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

}  // namespace

std::vector<AnnotatorProfile> generate_population(
    const std::vector<std::pair<uint32_t, double>>& groups) {
    size_t total = 0;
    for (const auto& [count, p] : groups) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error("annotator accuracy must lie in [0,1], got " + std::to_string(p));
        }
        total += count;
    }
    const size_t width = std::max<size_t>(3, std::to_string(total ? total - 1 : 0).size());
    std::vector<AnnotatorProfile> population;
    population.reserve(total);
    uint32_t next = 0;
    for (const auto& [count, p] : groups) {
        for (uint32_t c = 0; c < count; ++c) {
            population.push_back({padded_id('w', next++, width), p});
        }
    }
    return population;
}

AssignmentGraph generate_assignment(uint32_t worker_count, std::vector<std::string> items,
                                    uint32_t hit_size, uint32_t judgments_per_item,
                                    const std::optional<GoldMix>& gold_mix, uint64_t seed,
                                    uint32_t max_judgments_per_item) {
    if (worker_count == 0) throw Error("assignment infeasible: no workers");
    if (hit_size == 0) throw Error("assignment infeasible: HIT size must be positive");
    if (judgments_per_item == 0) {
        throw Error("assignment infeasible: judgments per item must be positive");
    }
    const uint32_t max_jpi = std::max(judgments_per_item, max_judgments_per_item);
    if (max_jpi > worker_count) {
        throw Error("assignment infeasible: " + std::to_string(max_jpi) +
                    " judgments per item need that many distinct workers, only " +
                    std::to_string(worker_count) + " available");
    }

    AssignmentGraph graph;
    graph.judgments_per_item = judgments_per_item;
    graph.max_judgments_per_item = max_jpi;

    Rng layout_rng(seed_mix(seed, std::string_view("layout")));
    std::vector<std::vector<std::string>> hit_items;
    if (gold_mix) {
        const uint32_t gold_per_hit = gold_mix->sarc_per_hit + gold_mix->notsarc_per_hit;
        if (gold_per_hit >= hit_size) {
            throw Error("assignment infeasible: gold quota " + std::to_string(gold_per_hit) +
                        " leaves no room in HITs of " + std::to_string(hit_size));
        }
        const uint32_t main_per_hit = hit_size - gold_per_hit;
        if (items.empty() || items.size() % main_per_hit != 0) {
            throw Error("assignment infeasible: " + std::to_string(items.size()) +
                        " main items do not fill HITs of " + std::to_string(main_per_hit) +
                        " main slots exactly");
        }
        const size_t hits = items.size() / main_per_hit;
        const auto check_pool = [&](const std::vector<std::string>& pool, uint32_t per_hit,
                                    const char* name) {
            if (pool.size() != hits * per_hit) {
                throw Error("assignment infeasible: " + std::string(name) + " pool has " +
                            std::to_string(pool.size()) + " items but " + std::to_string(hits) +
                            " HITs require exactly " + std::to_string(hits * per_hit));
            }
        };
        check_pool(gold_mix->sarc_pool, gold_mix->sarc_per_hit, "SARC");
        check_pool(gold_mix->notsarc_pool, gold_mix->notsarc_per_hit, "NOT-SARC");

        std::vector<std::string> sarc = gold_mix->sarc_pool;
        std::vector<std::string> notsarc = gold_mix->notsarc_pool;
        layout_rng.shuffle(items);
        layout_rng.shuffle(sarc);
        layout_rng.shuffle(notsarc);
        for (size_t h = 0; h < hits; ++h) {
            std::vector<std::string> bundle;
            bundle.reserve(hit_size);
            for (uint32_t j = 0; j < gold_mix->sarc_per_hit; ++j) {
                bundle.push_back(sarc[h * gold_mix->sarc_per_hit + j]);
            }
            for (uint32_t j = 0; j < gold_mix->notsarc_per_hit; ++j) {
                bundle.push_back(notsarc[h * gold_mix->notsarc_per_hit + j]);
            }
            for (uint32_t j = 0; j < main_per_hit; ++j) {
                bundle.push_back(items[h * main_per_hit + j]);
            }
            hit_items.push_back(std::move(bundle));
        }
    } else {
        if (items.empty()) throw Error("assignment infeasible: no items");
        layout_rng.shuffle(items);
        // The final HIT absorbs the remainder when hit_size does not divide
        // the item count.
        for (size_t at = 0; at < items.size(); at += hit_size) {
            const size_t end = std::min(items.size(), at + hit_size);
            hit_items.emplace_back(items.begin() + static_cast<ptrdiff_t>(at),
                                   items.begin() + static_cast<ptrdiff_t>(end));
        }
    }

    for (size_t h = 0; h < hit_items.size(); ++h) {
        Rng rng(seed_mix(seed, std::string_view("hit"), static_cast<uint64_t>(h)));
        uint32_t want = judgments_per_item;
        if (max_jpi > judgments_per_item) {
            want += static_cast<uint32_t>(rng.bounded(max_jpi - judgments_per_item + 1));
        }
        AssignmentGraph::Hit hit;
        hit.items = std::move(hit_items[h]);
        for (uint32_t w : rng.sample(worker_count, want)) hit.workers.push_back(w);
        graph.hits.push_back(std::move(hit));
    }
    return graph;
}

AnnotationMatrix simulate_annotations(const std::vector<AnnotatorProfile>& population,
                                      const AssignmentGraph& graph, const GoldStandard& truth,
                                      uint64_t seed,
                                      const std::map<std::string, double>& ambiguous) {
    for (const auto& [id, q] : ambiguous) {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw Error("ambiguous probability for item '" + id + "' must lie in [0,1]");
        }
    }
    std::vector<JudgmentRecord> records;
    for (const auto& hit : graph.hits) {
        for (uint32_t w : hit.workers) {
            if (w >= population.size()) {
                throw Error("assignment references worker index " + std::to_string(w) +
                            " outside the population of " + std::to_string(population.size()));
            }
        }
        for (const auto& item : hit.items) {
            const auto truth_it = truth.truth.find(item);
            if (truth_it == truth.truth.end()) {
                throw Error("ground truth does not cover item '" + item + "'");
            }
            const auto ambig_it = ambiguous.find(item);
            for (uint32_t w : hit.workers) {
                const AnnotatorProfile& worker = population[w];
                Rng rng(seed_mix(seed, std::string_view("judge"), std::string_view(worker.id),
                                 std::string_view(item)));
                Label observed;
                if (ambig_it != ambiguous.end()) {
                    observed = rng.uniform01() < ambig_it->second ? Label::Sarc : Label::NotSarc;
                } else {
                    const bool correct = rng.uniform01() < worker.accuracy;
                    observed = correct ? truth_it->second : flipped(truth_it->second);
                }
                records.push_back({item, worker.id, observed});
            }
        }
    }
    return AnnotationMatrix::from_records(records);
}

}  // namespace truthgrid
