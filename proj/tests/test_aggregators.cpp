#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "truthgrid/aggregators.hpp"
#include "truthgrid/agreement.hpp"
#include "truthgrid/matrix.hpp"
#include "truthgrid/rng.hpp"
#include "truthgrid/simulator.hpp"

using namespace truthgrid;

namespace {

AnnotationMatrix matrix_of(const std::vector<JudgmentRecord>& records) {
    return AnnotationMatrix::from_records(records);
}

// votes[item][annotator], +1 / -1, fully crossed.
AnnotationMatrix dense_matrix(const std::vector<std::vector<int>>& votes) {
    std::vector<JudgmentRecord> records;
    for (size_t i = 0; i < votes.size(); ++i) {
        for (size_t a = 0; a < votes[i].size(); ++a) {
            records.push_back({"i" + std::to_string(10 + i), "a" + std::to_string(10 + a),
                               votes[i][a] > 0 ? Label::Sarc : Label::NotSarc});
        }
    }
    return matrix_of(records);
}

AnnotationMatrix random_matrix(Rng& rng, uint32_t max_items = 12, uint32_t max_annotators = 6,
                               double density = 0.8) {
    for (;;) {
        const uint32_t items = 2 + rng.bounded(max_items - 1);
        const uint32_t annotators = 2 + rng.bounded(max_annotators - 1);
        std::vector<JudgmentRecord> records;
        for (uint32_t i = 0; i < items; ++i) {
            for (uint32_t a = 0; a < annotators; ++a) {
                if (rng.uniform01() > density) continue;
                records.push_back({"i" + std::to_string(100 + i), "a" + std::to_string(100 + a),
                                   rng.bernoulli(0.55) ? Label::Sarc : Label::NotSarc});
            }
        }
        if (records.empty()) continue;
        return matrix_of(records);
    }
}

AnnotationMatrix flipped_matrix(const AnnotationMatrix& m) {
    std::vector<JudgmentRecord> records;
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        for (const auto& [a, label] : m.item_votes(i)) {
            records.push_back({m.item_id(i), m.annotator_id(a), flipped(label)});
        }
    }
    return matrix_of(records);
}

KappaWeightMap uniform_weights(const AnnotationMatrix& m, double w = 1.0) {
    KappaWeightMap map;
    map.weight.assign(m.annotator_count(), w);
    map.qualifying_partners.assign(m.annotator_count(), 1);
    map.degenerate_partners.assign(m.annotator_count(), 0);
    return map;
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("majority vote on a 2-1 split") {
    const auto m = dense_matrix({{1, 1, -1}});
    const auto r = majority_vote(m, 0);
    CHECK(r.item_scores[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.item_labels[0] == Category::Sarc);
    CHECK(r.method_name == "majority");
}

TEST_CASE("majority scores and non-tie labels against an integer oracle") {
    Rng rng(907);
    for (int trial = 0; trial < 120; ++trial) {
        const auto m = random_matrix(rng);
        const auto r = majority_vote(m, trial);
        REQUIRE(r.item_scores.size() == m.item_count());
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            int64_t pos = 0, neg = 0;
            for (const auto& [a, label] : m.item_votes(i)) {
                (label == Label::Sarc ? pos : neg) += 1;
            }
            const int64_t n = pos + neg;
            CHECK(r.item_scores[i] == static_cast<double>(pos) / static_cast<double>(n));
            if (pos == neg) {
                CHECK((r.item_labels[i] == Category::Sarc ||
                       r.item_labels[i] == Category::NotSarc));
                continue;
            }
            // Default halfwidth 0.05: SARC iff 0.45*pos > 0.55*neg, i.e. 9*pos > 11*neg.
            Category want = Category::Ambig;
            if (9 * pos > 11 * neg) want = Category::Sarc;
            else if (9 * neg > 11 * pos) want = Category::NotSarc;
            CHECK(r.item_labels[i] == want);
        }
    }
}

TEST_CASE("majority tie handling is seeded and two-sided") {
    const auto m = dense_matrix({{1, -1}, {1, 1}});
    std::set<Category> seen;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        const auto r1 = majority_vote(m, seed);
        const auto r2 = majority_vote(m, seed);
        CHECK(r1.item_labels[0] == r2.item_labels[0]);  // same seed, same draw
        CHECK(r1.item_scores[0] == 0.5);
        CHECK(r1.item_labels[1] == Category::Sarc);
        seen.insert(r1.item_labels[0]);
    }
    CHECK(seen.count(Category::Sarc) == 1);
    CHECK(seen.count(Category::NotSarc) == 1);
    CHECK(seen.count(Category::Ambig) == 0);
}

TEST_CASE("majority annotator reliability is the matched fraction") {
    // i1 votes (+,+,-) -> majority +; i2 votes (+,-,-) -> majority -.
    const auto m = dense_matrix({{1, 1, -1}, {1, -1, -1}});
    const auto r = majority_vote(m, 0);
    CHECK(r.annotator_reliability[0] == 0.5);
    CHECK(r.annotator_reliability[1] == 1.0);
    CHECK(r.annotator_reliability[2] == 0.5);
}

TEST_CASE("majority flips labels and keeps reliabilities under global negation") {
    Rng rng(911);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = random_matrix(rng);
        const auto f = flipped_matrix(m);
        const auto rm = majority_vote(m, 5);
        const auto rf = majority_vote(f, 5);
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            CHECK(rf.item_labels[i] == mirrored(rm.item_labels[i]));
        }
        for (uint32_t a = 0; a < m.annotator_count(); ++a) {
            CHECK(bitwise_equal(rf.annotator_reliability[a], rm.annotator_reliability[a]));
        }
    }
}

TEST_CASE("kappa weighted vote on the worked 0.8/0.8/0.1 instance") {
    const auto m = dense_matrix({{1, 1, -1}});
    KappaWeightMap w = uniform_weights(m);
    w.weight = {0.8, 0.8, 0.1};
    const auto r = kappa_weighted_vote(m, w);
    // Weighted sum 1.5 of total magnitude 1.7.
    CHECK(r.item_scores[0] == doctest::Approx((1.5 / 1.7 + 1) / 2).epsilon(1e-15));
    CHECK(r.item_labels[0] == Category::Sarc);
    CHECK(r.annotator_reliability == w.weight);
    CHECK(r.method_name == "kappa");
}

TEST_CASE("kappa weighted vote marks zero-information items ambiguous") {
    const auto m = dense_matrix({{1, 1}, {1, -1}});
    KappaWeightMap w = uniform_weights(m, 0.0);
    const auto r = kappa_weighted_vote(m, w);
    for (uint32_t i = 0; i < 2; ++i) {
        CHECK(r.item_scores[i] == 0.5);
        CHECK(r.item_labels[i] == Category::Ambig);
    }
    CHECK(r.diagnostics.zero_information_items == std::vector<uint32_t>{0, 1});
}

TEST_CASE("negative weights invert an annotator's evidence") {
    const auto m = dense_matrix({{1}});
    KappaWeightMap w = uniform_weights(m, -1.0);
    const auto r = kappa_weighted_vote(m, w);
    CHECK(r.item_scores[0] == 0.0);
    CHECK(r.item_labels[0] == Category::NotSarc);
}

TEST_CASE("uniform kappa weights reproduce majority labels off ties") {
    Rng rng(919);
    for (int trial = 0; trial < 60; ++trial) {
        const auto m = random_matrix(rng);
        const auto maj = majority_vote(m, 1);
        const auto kap = kappa_weighted_vote(m, uniform_weights(m));
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            int64_t pos = 0, neg = 0;
            for (const auto& [a, label] : m.item_votes(i)) {
                (label == Label::Sarc ? pos : neg) += 1;
            }
            if (pos == neg) {
                CHECK(kap.item_labels[i] == Category::Ambig);  // no tie draw here
                continue;
            }
            CHECK(kap.item_labels[i] == maj.item_labels[i]);
        }
    }
}

TEST_CASE("kappa weighted vote validates the weight map size") {
    const auto m = dense_matrix({{1, 1}});
    KappaWeightMap w = uniform_weights(m);
    w.weight.pop_back();
    CHECK_THROWS_AS(kappa_weighted_vote(m, w), Error);
}

TEST_CASE("message passing on unanimous annotators converges to equal weights") {
    const auto m = dense_matrix({{1, 1, 1}, {1, 1, 1}});
    const auto run = karger_infer(m);
    CHECK(run.result.diagnostics.converged);
    for (double t : run.state.task_weights) CHECK(t > 0.0);
    for (Category c : run.result.item_labels) CHECK(c == Category::Sarc);
    const double w0 = run.state.annotator_weights[0];
    CHECK(w0 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    for (double w : run.state.annotator_weights) CHECK(w == doctest::Approx(w0).epsilon(1e-12));
}

TEST_CASE("message passing isolates a consistent adversary") {
    // a, b, c vote (+,-) on (t1, t2); d votes (-,+).
    const auto m = matrix_of({
        {"t1", "a", Label::Sarc},    {"t2", "a", Label::NotSarc},
        {"t1", "b", Label::Sarc},    {"t2", "b", Label::NotSarc},
        {"t1", "c", Label::Sarc},    {"t2", "c", Label::NotSarc},
        {"t1", "d", Label::NotSarc}, {"t2", "d", Label::Sarc},
    });
    const auto one = karger_infer(m, 1);
    REQUIRE(one.state.last_message_sums.size() == 4);
    CHECK(one.state.last_message_sums[0] == 2.0);
    CHECK(one.state.last_message_sums[1] == 2.0);
    CHECK(one.state.last_message_sums[2] == 2.0);
    CHECK(one.state.last_message_sums[3] == -6.0);
    CHECK(one.result.annotator_reliability[3] < 0.0);
    CHECK(one.result.annotator_reliability[0] > 0.0);
    CHECK(one.result.item_labels[0] == Category::Sarc);
    CHECK(one.result.item_labels[1] == Category::NotSarc);

    const auto ten = karger_infer(m, 10);
    CHECK(ten.result.annotator_reliability[3] < 0.0);
    CHECK(ten.result.item_labels[0] == Category::Sarc);
    CHECK(ten.result.item_labels[1] == Category::NotSarc);
    CHECK(ten.result.method_name == "karger");
}

TEST_CASE("single annotator collapses the weight vector onto majority fallback") {
    const auto m = matrix_of({
        {"t1", "solo", Label::Sarc},
        {"t2", "solo", Label::NotSarc},
    });
    const auto run = karger_infer(m);
    CHECK(run.result.diagnostics.degenerate_fallback);
    CHECK(run.result.annotator_reliability[0] == 0.0);
    CHECK(run.result.item_scores[0] == 0.0);  // tasks recomputed from zero weights
    CHECK(run.result.item_scores[1] == 0.0);
    CHECK(run.result.item_labels[0] == Category::Sarc);
    CHECK(run.result.item_labels[1] == Category::NotSarc);
}

TEST_CASE("message passing flips labels and keeps reliabilities under negation") {
    Rng rng(929);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_matrix(rng);
        const auto f = flipped_matrix(m);
        const auto rm = karger_infer(m, 10, 1e-6, {}, 3);
        const auto rf = karger_infer(f, 10, 1e-6, {}, 3);
        for (uint32_t a = 0; a < m.annotator_count(); ++a) {
            CHECK(bitwise_equal(rf.result.annotator_reliability[a],
                                rm.result.annotator_reliability[a]));
        }
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            // Full cancellation yields +0.0 on both sides, not a sign flip.
            if (rm.state.task_weights[i] == 0.0) {
                CHECK(bitwise_equal(rf.state.task_weights[i], rm.state.task_weights[i]));
            } else {
                CHECK(bitwise_equal(rf.state.task_weights[i], -rm.state.task_weights[i]));
            }
            CHECK(rf.result.item_labels[i] == mirrored(rm.result.item_labels[i]));
        }
    }
}

TEST_CASE("em drives unanimous posteriors to the voted class") {
    const auto m = dense_matrix({{1, 1, 1}, {1, 1, 1}, {-1, -1, -1}, {-1, -1, -1}});
    const auto run = dawid_skene_em(m);
    CHECK(run.result.diagnostics.converged);
    CHECK(run.result.item_scores[0] > 0.95);
    CHECK(run.result.item_scores[2] < 0.05);
    CHECK(run.result.item_labels[0] == Category::Sarc);
    CHECK(run.result.item_labels[2] == Category::NotSarc);
    for (uint32_t a = 0; a < 3; ++a) CHECK(run.result.annotator_reliability[a] > 0.9);
    CHECK(run.result.method_name == "em");
}

TEST_CASE("em objective trace never decreases") {
    Rng rng(937);
    for (int trial = 0; trial < 25; ++trial) {
        const auto m = random_matrix(rng);
        const auto run = dawid_skene_em(m, 60, 1e-9);
        const auto& trace = run.result.diagnostics.objective_trace;
        REQUIRE(!trace.empty());
        for (size_t t = 1; t < trace.size(); ++t) {
            CHECK(trace[t] >= trace[t - 1] - 1e-9);
        }
        CHECK(std::isfinite(run.result.diagnostics.log_likelihood));
        CHECK(run.result.diagnostics.log_likelihood <= 1e-12);  // log of probabilities
    }
}

TEST_CASE("em confusion model rows and priors stay normalized") {
    Rng rng(941);
    for (int max_iter : {1, 2, 3, 100}) {
        const auto m = random_matrix(rng);
        const auto run = dawid_skene_em(m, max_iter);
        CHECK(run.result.diagnostics.iterations <= max_iter);
        CHECK(run.model.class_priors[0] + run.model.class_priors[1] ==
              doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& rates : run.model.error_rates) {
            for (int t = 0; t < 2; ++t) {
                CHECK(rates[t][0] + rates[t][1] == doctest::Approx(1.0).epsilon(1e-9));
                CHECK(rates[t][0] >= 0.0);
                CHECK(rates[t][1] >= 0.0);
            }
        }
        for (double q : run.model.posterior_sarc) {
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
        }
        CHECK(run.model.posterior_sarc == run.result.item_scores);
    }
}

TEST_CASE("em recovers truth from five competent annotators") {
    const auto population = generate_population({{5, 0.8}});
    std::vector<std::string> items;
    GoldStandard truth;
    Rng rng(947);
    for (int i = 0; i < 300; ++i) {
        items.push_back("i" + std::to_string(1000 + i));
        truth.truth[items.back()] = rng.bernoulli(0.5) ? Label::Sarc : Label::NotSarc;
    }
    const auto g = generate_assignment(5, items, 30, 5, std::nullopt, 953);
    const auto m = simulate_annotations(population, g, truth, 953);
    const auto run = dawid_skene_em(m);
    int correct = 0;
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        const Label want = truth.truth.at(m.item_id(i));
        if ((want == Label::Sarc && run.result.item_labels[i] == Category::Sarc) ||
            (want == Label::NotSarc && run.result.item_labels[i] == Category::NotSarc)) {
            ++correct;
        }
    }
    CHECK(correct >= 270);  // well above the 0.8 single-annotator baseline
    for (uint32_t a = 0; a < 5; ++a) {
        CHECK(run.result.annotator_reliability[a] == doctest::Approx(0.8).epsilon(0.1));
    }
}

TEST_CASE("threshold rule labels by raw positive vote count") {
    const auto m = dense_matrix({{1, 1, -1}, {1, -1, -1}, {-1, -1, -1}});
    const auto two = lw_threshold(m, 2);
    CHECK(two == std::vector<Category>{Category::Sarc, Category::NotSarc, Category::NotSarc});
    const auto one = lw_threshold(m, 1);
    CHECK(one == std::vector<Category>{Category::Sarc, Category::Sarc, Category::NotSarc});
    for (Category c : two) CHECK(c != Category::Ambig);
}

TEST_CASE("score banding around the midpoint") {
    const std::vector<double> scores{0.5, 0.52, 0.56, 0.44, 1.0, 0.0, 0.55, 0.45};
    const auto labels = band_labels(scores);
    CHECK(labels == std::vector<Category>{Category::Ambig, Category::Ambig, Category::Sarc,
                                          Category::NotSarc, Category::Sarc, Category::NotSarc,
                                          Category::Ambig, Category::Ambig});

    const auto sharp = band_labels(scores, {0.0});
    CHECK(sharp[0] == Category::Ambig);  // exactly 0.5 stays ambiguous
    CHECK(sharp[1] == Category::Sarc);
    CHECK(sharp[3] == Category::NotSarc);

    CHECK_THROWS_AS(band_labels(std::vector<double>{1.2}), Error);
    CHECK_THROWS_AS(band_labels(std::vector<double>{-0.1}), Error);
}

namespace {

MethodResult labels_only(const std::string& name, const std::vector<Category>& labels) {
    MethodResult r;
    r.method_name = name;
    r.item_labels = labels;
    r.item_scores.assign(labels.size(), 0.5);
    return r;
}

}  // namespace

TEST_CASE("consensus requires three of four methods") {
    const auto a = labels_only("majority", {Category::Sarc, Category::Sarc, Category::NotSarc,
                                            Category::Sarc, Category::NotSarc});
    const auto b = labels_only("kappa", {Category::Sarc, Category::Sarc, Category::NotSarc,
                                         Category::Ambig, Category::NotSarc});
    const auto c = labels_only("karger", {Category::Sarc, Category::NotSarc, Category::NotSarc,
                                          Category::Ambig, Category::NotSarc});
    const auto d = labels_only("em", {Category::Sarc, Category::NotSarc, Category::Ambig,
                                      Category::Ambig, Category::Sarc});
    const auto r = method_consensus({&a, &b, &c, &d});
    CHECK(r.sarc_method_count == std::vector<int>{4, 2, 0, 1, 1});
    CHECK(r.consensus == std::vector<Category>{Category::Sarc, Category::Ambig, Category::NotSarc,
                                               Category::Ambig, Category::NotSarc});
}

TEST_CASE("consensus rejects wrong arity and mismatched coverage") {
    const auto a = labels_only("majority", {Category::Sarc});
    const auto b = labels_only("kappa", {Category::Sarc});
    const auto c = labels_only("karger", {Category::Sarc});
    const auto d = labels_only("em", {Category::Sarc, Category::NotSarc});
    CHECK_THROWS_AS(method_consensus({&a, &b, &c}), Error);
    CHECK_THROWS_WITH_AS(method_consensus({&a, &b, &c, &d}), doctest::Contains("em"), Error);
}

TEST_CASE("method names round trip") {
    for (Method m : {Method::Majority, Method::Kappa, Method::Karger, Method::DawidSkene}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(parse_method("em") == Method::DawidSkene);
    CHECK_THROWS_WITH_AS(parse_method("mystery"), doctest::Contains("mystery"), Error);
}

TEST_CASE("run_method dispatches with the shared config") {
    Rng rng(967);
    const auto m = random_matrix(rng, 10, 5, 1.0);
    AggregatorConfig cfg;
    cfg.seed = 17;
    cfg.min_overlap = 2;

    const auto maj = run_method(m, Method::Majority, cfg);
    const auto direct = majority_vote(m, 17, cfg.band);
    CHECK(maj.item_scores == direct.item_scores);
    CHECK(maj.item_labels == direct.item_labels);

    const auto kap = run_method(m, Method::Kappa, cfg);
    const auto w = pairwise_kappa_weights(m, 2);
    const auto kap_direct = kappa_weighted_vote(m, w, cfg.band);
    CHECK(kap.item_scores == kap_direct.item_scores);
    CHECK(kap.annotator_reliability == w.weight);

    const auto kar = run_method(m, Method::Karger, cfg);
    CHECK(kar.item_scores == karger_infer(m, 10, 1e-6, cfg.band, 17).result.item_scores);

    const auto em = run_method(m, Method::DawidSkene, cfg);
    CHECK(em.item_scores == dawid_skene_em(m).result.item_scores);
}

TEST_CASE("method result csv exports") {
    const auto m = dense_matrix({{1, 1, -1}, {-1, -1, -1}});
    const auto r = majority_vote(m, 0);
    std::ostringstream items;
    write_method_items_csv(m, r, items);
    CHECK(items.str() ==
          "item_id,score,label\n"
          "i10,0.6666666666666666,SARC\n"
          "i11,0,NOT-SARC\n");
    std::ostringstream annot;
    write_method_annotators_csv(m, r, annot);
    CHECK(annot.str() ==
          "annotator_id,reliability\n"
          "a10,1\n"
          "a11,1\n"
          "a12,0.5\n");
}
