#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truthgrid/agreement.hpp"
#include "truthgrid/matrix.hpp"
#include "truthgrid/types.hpp"

namespace truthgrid {

// Scores normalized to [0,1] are banded around the 0.5 midpoint: SARC above
// 0.5 + ambig_halfwidth, NOT-SARC below 0.5 - ambig_halfwidth, AMBIG between.
// The default keeps near-coin-flip items (0.48..0.52) out of both classes.
struct BandPolicy {
    double ambig_halfwidth = 0.05;
};

struct Diagnostics {
    int iterations = 0;
    bool converged = true;
    double final_delta = 0.0;
    // EM objective (penalized log-likelihood; equals the log-likelihood when
    // smoothing is 0), one entry per iteration. Non-decreasing by construction.
    std::vector<double> objective_trace;
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    bool degenerate_fallback = false;            // weight vector collapsed to zero
    std::vector<uint32_t> zero_information_items;  // all vote weights were exactly 0
};

// Output of one inference method, index-aligned with the input matrix: slot i
// of the item vectors is matrix item i, slot a of annotator_reliability is
// matrix annotator a.
struct MethodResult {
    std::string method_name;
    std::vector<double> item_scores;
    std::vector<Category> item_labels;
    std::vector<double> annotator_reliability;
    Diagnostics diagnostics;
};

// Fraction of +1 votes as the item score; exact ties take the label of one
// uniformly drawn judgment, keyed by (tie_seed, item id), so a global label
// flip flips the drawn label too. Annotator reliability is the fraction of
// the annotator's items where they matched the majority side.
MethodResult majority_vote(const AnnotationMatrix& m, uint64_t tie_seed,
                           const BandPolicy& band = {});

// Votes scaled by per-annotator kappa weights; score is the weighted vote sum
// mapped to [0,1] by the item's total absolute weight. Items whose annotators
// all carry weight exactly 0 are AMBIG and listed in the diagnostics.
MethodResult kappa_weighted_vote(const AnnotationMatrix& m, const KappaWeightMap& weights,
                                 const BandPolicy& band = {});

struct KargerState {
    std::vector<double> annotator_weights;  // unit Euclidean norm after each round
    std::vector<double> task_weights;       // from the final annotator weights
    std::vector<double> last_message_sums;  // per-annotator sums before normalization
    int iterations = 0;
};

struct KargerRun {
    MethodResult result;
    KargerState state;
};

// Iterative message passing on the annotator/task graph. Weights start at 1.
// Each round: task weight = sum of reliability * vote over its annotators;
// the message back to an annotator excludes that annotator's own
// contribution and is multiplied by their vote. Message sums are divided by
// the annotator's judgment count, then the weight vector is scaled to unit
// Euclidean norm. Stops when the weight vector moves less than epsilon in
// max norm, else after `iterations` rounds. Item score is the raw final task
// weight; banding compares |score| / max |score| against the halfwidth. If
// the weight vector collapses to zero the labels fall back to majority vote
// and the degenerate_fallback flag is set.
KargerRun karger_infer(const AnnotationMatrix& m, int iterations = 10, double epsilon = 1e-6,
                       const BandPolicy& band = {}, uint64_t fallback_tie_seed = 0);

// Two-class annotator error model: error_rates[a][t][o] is the probability
// annotator a emits observed class o when the true class is t, with
// t, o indexed 0 = NOT-SARC, 1 = SARC. Rows sum to 1.
struct ConfusionModel {
    std::vector<std::array<std::array<double, 2>, 2>> error_rates;
    std::array<double, 2> class_priors{0.5, 0.5};
    std::vector<double> posterior_sarc;  // by item index
};

struct DawidSkeneRun {
    MethodResult result;
    ConfusionModel model;
};

// EM fit of the confusion model. Posteriors start from majority soft
// fractions; M-step counts carry `smoothing` pseudo-counts per cell; the
// E-step multiplies class priors by per-annotator emission probabilities
// (in log space). Stops when the objective improves by less than tol.
// Annotator reliability is the mean of the two diagonal entries. Item score
// is the posterior probability of SARC.
DawidSkeneRun dawid_skene_em(const AnnotationMatrix& m, int max_iter = 100, double tol = 1e-6,
                             double smoothing = 0.01, const BandPolicy& band = {});

// Threshold rule: SARC when at least `min_sarc_votes` annotators voted +1,
// NOT-SARC otherwise. Never AMBIG.
std::vector<Category> lw_threshold(const AnnotationMatrix& m, int min_sarc_votes = 2);

// Bands externally supplied scores; every score must lie in [0,1].
std::vector<Category> band_labels(std::span<const double> scores, const BandPolicy& band = {});

struct ConsensusResult {
    std::vector<int> sarc_method_count;  // methods labeling the item SARC, 0..4
    std::vector<Category> consensus;     // SARC / NOT-SARC at >= 3 agreeing, else AMBIG
};

// Agreement across exactly four method results over the same matrix.
ConsensusResult method_consensus(const std::vector<const MethodResult*>& results);

enum class Method { Majority, Kappa, Karger, DawidSkene };

const char* method_name(Method m);              // "majority" / "kappa" / "karger" / "em"
Method parse_method(std::string_view name);     // throws Error on unknown names

struct AggregatorConfig {
    BandPolicy band{};
    uint64_t seed = 0;  // tie-breaking and degenerate fallbacks
    int karger_iterations = 10;
    double karger_epsilon = 1e-6;
    int em_max_iter = 100;
    double em_tol = 1e-6;
    double em_smoothing = 0.01;
    uint32_t min_overlap = 10;
};

MethodResult run_method(const AnnotationMatrix& m, Method method, const AggregatorConfig& cfg);

void write_method_items_csv(const AnnotationMatrix& m, const MethodResult& r, std::ostream& out);
void write_method_annotators_csv(const AnnotationMatrix& m, const MethodResult& r,
                                 std::ostream& out);

}  // namespace truthgrid
