#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "truthgrid/aggregators.hpp"
#include "truthgrid/matrix.hpp"

namespace truthgrid {

// Fraction of gold items whose result label matches the gold label. AMBIG
// matches nothing. Every gold item must exist in the matrix.
double evaluate_against_gold(const AnnotationMatrix& m, const MethodResult& r,
                             const GoldStandard& gold);

struct SweepCell {
    Method method;
    int k = 0;
    double mean_accuracy = 0.0;
    double std_dev = 0.0;
    int replicates = 0;
};

struct SweepCurve {
    std::vector<SweepCell> cells;  // ordered by (method order given, k order given)
    void write_csv(std::ostream& out) const;
};

inline AggregatorConfig sweep_default_config() {
    AggregatorConfig cfg;
    cfg.band.ambig_halfwidth = 0.0;  // sweeps score binary decisions
    return cfg;
}

// Accuracy as a function of judgments per item: for each k and replicate,
// each item independently keeps k of its judgments (draw keyed by the master
// seed, k, replicate and item id), every method runs on the reduced matrix,
// and accuracies are averaged over replicates. cfg.seed is forced to `seed`
// so tie-breaks are stable across replicates.
SweepCurve subsample_sweep(const AnnotationMatrix& m, const GoldStandard& gold,
                           const std::vector<int>& ks, int replicates,
                           const std::vector<Method>& methods, uint64_t seed,
                           AggregatorConfig cfg = sweep_default_config());

std::vector<int> default_sweep_ks();  // 3, 5, ..., 23

struct SwitchRow {
    int start_n = 0;
    int pos_to_neg = 0;           // SARC at start_n, NOT-SARC at end_n
    double mean_ratio_ptn = 0.0;  // mean start-sample sarcastic-vote fraction
    double max_ratio_ptn = 0.0;
    int neg_to_pos = 0;
    double mean_ratio_ntp = 0.0;
    double min_ratio_ntp = 0.0;
};

struct TrajectoryPoint {
    std::string item_id;
    int n = 0;
    Category label = Category::Ambig;
};

struct SwitchReport {
    SwitchRow row;
    // Labels over the n grid for the items whose start-sample vote fraction
    // is closest to 0.5 (the pivot plus traj_halfwindow items on each side).
    std::vector<TrajectoryPoint> trajectories;
};

// Labels the matrix at start_n and end_n judgments per item (same sampling
// scheme as subsample_sweep, one draw per n) and counts items whose label
// crossed sides. Ratio statistics describe the start-side vote fractions of
// the switching items. start_n == end_n is allowed and reports zero switches.
SwitchReport track_label_switches(const AnnotationMatrix& m, int start_n, int end_n,
                                  Method method, uint64_t seed,
                                  AggregatorConfig cfg = sweep_default_config(),
                                  int traj_halfwindow = 0, int traj_step = 2);

void write_switch_csv(const std::vector<SwitchRow>& rows, std::ostream& out);
void write_trajectories_csv(const std::vector<TrajectoryPoint>& points, std::ostream& out);

struct ContingencyTable {
    // Rows index the first labeling, columns the second, in Category order
    // (NOT-SARC, AMBIG, SARC).
    std::array<std::array<size_t, 3>, 3> counts{};
    size_t total = 0;
};

// Both labelings must cover the same item set.
ContingencyTable crosstab(const std::map<std::string, Category>& a,
                          const std::map<std::string, Category>& b);

std::map<std::string, Category> to_label_map(const AnnotationMatrix& m, const MethodResult& r);

struct BandSelection {
    std::vector<std::string> sarc;         // highest scores
    std::vector<std::string> notsarc;      // lowest scores
    std::vector<std::string> ambig_above;  // immediately above the pivot
    std::vector<std::string> ambig_below;  // ending at the pivot (inclusive)
    std::string pivot_id;
    double pivot_score = 0.0;
    double ambig_min_score = 0.0;  // lowest score in ambig_below
    double ambig_max_score = 0.0;  // highest score in ambig_above
};

// Sorts items by score, pivots on the score closest to zero, and cuts four
// disjoint bands: top n_sarc, bottom n_notsarc, n_ambig_above items above the
// pivot and n_ambig_below items ending at it. Throws when the bands would
// overlap or run out of items.
BandSelection select_by_score_bands(const std::vector<std::pair<std::string, double>>& scores,
                                    size_t n_sarc, size_t n_notsarc, size_t n_ambig_above,
                                    size_t n_ambig_below);

struct DensityReport {
    // Annotators that judged at least one gold item, with their gold accuracy.
    std::vector<std::string> annotator_ids;
    std::vector<double> gold_accuracy;
    std::vector<std::string> excluded;  // annotators with no gold judgments
    // Per method: reliabilities min-max normalized to [0,1], aligned with the
    // matrix annotator index (all annotators). A constant vector maps to 0.5.
    std::vector<std::pair<std::string, std::vector<double>>> normalized_reliability;
};

DensityReport worker_reliability_density(const AnnotationMatrix& m, const GoldStandard& gold,
                                         const std::vector<MethodResult>& results);

}  // namespace truthgrid
