#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "truthgrid/matrix.hpp"
#include "truthgrid/types.hpp"

namespace truthgrid {

struct KappaResult {
    double value = 0.0;
    // True when both sequences are constant with the same value (chance
    // agreement is 1, so kappa has no information). Reported as 0 and
    // excluded from pairwise means.
    bool degenerate = false;
};

// Cohen's kappa over two paired judgment sequences, chance agreement from
// each annotator's own marginals. Computed in integer arithmetic, so the
// result is exact up to one final division.
KappaResult cohen_kappa(std::span<const Label> a, std::span<const Label> b);

// Per-annotator vote weights: mean pairwise kappa over partners sharing at
// least min_overlap items. Indexed by matrix annotator index.
struct KappaWeightMap {
    std::vector<double> weight;
    std::vector<uint32_t> qualifying_partners;  // partners contributing to the mean
    std::vector<uint32_t> degenerate_partners;  // excluded from the mean, counted here

    bool flagged(uint32_t annotator) const { return qualifying_partners[annotator] == 0; }
};

KappaWeightMap pairwise_kappa_weights(const AnnotationMatrix& m, uint32_t min_overlap = 10);

void write_kappa_weights_csv(const AnnotationMatrix& m, const KappaWeightMap& w,
                             std::ostream& out);

// Krippendorff's alpha, nominal form, via the coincidence matrix. Items with
// fewer than two judgments are skipped; throws Error when none remain.
// Returns 1.0 on unanimous data (zero observed disagreement).
double krippendorff_alpha(const AnnotationMatrix& m);

}  // namespace truthgrid
