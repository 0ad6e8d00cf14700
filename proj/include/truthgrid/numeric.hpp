#pragma once

#include <span>

namespace truthgrid {

// Sum in a canonical order. The result is invariant under permutation of the
// inputs and negates exactly (bitwise) when every input is negated. Both
// properties are load-bearing: score maps must not change when ids are
// renamed, and a global label flip must mirror every intermediate exactly.
double det_sum(std::span<const double> values);

double det_mean(std::span<const double> values);

// Sample standard deviation (n-1 denominator); 0 when fewer than 2 values.
double sample_std(std::span<const double> values);

}  // namespace truthgrid
