#include "truthgrid/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace truthgrid {

// Canonical order: drop zeros, sort by (|v|, v), cancel exact +/- pairs
// (their sum is always exactly 0), fold left. After cancellation each
// magnitude group has a single sign, so negating every input yields the
// elementwise-negated sequence and the fold negates exactly under IEEE
// round-to-nearest. Sorting makes the fold independent of input order.
double det_sum(std::span<const double> values) {
    static thread_local std::vector<double> buf;
    buf.clear();
    buf.reserve(values.size());
    for (double v : values) {
        if (v != 0.0) buf.push_back(v);
    }
    if (buf.empty()) return 0.0;
    std::sort(buf.begin(), buf.end(), [](double a, double b) {
        const double fa = std::fabs(a), fb = std::fabs(b);
        return fa < fb || (fa == fb && a < b);
    });
    size_t w = 0;
    for (size_t i = 0; i < buf.size();) {
        const double mag = std::fabs(buf[i]);
        size_t j = i;
        size_t neg = 0;
        while (j < buf.size() && std::fabs(buf[j]) == mag) {
            if (buf[j] < 0.0) ++neg;
            ++j;
        }
        const size_t pos = (j - i) - neg;
        const size_t keep = pos > neg ? pos - neg : neg - pos;
        const double v = pos > neg ? mag : -mag;
        for (size_t t = 0; t < keep; ++t) buf[w++] = v;
        i = j;
    }
    double acc = 0.0;
    for (size_t t = 0; t < w; ++t) acc += buf[t];
    return acc;
}

double det_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return det_sum(values) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    const double mean = det_mean(values);
    std::vector<double> sq;
    sq.reserve(n);
    for (double v : values) {
        const double d = v - mean;
        sq.push_back(d * d);
    }
    return std::sqrt(det_sum(sq) / static_cast<double>(n - 1));
}

}  // namespace truthgrid
