#include "truthgrid/agreement.hpp"

#include <cstdint>
#include <ostream>

#include "truthgrid/io.hpp"
#include "truthgrid/numeric.hpp"

namespace truthgrid {

namespace {

struct PairCounts {
    int64_t n = 0;
    int64_t agree = 0;
    int64_t pos_a = 0;
    int64_t pos_b = 0;
};

KappaResult kappa_from_counts(const PairCounts& c) {
    // Both constant with the same value: chance agreement is 1 and the
    // statistic carries no information.
    const bool all_pos = c.pos_a == c.n && c.pos_b == c.n;
    const bool all_neg = c.pos_a == 0 && c.pos_b == 0;
    if (all_pos || all_neg) return {0.0, true};
    // kappa = (p_o - p_e) / (1 - p_e), scaled by n^2 to stay in integers.
    const int64_t pe_n2 = c.pos_a * c.pos_b + (c.n - c.pos_a) * (c.n - c.pos_b);
    const int64_t num = c.agree * c.n - pe_n2;
    const int64_t den = c.n * c.n - pe_n2;
    return {static_cast<double>(num) / static_cast<double>(den), false};
}

}  // namespace

KappaResult cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) {
        throw Error("cohen_kappa: sequences must be paired over the same items");
    }
    if (a.empty()) throw Error("cohen_kappa: empty sequences");
    PairCounts c;
    c.n = static_cast<int64_t>(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++c.agree;
        if (a[i] == Label::Sarc) ++c.pos_a;
        if (b[i] == Label::Sarc) ++c.pos_b;
    }
    return kappa_from_counts(c);
}

KappaWeightMap pairwise_kappa_weights(const AnnotationMatrix& m, uint32_t min_overlap) {
    const uint32_t n = static_cast<uint32_t>(m.annotator_count());
    KappaWeightMap w;
    w.weight.assign(n, 0.0);
    w.qualifying_partners.assign(n, 0);
    w.degenerate_partners.assign(n, 0);
    std::vector<std::vector<double>> partner_kappas(n);

    for (uint32_t a = 0; a < n; ++a) {
        const auto& va = m.annotator_votes(a);
        for (uint32_t b = a + 1; b < n; ++b) {
            const auto& vb = m.annotator_votes(b);
            PairCounts c;
            size_t ia = 0, ib = 0;
            while (ia < va.size() && ib < vb.size()) {
                if (va[ia].peer < vb[ib].peer) {
                    ++ia;
                } else if (vb[ib].peer < va[ia].peer) {
                    ++ib;
                } else {
                    ++c.n;
                    if (va[ia].label == vb[ib].label) ++c.agree;
                    if (va[ia].label == Label::Sarc) ++c.pos_a;
                    if (vb[ib].label == Label::Sarc) ++c.pos_b;
                    ++ia;
                    ++ib;
                }
            }
            if (c.n < static_cast<int64_t>(min_overlap)) continue;
            const KappaResult k = kappa_from_counts(c);
            if (k.degenerate) {
                ++w.degenerate_partners[a];
                ++w.degenerate_partners[b];
            } else {
                partner_kappas[a].push_back(k.value);
                partner_kappas[b].push_back(k.value);
            }
        }
    }
    for (uint32_t a = 0; a < n; ++a) {
        w.qualifying_partners[a] = static_cast<uint32_t>(partner_kappas[a].size());
        if (!partner_kappas[a].empty()) {
            w.weight[a] = det_mean(partner_kappas[a]);
        }
    }
    return w;
}

void write_kappa_weights_csv(const AnnotationMatrix& m, const KappaWeightMap& w,
                             std::ostream& out) {
    out << "annotator_id,weight,qualifying_partners\n";
    for (uint32_t a = 0; a < m.annotator_count(); ++a) {
        out << m.annotator_id(a) << ',' << format_double(w.weight[a]) << ','
            << w.qualifying_partners[a] << '\n';
    }
}

double krippendorff_alpha(const AnnotationMatrix& m) {
    int64_t n_pos = 0, n_neg = 0;
    std::vector<double> contribs;
    contribs.reserve(m.item_count());
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        const auto& votes = m.item_votes(i);
        const int64_t mu = static_cast<int64_t>(votes.size());
        if (mu < 2) continue;
        int64_t ku = 0;
        for (const auto& v : votes) {
            if (v.label == Label::Sarc) ++ku;
        }
        n_pos += ku;
        n_neg += mu - ku;
        contribs.push_back(static_cast<double>(ku * (mu - ku)) / static_cast<double>(mu - 1));
    }
    if (contribs.empty()) {
        throw Error("krippendorff_alpha undefined: no item has at least two judgments");
    }
    const double disagreement = det_sum(contribs);
    if (disagreement == 0.0) return 1.0;
    const int64_t n = n_pos + n_neg;
    return 1.0 - static_cast<double>(n - 1) * disagreement /
                     (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace truthgrid
