#include "truthgrid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "truthgrid/io.hpp"
#include "truthgrid/numeric.hpp"
#include "truthgrid/rng.hpp"

namespace truthgrid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

uint32_t require_item(const AnnotationMatrix& m, const std::string& id, const char* what) {
    const auto idx = m.item_index(id);
    if (!idx) {
        throw Error(std::string(what) + " item '" + id + "' not present in the annotation matrix");
    }
    return *idx;
}

// Keeps `keep` of every item's judgments, drawn without replacement with an
// RNG keyed by (seed, tag, keep, extra..., item_id) so the draw for one item
// never depends on matrix iteration order.
AnnotationMatrix reduce_matrix(const AnnotationMatrix& m, int keep, uint64_t seed,
                               std::string_view tag, uint64_t extra, bool use_extra) {
    std::vector<JudgmentRecord> records;
    records.reserve(m.item_count() * static_cast<size_t>(keep));
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        const auto& votes = m.item_votes(i);
        if (votes.size() < static_cast<size_t>(keep)) {
            throw Error("item '" + m.item_id(i) + "' has " + std::to_string(votes.size()) +
                        " judgments, fewer than the requested " + std::to_string(keep));
        }
        uint64_t key;
        if (use_extra) {
            key = seed_mix(seed, tag, static_cast<uint64_t>(keep), extra,
                           std::string_view(m.item_id(i)));
        } else {
            key = seed_mix(seed, tag, static_cast<uint64_t>(keep),
                           std::string_view(m.item_id(i)));
        }
        Rng rng(key);
        for (uint32_t pick : rng.sample(votes.size(), static_cast<size_t>(keep))) {
            records.push_back({m.item_id(i), m.annotator_id(votes[pick].peer),
                               votes[pick].label});
        }
    }
    return AnnotationMatrix::from_records(records);
}

double sarc_fraction(const AnnotationMatrix& m, uint32_t item) {
    const auto& votes = m.item_votes(item);
    int64_t pos = 0;
    for (const auto& v : votes) {
        if (v.label == Label::Sarc) ++pos;
    }
    return static_cast<double>(pos) / static_cast<double>(votes.size());
}

}  // namespace

double evaluate_against_gold(const AnnotationMatrix& m, const MethodResult& r,
                             const GoldStandard& gold) {
    if (gold.truth.empty()) {
        throw Error("empty gold standard: nothing to evaluate against");
    }
    if (r.item_labels.size() != m.item_count()) {
        throw Error("method result does not cover the matrix items");
    }
    int64_t matches = 0;
    for (const auto& [id, label] : gold.truth) {
        const uint32_t idx = require_item(m, id, "gold");
        if (r.item_labels[idx] == to_category(label)) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(gold.truth.size());
}

void SweepCurve::write_csv(std::ostream& out) const {
    out << "method,k,mean_accuracy,std,replicates\n";
    for (const auto& c : cells) {
        out << method_name(c.method) << ',' << c.k << ',' << format_double(c.mean_accuracy)
            << ',' << format_double(c.std_dev) << ',' << c.replicates << '\n';
    }
}

SweepCurve subsample_sweep(const AnnotationMatrix& m, const GoldStandard& gold,
                           const std::vector<int>& ks, int replicates,
                           const std::vector<Method>& methods, uint64_t seed,
                           AggregatorConfig cfg) {
    if (ks.empty()) throw Error("subsample_sweep: no subset sizes given");
    if (replicates < 1) throw Error("subsample_sweep: replicates must be at least 1");
    if (methods.empty()) throw Error("subsample_sweep: no methods given");
    for (int k : ks) {
        if (k < 1) throw Error("subsample_sweep: subset size must be at least 1");
    }
    cfg.seed = seed;

    // accuracies[method][k] = per-replicate accuracy list; replicates share
    // one reduced matrix per (k, replicate) so methods see identical data.
    std::vector<std::vector<std::vector<double>>> acc(
        methods.size(), std::vector<std::vector<double>>(ks.size()));
    for (size_t ki = 0; ki < ks.size(); ++ki) {
        for (int rep = 0; rep < replicates; ++rep) {
            const AnnotationMatrix reduced =
                reduce_matrix(m, ks[ki], seed, "sweep", static_cast<uint64_t>(rep), true);
            for (size_t mi = 0; mi < methods.size(); ++mi) {
                const MethodResult r = run_method(reduced, methods[mi], cfg);
                acc[mi][ki].push_back(evaluate_against_gold(reduced, r, gold));
            }
        }
    }

    SweepCurve curve;
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        for (size_t ki = 0; ki < ks.size(); ++ki) {
            SweepCell cell;
            cell.method = methods[mi];
            cell.k = ks[ki];
            cell.mean_accuracy = det_mean(acc[mi][ki]);
            cell.std_dev = sample_std(acc[mi][ki]);
            cell.replicates = replicates;
            curve.cells.push_back(cell);
        }
    }
    return curve;
}

std::vector<int> default_sweep_ks() {
    std::vector<int> ks;
    for (int k = 3; k <= 23; k += 2) ks.push_back(k);
    return ks;
}

SwitchReport track_label_switches(const AnnotationMatrix& m, int start_n, int end_n,
                                  Method method, uint64_t seed, AggregatorConfig cfg,
                                  int traj_halfwindow, int traj_step) {
    if (start_n < 1) throw Error("track_label_switches: start_n must be at least 1");
    if (start_n > end_n) {
        throw Error("track_label_switches: start_n (" + std::to_string(start_n) +
                    ") exceeds end_n (" + std::to_string(end_n) + ")");
    }
    if (traj_step < 1) throw Error("track_label_switches: trajectory step must be at least 1");
    cfg.seed = seed;

    const auto label_at = [&](int n) {
        const AnnotationMatrix reduced = reduce_matrix(m, n, seed, "switch", 0, false);
        const MethodResult r = run_method(reduced, method, cfg);
        // Reduction preserves the item set, so indices line up with m.
        std::vector<Category> labels(m.item_count());
        std::vector<double> ratios(m.item_count());
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            const uint32_t ri = *reduced.item_index(m.item_id(i));
            labels[i] = r.item_labels[ri];
            ratios[i] = sarc_fraction(reduced, ri);
        }
        return std::pair(std::move(labels), std::move(ratios));
    };

    const auto [start_labels, start_ratios] = label_at(start_n);
    const auto [end_labels, end_ratios] =
        start_n == end_n ? std::pair(start_labels, start_ratios) : label_at(end_n);

    SwitchReport report;
    report.row.start_n = start_n;
    std::vector<double> ptn_ratios, ntp_ratios;
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        if (start_labels[i] == Category::Sarc && end_labels[i] == Category::NotSarc) {
            ++report.row.pos_to_neg;
            ptn_ratios.push_back(start_ratios[i]);
        } else if (start_labels[i] == Category::NotSarc && end_labels[i] == Category::Sarc) {
            ++report.row.neg_to_pos;
            ntp_ratios.push_back(start_ratios[i]);
        }
    }
    if (ptn_ratios.empty()) {
        report.row.mean_ratio_ptn = kNaN;
        report.row.max_ratio_ptn = kNaN;
    } else {
        report.row.mean_ratio_ptn = det_mean(ptn_ratios);
        report.row.max_ratio_ptn = *std::max_element(ptn_ratios.begin(), ptn_ratios.end());
    }
    if (ntp_ratios.empty()) {
        report.row.mean_ratio_ntp = kNaN;
        report.row.min_ratio_ntp = kNaN;
    } else {
        report.row.mean_ratio_ntp = det_mean(ntp_ratios);
        report.row.min_ratio_ntp = *std::min_element(ntp_ratios.begin(), ntp_ratios.end());
    }

    if (traj_halfwindow > 0) {
        // Window around the item whose start-sample vote fraction is nearest
        // 0.5, in vote-fraction order.
        std::vector<uint32_t> order(m.item_count());
        for (uint32_t i = 0; i < m.item_count(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (start_ratios[a] != start_ratios[b]) return start_ratios[a] < start_ratios[b];
            return m.item_id(a) < m.item_id(b);
        });
        size_t pivot = 0;
        for (size_t j = 1; j < order.size(); ++j) {
            const double cur = std::fabs(start_ratios[order[j]] - 0.5);
            const double best = std::fabs(start_ratios[order[pivot]] - 0.5);
            if (cur < best) pivot = j;
        }
        const size_t lo = pivot >= static_cast<size_t>(traj_halfwindow)
                              ? pivot - static_cast<size_t>(traj_halfwindow)
                              : 0;
        const size_t hi =
            std::min(order.size() - 1, pivot + static_cast<size_t>(traj_halfwindow));

        std::vector<int> grid;
        for (int n = start_n; n < end_n; n += traj_step) grid.push_back(n);
        grid.push_back(end_n);
        std::vector<std::vector<Category>> grid_labels;
        for (int n : grid) {
            if (n == start_n) {
                grid_labels.push_back(start_labels);
            } else if (n == end_n) {
                grid_labels.push_back(end_labels);
            } else {
                grid_labels.push_back(label_at(n).first);
            }
        }
        for (size_t j = lo; j <= hi; ++j) {
            const uint32_t item = order[j];
            for (size_t gi = 0; gi < grid.size(); ++gi) {
                report.trajectories.push_back({m.item_id(item), grid[gi], grid_labels[gi][item]});
            }
        }
    }
    return report;
}

void write_switch_csv(const std::vector<SwitchRow>& rows, std::ostream& out) {
    out << "start,pos_to_neg,mean,max,neg_to_pos,mean,min\n";
    const auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    for (const auto& r : rows) {
        out << r.start_n << ',' << r.pos_to_neg << ',' << field(r.mean_ratio_ptn) << ','
            << field(r.max_ratio_ptn) << ',' << r.neg_to_pos << ',' << field(r.mean_ratio_ntp)
            << ',' << field(r.min_ratio_ntp) << '\n';
    }
}

void write_trajectories_csv(const std::vector<TrajectoryPoint>& points, std::ostream& out) {
    out << "item_id,n,label\n";
    for (const auto& p : points) {
        out << p.item_id << ',' << p.n << ',' << category_name(p.label) << '\n';
    }
}

ContingencyTable crosstab(const std::map<std::string, Category>& a,
                          const std::map<std::string, Category>& b) {
    std::string missing;
    int shown = 0;
    const auto note = [&](const std::string& id, const char* side) {
        if (shown < 8) {
            missing += (missing.empty() ? "" : ", ");
            missing += "'" + id + "' (" + side + " only)";
        }
        ++shown;
    };
    for (const auto& [id, _] : a) {
        if (!b.count(id)) note(id, "first");
    }
    for (const auto& [id, _] : b) {
        if (!a.count(id)) note(id, "second");
    }
    if (shown > 0) {
        if (shown > 8) missing += ", ...";
        throw Error("crosstab: labelings cover different items: " + missing);
    }

    ContingencyTable t;
    for (const auto& [id, la] : a) {
        const Category lb = b.at(id);
        ++t.counts[static_cast<int>(la)][static_cast<int>(lb)];
        ++t.total;
    }
    return t;
}

std::map<std::string, Category> to_label_map(const AnnotationMatrix& m, const MethodResult& r) {
    if (r.item_labels.size() != m.item_count()) {
        throw Error("method result does not cover the matrix items");
    }
    std::map<std::string, Category> out;
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        out.emplace(m.item_id(i), r.item_labels[i]);
    }
    return out;
}

BandSelection select_by_score_bands(const std::vector<std::pair<std::string, double>>& scores,
                                    size_t n_sarc, size_t n_notsarc, size_t n_ambig_above,
                                    size_t n_ambig_below) {
    const size_t n = scores.size();
    const auto fail = [&](const std::string& why) {
        throw Error("select_by_score_bands: " + why + " (items=" + std::to_string(n) +
                    ", sarc=" + std::to_string(n_sarc) + ", notsarc=" + std::to_string(n_notsarc) +
                    ", ambig_above=" + std::to_string(n_ambig_above) +
                    ", ambig_below=" + std::to_string(n_ambig_below) + ")");
    };
    if (n == 0) fail("no scored items");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (scores[x].second != scores[y].second) return scores[x].second < scores[y].second;
        return scores[x].first < scores[y].first;
    });

    size_t pivot = 0;
    for (size_t j = 1; j < n; ++j) {
        const double cur = std::fabs(scores[order[j]].second);
        const double best = std::fabs(scores[order[pivot]].second);
        if (cur < best || (cur == best && scores[order[j]].first < scores[order[pivot]].first)) {
            pivot = j;
        }
    }

    if (pivot + 1 < n_ambig_below) fail("not enough items below the pivot");
    if (n - pivot - 1 < n_ambig_above) fail("not enough items above the pivot");
    if (n_sarc + n_notsarc > n) fail("reliable bands exceed the item count");
    const size_t below_begin = pivot + 1 - n_ambig_below;  // [below_begin, pivot]
    const size_t above_end = pivot + 1 + n_ambig_above;    // (pivot, above_end)
    const size_t sarc_begin = n - n_sarc;
    if (n_ambig_below > 0 && n_notsarc > below_begin) {
        fail("NOT-SARC band overlaps the ambiguous band");
    }
    if (n_ambig_above > 0 && n_notsarc > pivot + 1) {
        fail("NOT-SARC band overlaps the ambiguous band");
    }
    if (n_ambig_below > 0 && n_sarc > 0 && sarc_begin <= pivot) {
        fail("SARC band overlaps the ambiguous band");
    }
    if (n_ambig_above > 0 && sarc_begin < above_end) {
        fail("SARC band overlaps the ambiguous band");
    }

    BandSelection sel;
    sel.pivot_id = scores[order[pivot]].first;
    sel.pivot_score = scores[order[pivot]].second;
    for (size_t j = below_begin; j <= pivot && n_ambig_below > 0; ++j) {
        sel.ambig_below.push_back(scores[order[j]].first);
    }
    for (size_t j = pivot + 1; j < above_end; ++j) {
        sel.ambig_above.push_back(scores[order[j]].first);
    }
    for (size_t j = 0; j < n_notsarc; ++j) sel.notsarc.push_back(scores[order[j]].first);
    for (size_t j = 0; j < n_sarc; ++j) {
        sel.sarc.push_back(scores[order[n - 1 - j]].first);  // highest score first
    }
    sel.ambig_min_score =
        n_ambig_below > 0 ? scores[order[below_begin]].second : sel.pivot_score;
    sel.ambig_max_score =
        n_ambig_above > 0 ? scores[order[above_end - 1]].second : sel.pivot_score;
    return sel;
}

DensityReport worker_reliability_density(const AnnotationMatrix& m, const GoldStandard& gold,
                                         const std::vector<MethodResult>& results) {
    if (gold.truth.empty()) {
        throw Error("empty gold standard: nothing to evaluate against");
    }
    for (const auto& [id, _] : gold.truth) {
        require_item(m, id, "gold");
    }
    DensityReport report;
    for (uint32_t a = 0; a < m.annotator_count(); ++a) {
        int64_t on_gold = 0, matched = 0;
        for (const auto& v : m.annotator_votes(a)) {
            const auto it = gold.truth.find(m.item_id(v.peer));
            if (it == gold.truth.end()) continue;
            ++on_gold;
            if (v.label == it->second) ++matched;
        }
        if (on_gold == 0) {
            report.excluded.push_back(m.annotator_id(a));
        } else {
            report.annotator_ids.push_back(m.annotator_id(a));
            report.gold_accuracy.push_back(static_cast<double>(matched) /
                                           static_cast<double>(on_gold));
        }
    }
    for (const auto& r : results) {
        if (r.annotator_reliability.size() != m.annotator_count()) {
            throw Error("method result '" + r.method_name +
                        "' does not cover the matrix annotators");
        }
        const auto [mn, mx] = std::minmax_element(r.annotator_reliability.begin(),
                                                  r.annotator_reliability.end());
        std::vector<double> norm(r.annotator_reliability.size());
        if (*mx == *mn) {
            std::fill(norm.begin(), norm.end(), 0.5);
        } else {
            const double span = *mx - *mn;
            for (size_t a = 0; a < norm.size(); ++a) {
                norm[a] = (r.annotator_reliability[a] - *mn) / span;
            }
        }
        report.normalized_reliability.emplace_back(r.method_name, std::move(norm));
    }
    return report;
}

}  // namespace truthgrid
