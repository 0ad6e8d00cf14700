#include "truthgrid/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "truthgrid/io.hpp"
#include "truthgrid/numeric.hpp"
#include "truthgrid/rng.hpp"

namespace truthgrid {

namespace {

// Band decision stated on the two class masses instead of the normalized
// score: SARC iff mass_sarc / (mass_sarc + mass_notsarc) > 0.5 + h, cross
// multiplied so a global label flip (which swaps the masses exactly) mirrors
// the decision exactly.
Category band_from_masses(double sarc_mass, double notsarc_mass, double halfwidth) {
    const double lo = 0.5 - halfwidth;
    const double hi = 0.5 + halfwidth;
    if (lo * sarc_mass > hi * notsarc_mass) return Category::Sarc;
    if (lo * notsarc_mass > hi * sarc_mass) return Category::NotSarc;
    return Category::Ambig;
}

Label drawn_tie_label(const AnnotationMatrix& m, uint32_t item, uint64_t tie_seed) {
    const auto& votes = m.item_votes(item);
    Rng rng(seed_mix(tie_seed, std::string_view("tie"), m.item_id(item)));
    return votes[rng.bounded(votes.size())].label;
}

}  // namespace

MethodResult majority_vote(const AnnotationMatrix& m, uint64_t tie_seed, const BandPolicy& band) {
    const uint32_t items = static_cast<uint32_t>(m.item_count());
    const uint32_t annotators = static_cast<uint32_t>(m.annotator_count());
    MethodResult r;
    r.method_name = "majority";
    r.item_scores.resize(items);
    r.item_labels.resize(items);
    std::vector<Label> direction(items);

    for (uint32_t i = 0; i < items; ++i) {
        const auto& votes = m.item_votes(i);
        int64_t pos = 0;
        for (const auto& v : votes) {
            if (v.label == Label::Sarc) ++pos;
        }
        const int64_t neg = static_cast<int64_t>(votes.size()) - pos;
        r.item_scores[i] = static_cast<double>(pos) / static_cast<double>(votes.size());
        if (pos == neg) {
            direction[i] = drawn_tie_label(m, i, tie_seed);
            r.item_labels[i] = to_category(direction[i]);
        } else {
            direction[i] = pos > neg ? Label::Sarc : Label::NotSarc;
            r.item_labels[i] = band_from_masses(static_cast<double>(pos),
                                                static_cast<double>(neg),
                                                band.ambig_halfwidth);
        }
    }
    r.annotator_reliability.resize(annotators);
    for (uint32_t a = 0; a < annotators; ++a) {
        const auto& votes = m.annotator_votes(a);
        int64_t matches = 0;
        for (const auto& v : votes) {
            if (v.label == direction[v.peer]) ++matches;
        }
        r.annotator_reliability[a] =
            static_cast<double>(matches) / static_cast<double>(votes.size());
    }
    return r;
}

MethodResult kappa_weighted_vote(const AnnotationMatrix& m, const KappaWeightMap& weights,
                                 const BandPolicy& band) {
    if (weights.weight.size() != m.annotator_count()) {
        throw Error("kappa_weighted_vote: weight map does not cover the matrix annotators");
    }
    const uint32_t items = static_cast<uint32_t>(m.item_count());
    MethodResult r;
    r.method_name = "kappa";
    r.item_scores.resize(items);
    r.item_labels.resize(items);
    r.annotator_reliability = weights.weight;

    std::vector<double> terms, mags;
    for (uint32_t i = 0; i < items; ++i) {
        const auto& votes = m.item_votes(i);
        terms.clear();
        mags.clear();
        for (const auto& v : votes) {
            terms.push_back(weights.weight[v.peer] * label_value(v.label));
            mags.push_back(std::fabs(weights.weight[v.peer]));
        }
        const double raw = det_sum(terms);
        const double total = det_sum(mags);
        if (total == 0.0) {
            r.item_scores[i] = 0.5;
            r.item_labels[i] = Category::Ambig;
            r.diagnostics.zero_information_items.push_back(i);
            continue;
        }
        r.item_scores[i] = (raw / total + 1.0) / 2.0;
        r.item_labels[i] = band_from_masses(total + raw, total - raw, band.ambig_halfwidth);
    }
    return r;
}

KargerRun karger_infer(const AnnotationMatrix& m, int iterations, double epsilon,
                       const BandPolicy& band, uint64_t fallback_tie_seed) {
    const uint32_t items = static_cast<uint32_t>(m.item_count());
    const uint32_t annotators = static_cast<uint32_t>(m.annotator_count());
    KargerRun run;
    KargerState& st = run.state;
    st.annotator_weights.assign(annotators, 1.0);
    st.task_weights.assign(items, 0.0);
    st.last_message_sums.assign(annotators, 0.0);

    MethodResult& r = run.result;
    r.method_name = "karger";
    r.diagnostics.converged = false;

    std::vector<double> terms;
    auto compute_task_weights = [&]() {
        for (uint32_t i = 0; i < items; ++i) {
            terms.clear();
            for (const auto& v : m.item_votes(i)) {
                terms.push_back(st.annotator_weights[v.peer] * label_value(v.label));
            }
            st.task_weights[i] = det_sum(terms);
        }
    };

    std::vector<double> means(annotators), squares(annotators);
    bool collapsed = false;
    for (int round = 1; round <= iterations; ++round) {
        st.iterations = round;
        r.diagnostics.iterations = round;
        compute_task_weights();
        for (uint32_t a = 0; a < annotators; ++a) {
            const auto& votes = m.annotator_votes(a);
            terms.clear();
            for (const auto& v : votes) {
                const double lv = label_value(v.label);
                terms.push_back((st.task_weights[v.peer] - st.annotator_weights[a] * lv) * lv);
            }
            st.last_message_sums[a] = det_sum(terms);
            means[a] = st.last_message_sums[a] / static_cast<double>(votes.size());
        }
        for (uint32_t a = 0; a < annotators; ++a) squares[a] = means[a] * means[a];
        const double norm = std::sqrt(det_sum(squares));
        if (norm == 0.0) {
            collapsed = true;
            break;
        }
        double delta = 0.0;
        for (uint32_t a = 0; a < annotators; ++a) {
            const double next = means[a] / norm;
            delta = std::max(delta, std::fabs(next - st.annotator_weights[a]));
            st.annotator_weights[a] = next;
        }
        r.diagnostics.final_delta = delta;
        if (delta < epsilon) {
            r.diagnostics.converged = true;
            break;
        }
    }

    if (collapsed) {
        st.annotator_weights.assign(annotators, 0.0);
        compute_task_weights();
        const MethodResult majority = majority_vote(m, fallback_tie_seed, band);
        r.item_scores = st.task_weights;
        r.item_labels = majority.item_labels;
        r.annotator_reliability = st.annotator_weights;
        r.diagnostics.degenerate_fallback = true;
        return run;
    }

    compute_task_weights();
    r.item_scores = st.task_weights;
    r.annotator_reliability = st.annotator_weights;
    r.item_labels.resize(items);
    double max_abs = 0.0;
    for (double t : st.task_weights) max_abs = std::max(max_abs, std::fabs(t));
    for (uint32_t i = 0; i < items; ++i) {
        const double t = st.task_weights[i];
        if (t == 0.0 || std::fabs(t) / max_abs < band.ambig_halfwidth) {
            r.item_labels[i] = Category::Ambig;
        } else {
            r.item_labels[i] = t > 0.0 ? Category::Sarc : Category::NotSarc;
        }
    }
    return run;
}

DawidSkeneRun dawid_skene_em(const AnnotationMatrix& m, int max_iter, double tol,
                             double smoothing, const BandPolicy& band) {
    const uint32_t items = static_cast<uint32_t>(m.item_count());
    const uint32_t annotators = static_cast<uint32_t>(m.annotator_count());
    DawidSkeneRun run;
    ConfusionModel& model = run.model;
    model.error_rates.resize(annotators);

    // Posteriors kept as a (not, sarc) pair computed symmetrically, so a
    // global label flip swaps the components bitwise.
    std::vector<std::array<double, 2>> q(items);
    for (uint32_t i = 0; i < items; ++i) {
        const auto& votes = m.item_votes(i);
        double pos = 0;
        for (const auto& v : votes) {
            if (v.label == Label::Sarc) ++pos;
        }
        const double n = static_cast<double>(votes.size());
        q[i] = {(n - pos) / n, pos / n};
    }

    MethodResult& r = run.result;
    r.method_name = "em";
    r.diagnostics.converged = false;

    std::vector<std::array<std::array<double, 2>, 2>> lograte(annotators);
    std::array<double, 2> logprior{};
    std::vector<double> cell, ll_terms, penalty_terms, prior_terms0, prior_terms1;
    double prev_objective = 0.0;

    for (int iter = 1; iter <= max_iter; ++iter) {
        r.diagnostics.iterations = iter;
        // M-step: error rates and priors from posterior-weighted counts.
        for (uint32_t a = 0; a < annotators; ++a) {
            const auto& votes = m.annotator_votes(a);
            std::array<std::array<double, 2>, 2> cnt{};
            for (int t = 0; t < 2; ++t) {
                for (int o = 0; o < 2; ++o) {
                    cell.clear();
                    for (const auto& v : votes) {
                        if ((v.label == Label::Sarc ? 1 : 0) == o) {
                            cell.push_back(q[v.peer][t]);
                        }
                    }
                    cnt[t][o] = det_sum(cell);
                }
            }
            for (int t = 0; t < 2; ++t) {
                const double row = (cnt[t][0] + cnt[t][1]) + 2.0 * smoothing;
                for (int o = 0; o < 2; ++o) {
                    model.error_rates[a][t][o] = (cnt[t][o] + smoothing) / row;
                }
            }
        }
        prior_terms0.clear();
        prior_terms1.clear();
        for (uint32_t i = 0; i < items; ++i) {
            prior_terms0.push_back(q[i][0]);
            prior_terms1.push_back(q[i][1]);
        }
        const double s0 = det_sum(prior_terms0);
        const double s1 = det_sum(prior_terms1);
        const double prior_total = (s0 + s1) + 2.0 * smoothing;
        model.class_priors[0] = (s0 + smoothing) / prior_total;
        model.class_priors[1] = (s1 + smoothing) / prior_total;

        for (uint32_t a = 0; a < annotators; ++a) {
            for (int t = 0; t < 2; ++t) {
                for (int o = 0; o < 2; ++o) {
                    lograte[a][t][o] = std::log(model.error_rates[a][t][o]);
                }
            }
        }
        logprior[0] = std::log(model.class_priors[0]);
        logprior[1] = std::log(model.class_priors[1]);

        // E-step and log-likelihood under the just-updated parameters.
        ll_terms.clear();
        for (uint32_t i = 0; i < items; ++i) {
            const auto& votes = m.item_votes(i);
            std::array<double, 2> lp;
            for (int t = 0; t < 2; ++t) {
                cell.clear();
                for (const auto& v : votes) {
                    cell.push_back(lograte[v.peer][t][v.label == Label::Sarc ? 1 : 0]);
                }
                lp[t] = logprior[t] + det_sum(cell);
            }
            const double mx = std::max(lp[0], lp[1]);
            const double e0 = std::exp(lp[0] - mx);
            const double e1 = std::exp(lp[1] - mx);
            const double tot = e0 + e1;
            q[i] = {e0 / tot, e1 / tot};
            ll_terms.push_back(mx + std::log(tot));
        }
        const double loglik = det_sum(ll_terms);
        double objective = loglik;
        if (smoothing > 0.0) {
            penalty_terms.clear();
            for (uint32_t a = 0; a < annotators; ++a) {
                for (int t = 0; t < 2; ++t) {
                    for (int o = 0; o < 2; ++o) penalty_terms.push_back(lograte[a][t][o]);
                }
            }
            penalty_terms.push_back(logprior[0]);
            penalty_terms.push_back(logprior[1]);
            objective += smoothing * det_sum(penalty_terms);
        }
        r.diagnostics.log_likelihood = loglik;
        r.diagnostics.objective_trace.push_back(objective);
        if (iter > 1) {
            const double improvement = objective - prev_objective;
            r.diagnostics.final_delta = improvement;
            if (improvement < tol) {
                prev_objective = objective;
                r.diagnostics.converged = true;
                break;
            }
        }
        prev_objective = objective;
    }

    model.posterior_sarc.resize(items);
    r.item_scores.resize(items);
    r.item_labels.resize(items);
    for (uint32_t i = 0; i < items; ++i) {
        model.posterior_sarc[i] = q[i][1];
        r.item_scores[i] = q[i][1];
        r.item_labels[i] = band_from_masses(q[i][1], q[i][0], band.ambig_halfwidth);
    }
    r.annotator_reliability.resize(annotators);
    for (uint32_t a = 0; a < annotators; ++a) {
        r.annotator_reliability[a] =
            (model.error_rates[a][0][0] + model.error_rates[a][1][1]) / 2.0;
    }
    return run;
}

std::vector<Category> lw_threshold(const AnnotationMatrix& m, int min_sarc_votes) {
    std::vector<Category> labels(m.item_count());
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        int pos = 0;
        for (const auto& v : m.item_votes(i)) {
            if (v.label == Label::Sarc) ++pos;
        }
        labels[i] = pos >= min_sarc_votes ? Category::Sarc : Category::NotSarc;
    }
    return labels;
}

std::vector<Category> band_labels(std::span<const double> scores, const BandPolicy& band) {
    std::vector<Category> labels;
    labels.reserve(scores.size());
    const double lo = 0.5 - band.ambig_halfwidth;
    const double hi = 0.5 + band.ambig_halfwidth;
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw Error("band_labels: score " + format_double(s) + " outside [0,1]");
        }
        labels.push_back(s > hi ? Category::Sarc
                                : (s < lo ? Category::NotSarc : Category::Ambig));
    }
    return labels;
}

ConsensusResult method_consensus(const std::vector<const MethodResult*>& results) {
    if (results.size() != 4) {
        throw Error("method_consensus: expected 4 method results, got " +
                    std::to_string(results.size()));
    }
    const size_t items = results[0]->item_labels.size();
    for (const auto* r : results) {
        if (r->item_labels.size() != items) {
            throw Error("method_consensus: item coverage mismatch between '" +
                        results[0]->method_name + "' (" + std::to_string(items) + ") and '" +
                        r->method_name + "' (" + std::to_string(r->item_labels.size()) + ")");
        }
    }
    ConsensusResult c;
    c.sarc_method_count.resize(items);
    c.consensus.resize(items);
    for (size_t i = 0; i < items; ++i) {
        int sarc = 0, notsarc = 0;
        for (const auto* r : results) {
            if (r->item_labels[i] == Category::Sarc) ++sarc;
            if (r->item_labels[i] == Category::NotSarc) ++notsarc;
        }
        c.sarc_method_count[i] = sarc;
        c.consensus[i] = sarc >= 3    ? Category::Sarc
                         : notsarc >= 3 ? Category::NotSarc
                                        : Category::Ambig;
    }
    return c;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Majority: return "majority";
        case Method::Kappa: return "kappa";
        case Method::Karger: return "karger";
        default: return "em";
    }
}

Method parse_method(std::string_view name) {
    if (name == "majority") return Method::Majority;
    if (name == "kappa") return Method::Kappa;
    if (name == "karger") return Method::Karger;
    if (name == "em") return Method::DawidSkene;
    throw Error("unknown method '" + std::string(name) +
                "' (expected majority, kappa, karger or em)");
}

MethodResult run_method(const AnnotationMatrix& m, Method method, const AggregatorConfig& cfg) {
    switch (method) {
        case Method::Majority:
            return majority_vote(m, cfg.seed, cfg.band);
        case Method::Kappa:
            return kappa_weighted_vote(m, pairwise_kappa_weights(m, cfg.min_overlap), cfg.band);
        case Method::Karger:
            return karger_infer(m, cfg.karger_iterations, cfg.karger_epsilon, cfg.band, cfg.seed)
                .result;
        default:
            return dawid_skene_em(m, cfg.em_max_iter, cfg.em_tol, cfg.em_smoothing, cfg.band)
                .result;
    }
}

void write_method_items_csv(const AnnotationMatrix& m, const MethodResult& r,
                            std::ostream& out) {
    out << "item_id,score,label\n";
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        out << m.item_id(i) << ',' << format_double(r.item_scores[i]) << ','
            << category_name(r.item_labels[i]) << '\n';
    }
}

void write_method_annotators_csv(const AnnotationMatrix& m, const MethodResult& r,
                                 std::ostream& out) {
    out << "annotator_id,reliability\n";
    for (uint32_t a = 0; a < m.annotator_count(); ++a) {
        out << m.annotator_id(a) << ',' << format_double(r.annotator_reliability[a]) << '\n';
    }
}

}  // namespace truthgrid
