#include "truthgrid/matrix.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace truthgrid {

const char* category_name(Category c) {
    switch (c) {
        case Category::Sarc: return "SARC";
        case Category::NotSarc: return "NOT-SARC";
        default: return "AMBIG";
    }
}

namespace {

std::vector<std::string> sorted_unique_ids(const std::vector<JudgmentRecord>& records,
                                           bool items) {
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(items ? r.item_id : r.annotator_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace

AnnotationMatrix AnnotationMatrix::from_records(const std::vector<JudgmentRecord>& records) {
    if (records.empty()) {
        throw Error("empty annotation set: at least one judgment is required");
    }
    AnnotationMatrix m;
    m.item_ids_ = sorted_unique_ids(records, true);
    m.annotator_ids_ = sorted_unique_ids(records, false);
    m.item_lookup_.reserve(m.item_ids_.size());
    for (uint32_t i = 0; i < m.item_ids_.size(); ++i) m.item_lookup_[m.item_ids_[i]] = i;
    m.annotator_lookup_.reserve(m.annotator_ids_.size());
    for (uint32_t a = 0; a < m.annotator_ids_.size(); ++a) {
        m.annotator_lookup_[m.annotator_ids_[a]] = a;
    }

    struct Triple {
        uint32_t item, annotator;
        Label label;
    };
    std::vector<Triple> triples;
    triples.reserve(records.size());
    for (const auto& r : records) {
        triples.push_back({m.item_lookup_.at(r.item_id), m.annotator_lookup_.at(r.annotator_id),
                           r.label});
    }
    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        return std::tie(a.item, a.annotator) < std::tie(b.item, b.annotator);
    });
    for (size_t i = 1; i < triples.size(); ++i) {
        if (triples[i].item == triples[i - 1].item &&
            triples[i].annotator == triples[i - 1].annotator) {
            throw ConflictError("duplicate judgment: annotator '" +
                                m.annotator_ids_[triples[i].annotator] + "' on item '" +
                                m.item_ids_[triples[i].item] + "'");
        }
    }

    m.item_votes_.resize(m.item_ids_.size());
    m.annotator_votes_.resize(m.annotator_ids_.size());
    for (const auto& t : triples) {
        m.item_votes_[t.item].push_back({t.annotator, t.label});
    }
    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        return std::tie(a.annotator, a.item) < std::tie(b.annotator, b.item);
    });
    for (const auto& t : triples) {
        m.annotator_votes_[t.annotator].push_back({t.item, t.label});
    }
    m.judgment_count_ = triples.size();
    return m;
}

std::optional<uint32_t> AnnotationMatrix::item_index(std::string_view id) const {
    auto it = item_lookup_.find(std::string(id));
    if (it == item_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<uint32_t> AnnotationMatrix::annotator_index(std::string_view id) const {
    auto it = annotator_lookup_.find(std::string(id));
    if (it == annotator_lookup_.end()) return std::nullopt;
    return it->second;
}

ValidationReport validate_matrix(const AnnotationMatrix& m, size_t min_item_judgments,
                                 size_t min_annotator_judgments) {
    ValidationReport rep;
    rep.item_count = m.item_count();
    rep.annotator_count = m.annotator_count();
    rep.judgment_count = m.judgment_count();
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        if (m.item_votes(i).size() < min_item_judgments) {
            rep.low_judgment_items.push_back(m.item_id(i));
        }
    }
    for (uint32_t a = 0; a < m.annotator_count(); ++a) {
        if (m.annotator_votes(a).size() < min_annotator_judgments) {
            rep.low_judgment_annotators.push_back(m.annotator_id(a));
        }
    }

    // Union-find over item nodes [0, I) and annotator nodes [I, I+A).
    const size_t total = m.item_count() + m.annotator_count();
    std::vector<uint32_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        for (const auto& v : m.item_votes(i)) {
            const uint32_t a = find(static_cast<uint32_t>(m.item_count()) + v.peer);
            const uint32_t b = find(i);
            if (a != b) parent[a] = b;
        }
    }
    size_t components = 0;
    for (uint32_t x = 0; x < total; ++x) {
        if (find(x) == x) ++components;
    }
    rep.connected_components = components;
    return rep;
}

}  // namespace truthgrid
