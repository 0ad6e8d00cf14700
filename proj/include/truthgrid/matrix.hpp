#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "truthgrid/types.hpp"

namespace truthgrid {

struct JudgmentRecord {
    std::string item_id;
    std::string annotator_id;
    Label label = Label::Sarc;
};

// Immutable bipartite annotator/item judgment set. Ids are opaque strings;
// indexes are assigned in lexicographic id order, and per-node vote lists are
// sorted by peer index, so matrices built from permuted records compare equal
// and iteration order never depends on input order.
class AnnotationMatrix {
public:
    struct Vote {
        uint32_t peer = 0;  // annotator index in item views, item index in annotator views
        Label label = Label::Sarc;
        bool operator==(const Vote&) const = default;
    };

    // Throws Error on an empty record set and ConflictError when the same
    // (annotator, item) pair appears twice.
    static AnnotationMatrix from_records(const std::vector<JudgmentRecord>& records);

    size_t item_count() const { return item_ids_.size(); }
    size_t annotator_count() const { return annotator_ids_.size(); }
    size_t judgment_count() const { return judgment_count_; }

    const std::vector<std::string>& item_ids() const { return item_ids_; }
    const std::vector<std::string>& annotator_ids() const { return annotator_ids_; }
    const std::string& item_id(uint32_t i) const { return item_ids_[i]; }
    const std::string& annotator_id(uint32_t a) const { return annotator_ids_[a]; }

    std::optional<uint32_t> item_index(std::string_view id) const;
    std::optional<uint32_t> annotator_index(std::string_view id) const;

    const std::vector<Vote>& item_votes(uint32_t item) const { return item_votes_[item]; }
    const std::vector<Vote>& annotator_votes(uint32_t annotator) const {
        return annotator_votes_[annotator];
    }

    bool operator==(const AnnotationMatrix& other) const {
        return item_ids_ == other.item_ids_ && annotator_ids_ == other.annotator_ids_ &&
               item_votes_ == other.item_votes_;
    }

private:
    AnnotationMatrix() = default;

    std::vector<std::string> item_ids_;       // sorted
    std::vector<std::string> annotator_ids_;  // sorted
    std::vector<std::vector<Vote>> item_votes_;
    std::vector<std::vector<Vote>> annotator_votes_;
    std::unordered_map<std::string, uint32_t> item_lookup_;
    std::unordered_map<std::string, uint32_t> annotator_lookup_;
    size_t judgment_count_ = 0;
};

struct GoldStandard {
    std::map<std::string, Label> truth;
};

struct ValidationReport {
    std::vector<std::string> low_judgment_items;       // below the item threshold
    std::vector<std::string> low_judgment_annotators;  // below the annotator threshold
    size_t connected_components = 0;                   // of the bipartite graph
    size_t item_count = 0;
    size_t annotator_count = 0;
    size_t judgment_count = 0;
};

ValidationReport validate_matrix(const AnnotationMatrix& m, size_t min_item_judgments = 3,
                                 size_t min_annotator_judgments = 10);

}  // namespace truthgrid
