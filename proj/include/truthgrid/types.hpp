#pragma once

#include <stdexcept>
#include <string>

namespace truthgrid {

// Binary judgment value, stored as +1/-1 because every aggregation rule
// works in signed-label arithmetic.
enum class Label : int { NotSarc = -1, Sarc = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }
inline Label flipped(Label l) { return l == Label::Sarc ? Label::NotSarc : Label::Sarc; }

// Three-way item categorization produced by score banding.
enum class Category : int { NotSarc = 0, Ambig = 1, Sarc = 2 };

inline Category to_category(Label l) {
    return l == Label::Sarc ? Category::Sarc : Category::NotSarc;
}

inline Category mirrored(Category c) {
    if (c == Category::Sarc) return Category::NotSarc;
    if (c == Category::NotSarc) return Category::Sarc;
    return Category::Ambig;
}

const char* category_name(Category c);  // "SARC" / "NOT-SARC" / "AMBIG"

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input that cannot be interpreted (bad row, bad token).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input that violates a uniqueness rule.
struct ConflictError : Error {
    using Error::Error;
};

}  // namespace truthgrid
