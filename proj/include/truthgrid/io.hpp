#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "truthgrid/matrix.hpp"
#include "truthgrid/types.hpp"

namespace truthgrid {

// Annotation CSV: header "item_id,annotator_id,label". Accepted label
// spellings: "1" / "+1" / "sarc" for +1 and "-1" / "0" / "notsarc" for -1
// (word forms case-insensitive). Lines starting with '#' are skipped.
AnnotationMatrix load_annotations(std::istream& in);
AnnotationMatrix load_annotations_file(const std::filesystem::path& path);

// Canonical form: rows sorted by item_id then annotator_id, labels written
// as "1" / "-1". Loading the output and writing again is byte-identical.
void write_annotations(const AnnotationMatrix& m, std::ostream& out);

// Gold CSV: header "item_id,label", one row per item, same label spellings.
GoldStandard load_gold(std::istream& in);
GoldStandard load_gold_file(const std::filesystem::path& path);
void write_gold(const GoldStandard& g, std::ostream& out);

std::optional<Label> parse_label_token(std::string_view token);

// Shortest representation that round-trips the exact double value.
std::string format_double(double v);

}  // namespace truthgrid
