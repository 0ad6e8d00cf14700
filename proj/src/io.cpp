#include "truthgrid/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace truthgrid {

std::optional<Label> parse_label_token(std::string_view token) {
    if (token == "1" || token == "+1") return Label::Sarc;
    if (token == "-1" || token == "0") return Label::NotSarc;
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "sarc") return Label::Sarc;
    if (lower == "notsarc") return Label::NotSarc;
    return std::nullopt;
}

std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

namespace {

// Plain comma split; ids are opaque tokens without commas or quoting.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

struct CsvReader {
    std::istream& in;
    size_t lineno = 0;

    // Next data line, stripped of trailing \r; skips blank and '#' lines.
    std::optional<std::string> next() {
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            return line;
        }
        return std::nullopt;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    }
};

void expect_header(CsvReader& r, const std::string& expected) {
    auto line = r.next();
    if (!line) throw Error("empty input: expected header '" + expected + "'");
    if (*line != expected) r.fail("expected header '" + expected + "', got '" + *line + "'");
}

Label parse_label_field(CsvReader& r, const std::string& token) {
    auto label = parse_label_token(token);
    if (!label) r.fail("unrecognized label '" + token + "'");
    return *label;
}

}  // namespace

AnnotationMatrix load_annotations(std::istream& in) {
    CsvReader reader{in};
    expect_header(reader, "item_id,annotator_id,label");
    std::vector<JudgmentRecord> records;
    while (auto line = reader.next()) {
        auto fields = split_fields(*line);
        if (fields.size() != 3) {
            reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) reader.fail("empty item_id");
        if (fields[1].empty()) reader.fail("empty annotator_id");
        records.push_back({fields[0], fields[1], parse_label_field(reader, fields[2])});
    }
    if (records.empty()) throw Error("empty input: no judgment rows");
    return AnnotationMatrix::from_records(records);
}

AnnotationMatrix load_annotations_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open annotation file: " + path.string());
    return load_annotations(in);
}

void write_annotations(const AnnotationMatrix& m, std::ostream& out) {
    out << "item_id,annotator_id,label\n";
    for (uint32_t i = 0; i < m.item_count(); ++i) {
        for (const auto& v : m.item_votes(i)) {
            out << m.item_id(i) << ',' << m.annotator_id(v.peer) << ','
                << label_value(v.label) << '\n';
        }
    }
}

GoldStandard load_gold(std::istream& in) {
    CsvReader reader{in};
    expect_header(reader, "item_id,label");
    GoldStandard g;
    while (auto line = reader.next()) {
        auto fields = split_fields(*line);
        if (fields.size() != 2) {
            reader.fail("expected 2 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) reader.fail("empty item_id");
        const Label label = parse_label_field(reader, fields[1]);
        if (!g.truth.emplace(fields[0], label).second) {
            throw ConflictError("duplicate gold item '" + fields[0] + "'");
        }
    }
    if (g.truth.empty()) throw Error("empty input: no gold rows");
    return g;
}

GoldStandard load_gold_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open gold file: " + path.string());
    return load_gold(in);
}

void write_gold(const GoldStandard& g, std::ostream& out) {
    out << "item_id,label\n";
    for (const auto& [id, label] : g.truth) {
        out << id << ',' << label_value(label) << '\n';
    }
}

}  // namespace truthgrid
