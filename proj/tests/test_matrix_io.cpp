#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "truthgrid/io.hpp"
#include "truthgrid/matrix.hpp"
#include "truthgrid/rng.hpp"

using namespace truthgrid;

namespace {

// Independent component counter: plain BFS over the bipartite graph.
size_t bfs_components(const AnnotationMatrix& m) {
    const size_t items = m.item_count();
    const size_t nodes = items + m.annotator_count();
    std::vector<char> seen(nodes, 0);
    size_t components = 0;
    for (size_t start = 0; start < nodes; ++start) {
        if (seen[start]) continue;
        ++components;
        std::queue<size_t> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const size_t at = q.front();
            q.pop();
            if (at < items) {
                for (const auto& v : m.item_votes(static_cast<uint32_t>(at))) {
                    if (!seen[items + v.peer]) {
                        seen[items + v.peer] = 1;
                        q.push(items + v.peer);
                    }
                }
            } else {
                for (const auto& v : m.annotator_votes(static_cast<uint32_t>(at - items))) {
                    if (!seen[v.peer]) {
                        seen[v.peer] = 1;
                        q.push(v.peer);
                    }
                }
            }
        }
    }
    return components;
}

std::vector<JudgmentRecord> random_records(Rng& rng, uint32_t items, uint32_t annotators,
                                           double density) {
    std::vector<JudgmentRecord> records;
    for (uint32_t i = 0; i < items; ++i) {
        for (uint32_t a = 0; a < annotators; ++a) {
            if (rng.uniform01() < density) {
                records.push_back({"i" + std::to_string(i), "a" + std::to_string(a),
                                   rng.bernoulli(0.5) ? Label::Sarc : Label::NotSarc});
            }
        }
    }
    return records;
}

}  // namespace

TEST_CASE("labels and categories") {
    CHECK(label_value(Label::Sarc) == 1);
    CHECK(label_value(Label::NotSarc) == -1);
    CHECK(flipped(Label::Sarc) == Label::NotSarc);
    CHECK(flipped(Label::NotSarc) == Label::Sarc);
    CHECK(to_category(Label::Sarc) == Category::Sarc);
    CHECK(to_category(Label::NotSarc) == Category::NotSarc);
    CHECK(mirrored(Category::Sarc) == Category::NotSarc);
    CHECK(mirrored(Category::NotSarc) == Category::Sarc);
    CHECK(mirrored(Category::Ambig) == Category::Ambig);
    CHECK(std::string(category_name(Category::Sarc)) == "SARC");
    CHECK(std::string(category_name(Category::NotSarc)) == "NOT-SARC");
    CHECK(std::string(category_name(Category::Ambig)) == "AMBIG");
}

TEST_CASE("matrix construction indexes judgments both ways") {
    const std::vector<JudgmentRecord> records{
        {"i1", "a1", Label::Sarc},
        {"i1", "a2", Label::NotSarc},
        {"i2", "a1", Label::Sarc},
    };
    const AnnotationMatrix m = AnnotationMatrix::from_records(records);
    CHECK(m.item_count() == 2);
    CHECK(m.annotator_count() == 2);
    CHECK(m.judgment_count() == 3);
    REQUIRE(m.item_index("i1").has_value());
    REQUIRE(m.annotator_index("a2").has_value());
    CHECK_FALSE(m.item_index("nope").has_value());

    const auto& votes = m.item_votes(*m.item_index("i1"));
    REQUIRE(votes.size() == 2);
    CHECK(m.annotator_id(votes[0].peer) == "a1");
    CHECK(votes[0].label == Label::Sarc);
    CHECK(m.annotator_id(votes[1].peer) == "a2");
    CHECK(votes[1].label == Label::NotSarc);

    const auto& a1 = m.annotator_votes(*m.annotator_index("a1"));
    REQUIRE(a1.size() == 2);
    CHECK(m.item_id(a1[0].peer) == "i1");
    CHECK(m.item_id(a1[1].peer) == "i2");
}

TEST_CASE("transpose consistency on random matrices") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto records = random_records(rng, 6, 5, 0.6);
        if (records.empty()) continue;
        const AnnotationMatrix m = AnnotationMatrix::from_records(records);
        size_t rebuilt = 0;
        for (uint32_t a = 0; a < m.annotator_count(); ++a) {
            for (const auto& v : m.annotator_votes(a)) {
                const auto& iv = m.item_votes(v.peer);
                const auto hit = std::find_if(iv.begin(), iv.end(), [&](const auto& x) {
                    return x.peer == a && x.label == v.label;
                });
                CHECK(hit != iv.end());
                ++rebuilt;
            }
        }
        CHECK(rebuilt == m.judgment_count());
    }
}

TEST_CASE("duplicate judgments are conflicts, empty input is an error") {
    const std::vector<JudgmentRecord> dup{
        {"i1", "a1", Label::Sarc},
        {"i1", "a1", Label::Sarc},
    };
    CHECK_THROWS_WITH_AS(AnnotationMatrix::from_records(dup),
                         doctest::Contains("duplicate judgment"), ConflictError);
    CHECK_THROWS_AS(AnnotationMatrix::from_records({}), Error);
}

TEST_CASE("conflict error names the annotator and item") {
    const std::vector<JudgmentRecord> dup{
        {"i9", "a7", Label::Sarc},
        {"i2", "a1", Label::NotSarc},
        {"i9", "a7", Label::NotSarc},
    };
    try {
        AnnotationMatrix::from_records(dup);
        FAIL("expected ConflictError");
    } catch (const ConflictError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a7") != std::string::npos);
        CHECK(msg.find("i9") != std::string::npos);
    }
}

TEST_CASE("load_annotations parses the documented spellings") {
    std::istringstream in(
        "item_id,annotator_id,label\n"
        "# a comment line\n"
        "i1,a1,1\n"
        "i1,a2,-1\n"
        "\n"
        "i2,a1,+1\n"
        "i2,a2,0\n"
        "i3,a1,sarc\n"
        "i3,a2,NOTSARC\r\n");
    const AnnotationMatrix m = load_annotations(in);
    CHECK(m.item_count() == 3);
    CHECK(m.annotator_count() == 2);
    CHECK(m.judgment_count() == 6);
    const auto a1 = *m.annotator_index("a1");
    for (const auto& v : m.annotator_votes(a1)) CHECK(v.label == Label::Sarc);
    const auto a2 = *m.annotator_index("a2");
    for (const auto& v : m.annotator_votes(a2)) CHECK(v.label == Label::NotSarc);
}

TEST_CASE("load_annotations rejects malformed input with a line number") {
    std::istringstream bad_header("item,ann,label\ni1,a1,1\n");
    CHECK_THROWS_AS(load_annotations(bad_header), ParseError);

    std::istringstream bad_label("item_id,annotator_id,label\ni1,a1,2\n");
    CHECK_THROWS_WITH_AS(load_annotations(bad_label), doctest::Contains("line 2"), ParseError);

    std::istringstream short_row("item_id,annotator_id,label\ni1,a1\n");
    CHECK_THROWS_AS(load_annotations(short_row), ParseError);

    std::istringstream empty_id("item_id,annotator_id,label\n,a1,1\n");
    CHECK_THROWS_AS(load_annotations(empty_id), ParseError);

    std::istringstream dup("item_id,annotator_id,label\ni1,a1,1\ni1,a1,1\n");
    CHECK_THROWS_AS(load_annotations(dup), ConflictError);

    std::istringstream empty("item_id,annotator_id,label\n");
    CHECK_THROWS_WITH_AS(load_annotations(empty), doctest::Contains("empty"), Error);
}

TEST_CASE("load_annotations is order-insensitive") {
    Rng rng(43);
    auto records = random_records(rng, 8, 6, 0.5);
    std::ostringstream base;
    base << "item_id,annotator_id,label\n";
    for (const auto& r : records) {
        base << r.item_id << ',' << r.annotator_id << ',' << label_value(r.label) << '\n';
    }
    std::istringstream in1(base.str());
    const AnnotationMatrix m1 = load_annotations(in1);
    for (int trial = 0; trial < 5; ++trial) {
        rng.shuffle(records);
        std::ostringstream shuffled;
        shuffled << "item_id,annotator_id,label\n";
        for (const auto& r : records) {
            shuffled << r.item_id << ',' << r.annotator_id << ',' << label_value(r.label)
                     << '\n';
        }
        std::istringstream in2(shuffled.str());
        CHECK(load_annotations(in2) == m1);
    }
}

TEST_CASE("write/load round trip is byte stable") {
    Rng rng(47);
    const auto records = random_records(rng, 10, 7, 0.4);
    const AnnotationMatrix m = AnnotationMatrix::from_records(records);
    std::ostringstream out1;
    write_annotations(m, out1);
    std::istringstream back(out1.str());
    const AnnotationMatrix reloaded = load_annotations(back);
    CHECK(reloaded == m);
    std::ostringstream out2;
    write_annotations(reloaded, out2);
    CHECK(out1.str() == out2.str());
}

TEST_CASE("gold round trip and duplicate rejection") {
    GoldStandard g;
    g.truth["i1"] = Label::Sarc;
    g.truth["i2"] = Label::NotSarc;
    std::ostringstream out;
    write_gold(g, out);
    CHECK(out.str() == "item_id,label\ni1,1\ni2,-1\n");
    std::istringstream in(out.str());
    const GoldStandard back = load_gold(in);
    CHECK(back.truth == g.truth);

    std::istringstream dup("item_id,label\ni1,1\ni1,-1\n");
    CHECK_THROWS_AS(load_gold(dup), ConflictError);
}

TEST_CASE("label token spellings") {
    CHECK(parse_label_token("1") == Label::Sarc);
    CHECK(parse_label_token("+1") == Label::Sarc);
    CHECK(parse_label_token("sarc") == Label::Sarc);
    CHECK(parse_label_token("SARC") == Label::Sarc);
    CHECK(parse_label_token("-1") == Label::NotSarc);
    CHECK(parse_label_token("0") == Label::NotSarc);
    CHECK(parse_label_token("notsarc") == Label::NotSarc);
    CHECK(parse_label_token("NotSarc") == Label::NotSarc);
    CHECK_FALSE(parse_label_token("2").has_value());
    CHECK_FALSE(parse_label_token("").has_value());
    CHECK_FALSE(parse_label_token("yes").has_value());
}

TEST_CASE("validate_matrix reports judgment shortfalls and components") {
    std::istringstream in(
        "item_id,annotator_id,label\n"
        "i1,a1,1\n"
        "i1,a2,-1\n"
        "i2,a1,1\n"
        "i2,a2,1\n");
    const AnnotationMatrix m = load_annotations(in);
    const ValidationReport r = validate_matrix(m);
    CHECK(r.item_count == 2);
    CHECK(r.annotator_count == 2);
    CHECK(r.judgment_count == 4);
    CHECK(r.low_judgment_items.size() == 2);       // both have 2 < 3
    CHECK(r.low_judgment_annotators.size() == 2);  // both have 2 < 10
    CHECK(r.connected_components == 1);
}

TEST_CASE("disjoint groups are separate components") {
    std::istringstream in(
        "item_id,annotator_id,label\n"
        "i1,a1,1\n"
        "i2,a1,1\n"
        "i3,a2,-1\n"
        "i4,a2,-1\n");
    const AnnotationMatrix m = load_annotations(in);
    CHECK(validate_matrix(m).connected_components == 2);
    CHECK(bfs_components(m) == 2);
}

TEST_CASE("component counts agree with a BFS oracle on random matrices") {
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const auto records =
            random_records(rng, 2 + static_cast<uint32_t>(rng.bounded(10)),
                           2 + static_cast<uint32_t>(rng.bounded(8)), 0.08 + 0.2 * rng.uniform01());
        if (records.empty()) continue;
        const AnnotationMatrix m = AnnotationMatrix::from_records(records);
        CHECK(validate_matrix(m).connected_components == bfs_components(m));
    }
}

TEST_CASE("format_double round trips exactly") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
    Rng rng(59);
    for (int trial = 0; trial < 200; ++trial) {
        const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.bounded(8));
        const std::string s = format_double(v);
        const double back = std::stod(s);
        CHECK(std::bit_cast<uint64_t>(back) == std::bit_cast<uint64_t>(v));
    }
}
