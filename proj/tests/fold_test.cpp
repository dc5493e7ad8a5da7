#include "forge/fold.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace forge;

namespace {

const char* blank_doc = R"({
  "vertices_coords": [[0,0],[10,0],[10,10],[0,10]],
  "edges_vertices": [[0,1],[1,2],[2,3],[3,0]],
  "edges_assignment": ["B","B","B","B"],
  "faces_vertices": [[0,1,2,3]]
})";

FoldErrc parse_error(const std::string& text) {
    try {
        parse_fold(text);
    } catch (const FoldError& e) {
        return e.code();
    }
    ADD_FAILURE() << "parsed: " << text;
    return FoldErrc::Syntax;
}

} // namespace

TEST(Fold, ParsesBlankSquare) {
    const FoldFile f = parse_fold(blank_doc);
    EXPECT_EQ(f.vertices_coords.size(), 4U);
    EXPECT_EQ(f.edges_vertices.size(), 4U);
    EXPECT_EQ(f.faces_vertices.size(), 1U);
    EXPECT_TRUE(f.extra_fields.empty());
    for (Assignment a : f.edges_assignment) EXPECT_EQ(a, Assignment::Boundary);
}

TEST(Fold, AssignmentCountMismatch) {
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0],[10,0],[10,10],[0,10]],
        "edges_vertices": [[0,1],[1,2],[2,3],[3,0]], "edges_assignment": ["B","B","B"],
        "faces_vertices": [[0,1,2,3]]})"),
              FoldErrc::Mismatch);
}

TEST(Fold, RejectsBadDocuments) {
    EXPECT_EQ(parse_error("{"), FoldErrc::Syntax);
    EXPECT_EQ(parse_error("[]"), FoldErrc::Syntax);
    EXPECT_EQ(parse_error(R"({"vertices_coords": []})"), FoldErrc::Schema);
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0,1]], "edges_vertices": [], "edges_assignment": [],
        "faces_vertices": []})"),
              FoldErrc::Schema);
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0],[1,0]], "edges_vertices": [[0,2]],
        "edges_assignment": ["B"], "faces_vertices": []})"),
              FoldErrc::Index);
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0],[1,0]], "edges_vertices": [[0,-1]],
        "edges_assignment": ["B"], "faces_vertices": []})"),
              FoldErrc::Index);
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0],[1,0]], "edges_vertices": [[0,1]],
        "edges_assignment": ["X"], "faces_vertices": []})"),
              FoldErrc::Schema);
    EXPECT_EQ(parse_error(R"({"vertices_coords": [[0,0],[1,0],[1,1]], "edges_vertices": [],
        "edges_assignment": [], "faces_vertices": [[0,1,1]]})"),
              FoldErrc::Schema);
}

TEST(Fold, AssignmentLetters) {
    EXPECT_EQ(assignment_from("M"), Assignment::Mountain);
    EXPECT_EQ(assignment_from("V"), Assignment::Valley);
    EXPECT_EQ(assignment_from("F"), Assignment::Flat);
    EXPECT_EQ(assignment_from("B"), Assignment::Boundary);
    EXPECT_FALSE(assignment_from("Q"));
    EXPECT_EQ(to_char(Assignment::Valley), 'V');
    EXPECT_TRUE(is_crease(Assignment::Mountain));
    EXPECT_FALSE(is_crease(Assignment::Flat));
}

TEST(Fold, BlankSerializesToGoldenFixture) {
    const std::string once = serialize_fold(parse_fold(blank_doc));
    EXPECT_EQ(once, fixtures::text("blank.fold"));
    EXPECT_EQ(serialize_fold(parse_fold(once)), once);
}

TEST(Fold, ExtraFieldsKeptVerbatim) {
    FoldFile f = parse_fold(blank_doc);
    f.extra_fields["file_author"] = "\"x\"";
    const std::string text = serialize_fold(f);
    EXPECT_NE(text.find("\"file_author\": \"x\""), std::string::npos) << text;
    EXPECT_EQ(parse_fold(text), f);
}

TEST(Fold, NumbersRoundTripExactly) {
    FoldFile f = parse_fold(blank_doc);
    f.vertices_coords[2] = {10.0, 4.142135623730951};
    f.vertices_coords[3] = {0.1 + 0.2, 1e-17};
    const FoldFile back = parse_fold(serialize_fold(f));
    EXPECT_EQ(back.vertices_coords, f.vertices_coords);
}

TEST(Fold, EveryFixtureIsARoundTripFixpoint) {
    const auto names = fixtures::fold_names();
    ASSERT_GE(names.size(), 10U);
    for (const auto& name : names) {
        SCOPED_TRACE(name);
        const FoldFile first = fixtures::fold(name);
        const std::string text = serialize_fold(first);
        const FoldFile second = parse_fold(text);
        EXPECT_EQ(second, first);
        EXPECT_EQ(serialize_fold(second), text);
    }
}

TEST(Fold, FixtureMetadataSurvives) {
    const FoldFile f = fixtures::fold("book_flat");
    EXPECT_EQ(f.extra_fields.count("file_creator"), 1U);
    EXPECT_EQ(f.extra_fields.count("frame_classes"), 1U);
    EXPECT_EQ(parse_fold(serialize_fold(f)).extra_fields, f.extra_fields);
}

TEST(Complexity, BlankPaperIsEasy) { EXPECT_EQ(classify_complexity(4, 0), Complexity::Easy); }

TEST(Complexity, ThresholdsAreInclusive) {
    EXPECT_EQ(classify_complexity(4, 20), Complexity::Easy);
    EXPECT_EQ(classify_complexity(4, 21), Complexity::Medium);
    EXPECT_EQ(classify_complexity(4, 60), Complexity::Medium);
    EXPECT_EQ(classify_complexity(4, 61), Complexity::Hard);
    ComplexityThresholds t;
    t.easy_max_vertices = 10;
    t.medium_max_vertices = 20;
    EXPECT_EQ(classify_complexity(10, 0, t), Complexity::Easy);
    EXPECT_EQ(classify_complexity(11, 0, t), Complexity::Medium);
    EXPECT_EQ(classify_complexity(21, 0, t), Complexity::Hard);
}

TEST(Complexity, MonotoneInBothCounts) {
    ComplexityThresholds t;
    t.easy_max_vertices = 12;
    t.medium_max_vertices = 30;
    for (std::size_t v = 0; v < 40; ++v) {
        for (std::size_t c = 0; c < 80; ++c) {
            const auto here = classify_complexity(v, c, t);
            EXPECT_GE(classify_complexity(v + 1, c, t), here);
            EXPECT_GE(classify_complexity(v, c + 1, t), here);
        }
    }
}

TEST(Complexity, DescribeCountsOnlyFoldLines) {
    const DesignMeta m = describe(fixtures::fold("book_flat"), "geometry");
    EXPECT_EQ(m.category, "geometry");
    EXPECT_EQ(m.vertex_count, 7U);
    EXPECT_EQ(m.crease_count, 2U);
    EXPECT_EQ(m.complexity, Complexity::Easy);
}
