#include "gaussbox/ingest.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gaussbox/io.hpp"
#include "gaussbox/random.hpp"
#include "oracles.hpp"

namespace gaussbox {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtureDir = GAUSSBOX_FIXTURE_DIR;

fs::path temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gaussbox_ingest_tests";
    fs::create_directories(dir);
    return dir / name;
}

TEST(ParseDotaLine, WellFormedRecord) {
    const ParsedLine parsed = parse_dota_line("1 1 3 1 3 2 1 2 ship 0");
    ASSERT_EQ(parsed.status, LineStatus::Record);
    EXPECT_EQ(parsed.record.category, "ship");
    EXPECT_FALSE(parsed.record.difficult);
    EXPECT_EQ(parsed.record.qbb.corners[0], Vec2(1, 1));
    EXPECT_EQ(parsed.record.qbb.corners[1], Vec2(3, 1));
    EXPECT_EQ(parsed.record.qbb.corners[2], Vec2(3, 2));
    EXPECT_EQ(parsed.record.qbb.corners[3], Vec2(1, 2));
}

TEST(ParseDotaLine, HeadersAndBlanksSkip) {
    EXPECT_EQ(parse_dota_line("imagesource:GoogleEarth").status, LineStatus::Skip);
    EXPECT_EQ(parse_dota_line("gsd:0.15").status, LineStatus::Skip);
    EXPECT_EQ(parse_dota_line("").status, LineStatus::Skip);
    EXPECT_EQ(parse_dota_line("   \t  ").status, LineStatus::Skip);
}

TEST(ParseDotaLine, MalformedTokensBecomeErrors) {
    const ParsedLine bad_coord = parse_dota_line("1 2 3 four 5 6 7 8 ship 0");
    EXPECT_EQ(bad_coord.status, LineStatus::Error);
    EXPECT_NE(bad_coord.error.find("coordinate 4"), std::string::npos);

    EXPECT_EQ(parse_dota_line("1 2 3").status, LineStatus::Error);
    EXPECT_EQ(parse_dota_line("1 2 3 4 5 6 7 8 ship 0 extra").status, LineStatus::Error);
    EXPECT_EQ(parse_dota_line("1 2 3 inf 5 6 7 8 ship 0").status, LineStatus::Error);
    EXPECT_EQ(parse_dota_line("1 2 3 nan 5 6 7 8 ship 0").status, LineStatus::Error);
}

TEST(ParseDotaLine, MissingDifficultFlagWarnsAndDefaults) {
    const ParsedLine parsed = parse_dota_line("1 1 3 1 3 2 1 2 ship");
    ASSERT_EQ(parsed.status, LineStatus::Record);
    EXPECT_FALSE(parsed.record.difficult);
    EXPECT_FALSE(parsed.note.empty());

    const ParsedLine difficult = parse_dota_line("1 1 3 1 3 2 1 2 ship 2");
    ASSERT_EQ(difficult.status, LineStatus::Record);
    EXPECT_TRUE(difficult.record.difficult);
}

TEST(ParseDotaLine, SurvivesArbitraryBytes) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        std::string line;
        const int len = static_cast<int>(rng() % 60);
        for (int c = 0; c < len; ++c) {
            const auto mode = rng() % 4;
            if (mode == 0) {
                line.push_back(static_cast<char>(rng() % 256));
            } else if (mode == 1) {
                line.push_back(' ');
            } else if (mode == 2) {
                line.push_back(static_cast<char>('0' + rng() % 10));
            } else {
                line.push_back(static_cast<char>('a' + rng() % 26));
            }
        }
        const ParsedLine parsed = parse_dota_line(line);
        EXPECT_TRUE(parsed.status == LineStatus::Record || parsed.status == LineStatus::Skip ||
                    parsed.status == LineStatus::Error);
    }
}

TEST(ParseDotaFile, FixtureWithGoodAndBadLines) {
    const ParseResult clean = parse_dota_file(kFixtureDir / "dota" / "P0001.txt");
    EXPECT_EQ(clean.records.size(), 5u);
    EXPECT_TRUE(clean.errors.empty());
    EXPECT_EQ(clean.records[0].category, "large-vehicle");
    EXPECT_EQ(clean.records[0].line_number, 3);
    EXPECT_TRUE(clean.records[3].difficult);

    const ParseResult mixed = parse_dota_file(kFixtureDir / "dota" / "P0003_bad.txt");
    EXPECT_EQ(mixed.records.size(), 3u);  // the 9-token line parses with a warning
    EXPECT_EQ(mixed.errors.size(), 2u);
    EXPECT_EQ(mixed.errors[0].line_number, 3);
    EXPECT_EQ(mixed.warnings.size(), 1u);
}

TEST(ParseDotaFile, EmptyFileAndMissingFile) {
    const fs::path empty = temp_path("empty.txt");
    std::ofstream(empty).close();
    const ParseResult res = parse_dota_file(empty);
    EXPECT_TRUE(res.records.empty());
    EXPECT_TRUE(res.errors.empty());

    EXPECT_THROW(parse_dota_file(temp_path("does_not_exist.txt")), IoError);
}

TEST(WriteDota, RoundTripsThroughParse) {
    const ParseResult original = parse_dota_file(kFixtureDir / "dota" / "P0002.txt");
    ASSERT_EQ(original.records.size(), 4u);

    const fs::path out = temp_path("roundtrip.txt");
    write_dota(original.records, out);
    const ParseResult reparsed = parse_dota_file(out);
    ASSERT_EQ(reparsed.records.size(), original.records.size());
    for (std::size_t i = 0; i < original.records.size(); ++i) {
        EXPECT_EQ(reparsed.records[i].category, original.records[i].category);
        EXPECT_EQ(reparsed.records[i].difficult, original.records[i].difficult);
        for (std::size_t c = 0; c < 4; ++c) {
            EXPECT_EQ(reparsed.records[i].qbb.corners[c], original.records[i].qbb.corners[c]);
        }
    }

    // A second write/parse cycle is exactly stable.
    const fs::path out2 = temp_path("roundtrip2.txt");
    write_dota(reparsed.records, out2);
    EXPECT_EQ(read_text_file(out), read_text_file(out2));
}

TEST(WriteDota, EmptyRecordListWritesEmptyFile) {
    const fs::path out = temp_path("empty_out.txt");
    write_dota({}, out);
    std::ifstream in(out);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_TRUE(content.empty());
}

TEST(SummarizeDataset, SingleRectangleAndEmptyInput) {
    AnnotationRecord rec;
    rec.qbb = obb_to_qbb({0, 0, 3, 1, 0});
    rec.category = "bridge";
    ParseResult file;
    file.records.push_back(rec);
    const DatasetSummary summary = summarize_dataset(std::vector<ParseResult>{file});
    ASSERT_EQ(summary.categories.size(), 1u);
    EXPECT_EQ(summary.categories[0].category, "bridge");
    EXPECT_EQ(summary.categories[0].count, 1u);
    EXPECT_NEAR(summary.categories[0].mean_aspect_ratio, 3.0, 1e-9);

    const DatasetSummary empty = summarize_dataset({});
    EXPECT_TRUE(empty.categories.empty());
    EXPECT_EQ(empty.record_count, 0u);
}

TEST(SummarizeDataset, RecoversGeneratingAspectRatios) {
    std::mt19937_64 rng(7);
    ParseResult file;
    std::vector<double> ratios;
    for (int i = 0; i < 50; ++i) {
        const Obb box = oracles::random_canonical_obb(rng, 1.2, 6.0);
        ratios.push_back(box.aspect_ratio());
        AnnotationRecord rec;
        rec.qbb = obb_to_qbb(box);
        rec.category = "synthetic";
        file.records.push_back(rec);
    }
    double expected = 0.0;
    for (double r : ratios) expected += r;
    expected /= static_cast<double>(ratios.size());

    const DatasetSummary summary = summarize_dataset(std::vector<ParseResult>{file});
    ASSERT_EQ(summary.categories.size(), 1u);
    EXPECT_NEAR(summary.categories[0].mean_aspect_ratio, expected, 1e-6);
    EXPECT_EQ(summary.degenerate_count, 0u);
}

TEST(SummarizeDataset, OrderIndependentAndCountsDegenerates) {
    ParseResult file_a, file_b;
    AnnotationRecord rec;
    rec.qbb = obb_to_qbb({0, 0, 4, 2, 0.3});
    rec.category = "ship";
    file_a.records.push_back(rec);
    rec.qbb = obb_to_qbb({5, 5, 6, 2, 1.1});
    file_b.records.push_back(rec);
    // Degenerate: all corners identical.
    AnnotationRecord degenerate;
    degenerate.qbb.corners = {Vec2{1, 1}, Vec2{1, 1}, Vec2{1, 1}, Vec2{1, 1}};
    degenerate.category = "ship";
    file_b.records.push_back(degenerate);
    file_a.errors.push_back({"f", 1, "bad"});

    const DatasetSummary ab = summarize_dataset(std::vector<ParseResult>{file_a, file_b});
    const DatasetSummary ba = summarize_dataset(std::vector<ParseResult>{file_b, file_a});
    ASSERT_EQ(ab.categories.size(), 1u);
    EXPECT_EQ(ab.categories[0].count, 3u);
    EXPECT_EQ(ab.categories[0].mean_aspect_ratio, ba.categories[0].mean_aspect_ratio);
    EXPECT_EQ(ab.degenerate_count, 1u);
    EXPECT_EQ(ab.parse_error_count, 1u);
}

TEST(SummarizeDataset, HrscStyleElongatedFixture) {
    const ParseResult ships = parse_dota_file(kFixtureDir / "dota" / "P0002.txt");
    const DatasetSummary summary = summarize_dataset(std::vector<ParseResult>{ships});
    for (const CategoryStats& c : summary.categories) {
        EXPECT_GT(c.mean_aspect_ratio, 1.0);
        EXPECT_TRUE(std::isfinite(c.mean_aspect_ratio));
    }
    // Ships in the fixture are elongated.
    const auto ship = std::find_if(summary.categories.begin(), summary.categories.end(),
                                   [](const CategoryStats& c) { return c.category == "ship"; });
    ASSERT_NE(ship, summary.categories.end());
    EXPECT_GT(ship->mean_aspect_ratio, 1.8);
}

}  // namespace
}  // namespace gaussbox
