#pragma once
/**
 * @file ingest.hpp
 * @brief DOTA-style annotation text parsing, writing, and dataset summaries.
 *
 * Line format: "x1 y1 x2 y2 x3 y3 x4 y4 category difficult". Header lines
 * starting with "imagesource:" or "gsd:" and blank lines are skipped. Only
 * the DOTA v1.0 text convention is handled; other annotation formats would
 * need their own parsers.
 */

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaussbox/geometry.hpp"

namespace gaussbox {

struct AnnotationRecord {
    Qbb qbb;
    std::string category;
    bool difficult = false;
    std::string source_file;
    int line_number = 0;
};

struct ParseIssue {
    std::string file;
    int line_number = 0;
    std::string message;
};

enum class LineStatus { Record, Skip, Error };

struct ParsedLine {
    LineStatus status = LineStatus::Skip;
    AnnotationRecord record;  // valid when status == Record
    std::string error;        // set when status == Error
    std::string note;         // tolerated irregularity, e.g. missing difficult flag
};

/// Classify one line as record, skip, or structured error. Total: no input
/// throws or crashes.
ParsedLine parse_dota_line(std::string_view line);

struct ParseResult {
    std::vector<AnnotationRecord> records;
    std::vector<ParseIssue> errors;
    std::vector<ParseIssue> warnings;
};

/// Parse a whole file, order-preserving, collecting bad lines as errors
/// rather than aborting. Throws IoError when the file cannot be read.
ParseResult parse_dota_file(const std::filesystem::path& path);

/// Write records in the line format above, coordinates at up to six
/// significant digits. Throws IoError on write failure.
void write_dota(std::span<const AnnotationRecord> records, const std::filesystem::path& path);

struct CategoryStats {
    std::string category;
    std::size_t count = 0;
    double mean_aspect_ratio = 0.0;  // via Gaussian fit and decode
};

struct DatasetSummary {
    std::vector<CategoryStats> categories;  // sorted by category name
    std::size_t record_count = 0;
    std::size_t parse_error_count = 0;
    std::size_t degenerate_count = 0;  // records whose corners do not span 2-D
};

/// Merge per-file parse results into per-category counts and mean aspect
/// ratios. Independent of the order the files were parsed in.
DatasetSummary summarize_dataset(std::span<const ParseResult> per_file);

}  // namespace gaussbox
