#include "gaussbox/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gaussbox {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> tokenize(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) tokens.push_back(s.substr(start, i - start));
    }
    return tokens;
}

bool parse_coordinate(std::string_view token, double& out) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

ParsedLine parse_dota_line(std::string_view line) {
    ParsedLine out;
    const std::string_view body = trim(line);
    if (body.empty() || body.starts_with("imagesource:") || body.starts_with("gsd:")) {
        out.status = LineStatus::Skip;
        return out;
    }
    const auto tokens = tokenize(body);
    if (tokens.size() < 9 || tokens.size() > 10) {
        out.status = LineStatus::Error;
        out.error = "expected 9 or 10 tokens, got " + std::to_string(tokens.size());
        return out;
    }
    for (int i = 0; i < 8; ++i) {
        double value = 0.0;
        if (!parse_coordinate(tokens[static_cast<std::size_t>(i)], value)) {
            out.status = LineStatus::Error;
            out.error = "coordinate " + std::to_string(i + 1) + " is not a finite number: '" +
                        std::string(tokens[static_cast<std::size_t>(i)]) + "'";
            return out;
        }
        out.record.qbb.corners[static_cast<std::size_t>(i / 2)][i % 2] = value;
    }
    out.record.category = std::string(tokens[8]);
    if (tokens.size() == 10) {
        out.record.difficult = tokens[9] != "0";
    } else {
        out.record.difficult = false;
        out.note = "missing difficult flag; assuming 0";
    }
    out.status = LineStatus::Record;
    return out;
}

ParseResult parse_dota_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read annotation file: " + path.string());
    ParseResult result;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        ParsedLine parsed = parse_dota_line(line);
        switch (parsed.status) {
            case LineStatus::Record:
                parsed.record.source_file = path.string();
                parsed.record.line_number = line_number;
                if (!parsed.note.empty()) {
                    result.warnings.push_back({path.string(), line_number, parsed.note});
                }
                result.records.push_back(std::move(parsed.record));
                break;
            case LineStatus::Error:
                result.errors.push_back({path.string(), line_number, std::move(parsed.error)});
                break;
            case LineStatus::Skip:
                break;
        }
    }
    if (in.bad()) throw IoError("read failure on annotation file: " + path.string());
    return result;
}

void write_dota(std::span<const AnnotationRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write annotation file: " + path.string());
    char buf[64];
    for (const AnnotationRecord& rec : records) {
        std::ostringstream line;
        for (const Vec2& corner : rec.qbb.corners) {
            for (int axis = 0; axis < 2; ++axis) {
                std::snprintf(buf, sizeof(buf), "%.6g", corner[axis]);
                line << buf << ' ';
            }
        }
        line << rec.category << ' ' << (rec.difficult ? 1 : 0) << '\n';
        out << line.str();
    }
    out.flush();
    if (!out) throw IoError("write failure on annotation file: " + path.string());
}

DatasetSummary summarize_dataset(std::span<const ParseResult> per_file) {
    DatasetSummary summary;
    std::map<std::string, std::vector<double>> ratios_by_category;
    for (const ParseResult& file : per_file) {
        summary.parse_error_count += file.errors.size();
        for (const AnnotationRecord& rec : file.records) {
            ++summary.record_count;
            try {
                const Obb box = gaussian_to_obb(fit_gaussian_mle(rec.qbb));
                ratios_by_category[rec.category].push_back(box.aspect_ratio());
            } catch (const InvalidInputError&) {
                ++summary.degenerate_count;
                ratios_by_category[rec.category];  // count the category regardless
            }
        }
    }
    for (auto& [category, ratios] : ratios_by_category) {
        // Summing in sorted order keeps the result independent of the order
        // files were visited in.
        std::sort(ratios.begin(), ratios.end());
        double sum = 0.0;
        for (double r : ratios) sum += r;
        CategoryStats stats;
        stats.category = category;
        stats.mean_aspect_ratio = ratios.empty() ? 0.0 : sum / static_cast<double>(ratios.size());
        stats.count = 0;
        summary.categories.push_back(stats);
    }
    // Counts include degenerate records, so tally directly from the records.
    std::map<std::string, std::size_t> counts;
    for (const ParseResult& file : per_file) {
        for (const AnnotationRecord& rec : file.records) ++counts[rec.category];
    }
    for (CategoryStats& stats : summary.categories) stats.count = counts[stats.category];
    return summary;
}

}  // namespace gaussbox
