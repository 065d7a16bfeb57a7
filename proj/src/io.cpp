#include "gaussbox/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gaussbox {

namespace {

double require_number(const Json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number()) {
        throw InvalidInputError(std::string("payload field '") + field + "' must be a number");
    }
    return j[field].get<double>();
}

Vec2 require_vec2(const Json& j, const char* field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InvalidInputError(std::string("payload field '") + field +
                                "' must be an array of two numbers");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string format_number(double value) {
    return Json(value).dump();
}

Json to_json(const Obb& box) {
    return Json{{"cx", box.cx}, {"cy", box.cy}, {"w", box.w}, {"h", box.h}, {"theta", box.theta}};
}

Json to_json(const Gaussian2& g) {
    return Json{{"mu", {g.mu.x(), g.mu.y()}},
                {"sigma",
                 {{g.sigma(0, 0), g.sigma(0, 1)}, {g.sigma(1, 0), g.sigma(1, 1)}}}};
}

Json to_json(const PointSetRep& pts) {
    Json arr = Json::array();
    for (const Vec2& p : pts.points) arr.push_back({p.x(), p.y()});
    return Json{{"points", std::move(arr)}};
}

Obb obb_from_json(const Json& j) {
    Obb box;
    box.cx = require_number(j, "cx");
    box.cy = require_number(j, "cy");
    box.w = require_number(j, "w");
    box.h = require_number(j, "h");
    box.theta = require_number(j, "theta");
    validate_obb(box);
    return box;
}

Gaussian2 gaussian_from_json(const Json& j) {
    if (!j.contains("mu")) throw InvalidInputError("payload field 'mu' is missing");
    if (!j.contains("sigma") || !j["sigma"].is_array() || j["sigma"].size() != 2) {
        throw InvalidInputError("payload field 'sigma' must be a 2x2 numeric matrix");
    }
    Gaussian2 g;
    g.mu = require_vec2(j["mu"], "mu");
    const Vec2 row0 = require_vec2(j["sigma"][0], "sigma");
    const Vec2 row1 = require_vec2(j["sigma"][1], "sigma");
    g.sigma << row0.x(), row0.y(), row1.x(), row1.y();
    validate_gaussian(g);
    return g;
}

PointSetRep points_from_json(const Json& j) {
    if (!j.contains("points") || !j["points"].is_array()) {
        throw InvalidInputError("payload field 'points' must be an array of [x,y] pairs");
    }
    PointSetRep pts;
    for (const Json& entry : j["points"]) {
        pts.points.push_back(require_vec2(entry, "points"));
    }
    if (pts.points.size() < 3) {
        throw InvalidInputError("payload field 'points' needs at least 3 points");
    }
    return pts;
}

Gaussian2 Payload::as_gaussian() const {
    switch (kind) {
        case PayloadKind::Obb: return obb_to_gaussian(obb);
        case PayloadKind::Gaussian: return gaussian;
        case PayloadKind::Points: return fit_gaussian_mle(points);
    }
    throw InvalidInputError("unknown payload kind");
}

Payload payload_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInputError("payload must be a JSON object");
    Payload p;
    if (j.contains("cx")) {
        p.kind = PayloadKind::Obb;
        p.obb = obb_from_json(j);
    } else if (j.contains("mu")) {
        p.kind = PayloadKind::Gaussian;
        p.gaussian = gaussian_from_json(j);
    } else if (j.contains("points")) {
        p.kind = PayloadKind::Points;
        p.points = points_from_json(j);
    } else {
        throw InvalidInputError(
            "payload must contain 'cx' (box), 'mu' (gaussian), or 'points' (point set)");
    }
    return p;
}

Json to_json(const Scene& scene) {
    Json gts = Json::array();
    for (const GroundTruth& gt : scene.gts) {
        gts.push_back(Json{{"box", to_json(gt.box)}, {"category", gt.category}});
    }
    Json proposals = Json::array();
    for (const Proposal& p : scene.proposals) {
        proposals.push_back(Json{
            {"gaussian", to_json(p.gaussian)},
            {"source", p.source == ProposalSource::Grid ? "grid" : "jittered"},
            {"source_gt", p.source_gt}});
    }
    return Json{{"seed", scene.seed},
                {"config",
                 Json{{"num_gts", scene.config.num_gts},
                      {"extent", scene.config.extent},
                      {"size_min", scene.config.size_min},
                      {"size_max", scene.config.size_max},
                      {"aspect_min", scene.config.aspect_min},
                      {"aspect_max", scene.config.aspect_max},
                      {"grid_per_axis", scene.config.grid_per_axis},
                      {"jitter_copies", scene.config.jitter_copies},
                      {"jitter", scene.config.jitter}}},
                {"gts", std::move(gts)},
                {"proposals", std::move(proposals)}};
}

Scene scene_from_json(const Json& j) {
    Scene scene;
    if (j.contains("seed")) scene.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("config")) {
        const Json& c = j["config"];
        SceneConfig& cfg = scene.config;
        if (c.contains("num_gts")) cfg.num_gts = c["num_gts"].get<int>();
        if (c.contains("extent")) cfg.extent = c["extent"].get<double>();
        if (c.contains("size_min")) cfg.size_min = c["size_min"].get<double>();
        if (c.contains("size_max")) cfg.size_max = c["size_max"].get<double>();
        if (c.contains("aspect_min")) cfg.aspect_min = c["aspect_min"].get<double>();
        if (c.contains("aspect_max")) cfg.aspect_max = c["aspect_max"].get<double>();
        if (c.contains("grid_per_axis")) cfg.grid_per_axis = c["grid_per_axis"].get<int>();
        if (c.contains("jitter_copies")) cfg.jitter_copies = c["jitter_copies"].get<int>();
        if (c.contains("jitter")) cfg.jitter = c["jitter"].get<double>();
    }
    if (!j.contains("gts") || !j["gts"].is_array() || j["gts"].empty()) {
        throw InvalidInputError("scene field 'gts' must be a non-empty array");
    }
    for (const Json& entry : j["gts"]) {
        if (!entry.contains("box")) throw InvalidInputError("scene gt entry is missing 'box'");
        GroundTruth gt;
        gt.box = obb_from_json(entry["box"]);
        gt.category = entry.value("category", std::string("unknown"));
        scene.gts.push_back(std::move(gt));
    }
    if (!j.contains("proposals") || !j["proposals"].is_array() || j["proposals"].empty()) {
        throw InvalidInputError("scene field 'proposals' must be a non-empty array");
    }
    for (const Json& entry : j["proposals"]) {
        if (!entry.contains("gaussian")) {
            throw InvalidInputError("scene proposal entry is missing 'gaussian'");
        }
        Proposal p;
        p.gaussian = gaussian_from_json(entry["gaussian"]);
        p.source = entry.value("source", std::string("grid")) == "jittered"
                       ? ProposalSource::JitteredGt
                       : ProposalSource::Grid;
        p.source_gt = entry.value("source_gt", -1);
        scene.proposals.push_back(std::move(p));
    }
    return scene;
}

Json to_json(const ExperimentReport& report) {
    Json j{{"strategy", to_string(report.strategy.kind)},
           {"score_kind", to_string(report.score_kind)},
           {"candidates_per_gt", report.strategy.candidates_per_gt},
           {"seed", report.strategy.seed},
           {"positives_per_gt", report.positives_per_gt},
           {"num_positive", report.num_positive},
           {"num_negative", report.num_negative},
           {"num_ignore", report.num_ignore},
           {"mean_positive_score", report.mean_positive_score},
           {"runtime_ms", report.runtime_ms}};
    if (report.strategy.kind == StrategySpec::Kind::Fixed ||
        report.strategy.kind == StrategySpec::Kind::IouFixed) {
        j["pos_thr"] = report.strategy.pos_thr;
        j["neg_thr"] = report.strategy.neg_thr;
        j["force_match"] = report.strategy.force_match;
    }
    if (report.recovery_rate.has_value()) {
        j["recovery_rate"] = *report.recovery_rate;
    } else {
        j["recovery_rate"] = nullptr;
    }
    return j;
}

Json to_json(const DatasetSummary& summary) {
    Json cats = Json::array();
    for (const CategoryStats& c : summary.categories) {
        cats.push_back(Json{{"category", c.category},
                            {"count", c.count},
                            {"mean_aspect_ratio", c.mean_aspect_ratio}});
    }
    return Json{{"categories", std::move(cats)},
                {"record_count", summary.record_count},
                {"parse_error_count", summary.parse_error_count},
                {"degenerate_count", summary.degenerate_count}};
}

std::string assignment_csv(const AssignmentResult& result) {
    std::ostringstream out;
    out << "proposal_id,label,matched_gt,score,raw_distance\n";
    for (std::size_t j = 0; j < result.proposals.size(); ++j) {
        const ProposalAssignment& pa = result.proposals[j];
        out << j << ',' << to_string(pa.label) << ',' << pa.gt << ',' << format_number(pa.score)
            << ',' << format_number(pa.distance) << '\n';
    }
    return out.str();
}

std::string trace_csv(const OptimizationTrace& trace) {
    std::ostringstream out;
    out << "step,loss,distance";
    const std::size_t k = trace.steps.empty() ? 0 : trace.steps.front().points.size();
    for (std::size_t i = 0; i < k; ++i) out << ",x" << i << ",y" << i;
    out << '\n';
    for (const TraceStep& s : trace.steps) {
        out << s.step << ',' << format_number(s.loss) << ',' << format_number(s.distance);
        for (const Vec2& p : s.points.points) {
            out << ',' << format_number(p.x()) << ',' << format_number(p.y());
        }
        out << '\n';
    }
    return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "theta,gaussian_loss,param_loss\n";
    for (const SweepSample& s : sweep.samples) {
        out << format_number(s.theta) << ',' << format_number(s.gaussian_loss) << ','
            << format_number(s.param_loss) << '\n';
    }
    return out.str();
}

std::string summary_csv(const DatasetSummary& summary) {
    std::ostringstream out;
    out << "category,count,mean_aspect_ratio\n";
    for (const CategoryStats& c : summary.categories) {
        out << c.category << ',' << c.count << ',' << format_number(c.mean_aspect_ratio) << '\n';
    }
    return out.str();
}

namespace {

void append_polygon(std::ostringstream& out, const Qbb& q, const char* stroke) {
    out << "    <polygon points=\"";
    for (std::size_t i = 0; i < q.corners.size(); ++i) {
        if (i > 0) out << ' ';
        out << format_number(q.corners[i].x()) << ',' << format_number(q.corners[i].y());
    }
    out << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"0.5\"/>\n";
}

/// Two-standard-deviation ellipse: semi-axes 2*sqrt(lambda) along the
/// eigenvectors.
void append_ellipse(std::ostringstream& out, const Gaussian2& g, const char* stroke) {
    const SymEig2 eig = sym_eig2(g.sigma);
    const double deg = eig.angle * 180.0 / std::numbers::pi;
    out << "    <ellipse cx=\"0\" cy=\"0\" rx=\"" << format_number(2.0 * std::sqrt(eig.lambda_max))
        << "\" ry=\"" << format_number(2.0 * std::sqrt(eig.lambda_min)) << "\" transform=\""
        << "translate(" << format_number(g.mu.x()) << ' ' << format_number(g.mu.y()) << ") rotate("
        << format_number(deg) << ")\" fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"0.4\"/>\n";
}

std::string svg_open(double min_x, double min_y, double width, double height) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_number(min_x) << ' '
        << format_number(min_y) << ' ' << format_number(width) << ' ' << format_number(height)
        << "\">\n";
    return out.str();
}

}  // namespace

std::string scene_svg(const Scene& scene) {
    std::ostringstream out;
    out << svg_open(0.0, 0.0, scene.config.extent, scene.config.extent);
    out << "  <g id=\"ground-truth\">\n";
    for (const GroundTruth& gt : scene.gts) append_polygon(out, obb_to_qbb(gt.box), "#1f77b4");
    out << "  </g>\n  <g id=\"grid-proposals\">\n";
    for (const Proposal& p : scene.proposals) {
        if (p.source == ProposalSource::Grid) append_ellipse(out, p.gaussian, "#bbbbbb");
    }
    out << "  </g>\n  <g id=\"jittered-proposals\">\n";
    for (const Proposal& p : scene.proposals) {
        if (p.source == ProposalSource::JitteredGt) append_ellipse(out, p.gaussian, "#d62728");
    }
    out << "  </g>\n</svg>\n";
    return out.str();
}

std::string optimize_svg(const Obb& gt, const OptimizationTrace& trace) {
    const double pad = std::hypot(gt.w, gt.h);
    std::ostringstream out;
    out << svg_open(gt.cx - pad, gt.cy - pad, 2.0 * pad, 2.0 * pad);
    out << "  <g id=\"ground-truth\">\n";
    append_polygon(out, obb_to_qbb(gt), "#1f77b4");
    out << "  </g>\n";
    if (!trace.steps.empty()) {
        out << "  <g id=\"initial-points\">\n";
        for (const Vec2& p : trace.steps.front().points.points) {
            out << "    <circle cx=\"" << format_number(p.x()) << "\" cy=\""
                << format_number(p.y()) << "\" r=\"" << format_number(pad * 0.015)
                << "\" fill=\"#aaaaaa\"/>\n";
        }
        out << "  </g>\n  <g id=\"final-points\">\n";
        for (const Vec2& p : trace.steps.back().points.points) {
            out << "    <circle cx=\"" << format_number(p.x()) << "\" cy=\""
                << format_number(p.y()) << "\" r=\"" << format_number(pad * 0.015)
                << "\" fill=\"#d62728\"/>\n";
        }
        out << "  </g>\n";
        if (trace.terminal_obb.has_value()) {
            out << "  <g id=\"final-fit\">\n";
            append_ellipse(out, obb_to_gaussian(*trace.terminal_obb), "#2ca02c");
            out << "  </g>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path.string());
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failure: " + path.string());
}

}  // namespace gaussbox
