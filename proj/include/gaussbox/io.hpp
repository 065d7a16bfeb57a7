#pragma once
/**
 * @file io.hpp
 * @brief JSON payload encoding, CSV writers, and SVG emission.
 *
 * Payload schemas:
 *   Obb      {"cx":..,"cy":..,"w":..,"h":..,"theta":..}   (theta in radians)
 *   Gaussian {"mu":[x,y],"sigma":[[a,b],[b,c]]}
 *   Points   {"points":[[x,y],...]}                        (a Qbb has exactly 4)
 */

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gaussbox/ingest.hpp"
#include "gaussbox/simulator.hpp"

namespace gaussbox {

using Json = nlohmann::json;

/// Shortest round-trip decimal form of a double; shared by the CSV writers so
/// outputs are byte-stable.
std::string format_number(double value);

Json to_json(const Obb& box);
Json to_json(const Gaussian2& g);
Json to_json(const PointSetRep& pts);
Obb obb_from_json(const Json& j);
Gaussian2 gaussian_from_json(const Json& j);
PointSetRep points_from_json(const Json& j);

enum class PayloadKind { Obb, Gaussian, Points };

/// A parsed input payload in any of the three schemas.
struct Payload {
    PayloadKind kind = PayloadKind::Obb;
    Obb obb;
    Gaussian2 gaussian;
    PointSetRep points;

    /// Unified view: boxes via the matrix transform, point sets via the
    /// Gaussian fit.
    Gaussian2 as_gaussian() const;
};

/// Detect the payload kind from its keys and validate the fields. Throws
/// InvalidInputError naming the offending field.
Payload payload_from_json(const Json& j);

Json to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

Json to_json(const ExperimentReport& report);
Json to_json(const DatasetSummary& summary);

/// Columns: proposal_id,label,matched_gt,score,raw_distance.
std::string assignment_csv(const AssignmentResult& result);

/// Columns: step,loss,distance,x0,y0,...,x{K-1},y{K-1}.
std::string trace_csv(const OptimizationTrace& trace);

/// Columns: theta,gaussian_loss,param_loss.
std::string sweep_csv(const SweepResult& sweep);

/// Columns: category,count,mean_aspect_ratio.
std::string summary_csv(const DatasetSummary& summary);

/// Scene overlay: one group per layer (ground-truth boxes, proposal ellipses
/// at two standard deviations, jittered-copy ellipses).
std::string scene_svg(const Scene& scene);

/// Optimization overlay: ground-truth box, initial and final points, final
/// fitted ellipse.
std::string optimize_svg(const Obb& gt, const OptimizationTrace& trace);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gaussbox
