#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wdmix/assignment.hpp"
#include "wdmix/core.hpp"

namespace wdmix {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Shortest text that round-trips a double ("%.17g").
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for batch use: truncates and replaces the file.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Dataset CSV: header row required. Columns named "label" and "outlier"
/// are annotations (outlier accepts 0/1/true/false); every other column is a
/// coordinate. Throws Io, Parse, NonRectangular or NaNInput.
Dataset parse_dataset_csv(const std::string& text);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Header x1..xd, then label and outlier when present.
std::string dataset_to_csv(const Dataset& data);

/// Segment CSV with columns x, y, modality (a or v).
Dataset parse_segment_csv(const std::string& text);

struct GroundTruth {
  std::string segment_id;
  double x = 0.0;
  double y = 0.0;
};

/// CSV with columns segment_id, x_g, y_g.
std::vector<GroundTruth> parse_ground_truth_csv(const std::string& text);

/// How stored models turn data into weights and assignments.
struct AssignmentRule {
  std::string algorithm = "wd";  ///< fwd, wd, gmm or select
  int q = 20;
  double sigma = 100.0;
  EzVariant ez_variant = EzVariant::Prior;
};

struct StoredModel {
  MixtureModel model;
  AssignmentRule rule;
};

/// {schema_version, covariance_shape, dimension, assignment_rule,
///  components: [{weight, mean, covariance (full, row-major)}]}.
nlohmann::ordered_json model_to_json(const MixtureModel& model, const AssignmentRule& rule);
StoredModel model_from_json(const nlohmann::json& doc);

/// Objective trace, iterations, convergence, annihilation log and K+ history.
nlohmann::ordered_json report_to_json(const FitReport& report);

/// Per-point CSV "index,cluster" plus "weight" when weights are given.
std::string assignments_to_csv(const std::vector<int>& clusters, const Vector* weights = nullptr);
/// Reads the cluster column of an assignments CSV.
std::vector<int> parse_assignments_csv(const std::string& text);

/// Serialises JSON with two-space indentation and a trailing newline.
std::string dump_json(const nlohmann::ordered_json& doc);

}  // namespace wdmix
