#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cournot/congestion.hpp"
#include "cournot/measures.hpp"
#include "cournot/monge_ampere.hpp"
#include "cournot/transport.hpp"

namespace cournot::io {

/// Malformed or unreadable input file; the message names file and line.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LevelCurveRecord {
  double y = 0.0;
  double k = 0.0;
  LevelCurve curve;
};

void write_density_csv(const std::filesystem::path& path, const GridMeasure1D& nu);
/// Rebuilds the grid from equally spaced midpoints.
GridMeasure1D read_density_csv(const std::filesystem::path& path);

void write_profile_csv(const std::filesystem::path& path, const LevelProfile& profile);
/// One row per polyline vertex; pieces of one level follow each other.
void write_level_curves_csv(const std::filesystem::path& path, const std::vector<LevelCurveRecord>& curves);
void write_assignment_csv(const std::filesystem::path& path, const PointCloudMeasure& mu, const AssignmentMap& map);
/// Best-reply map: x1, x2, weight, reply, clamped.
void write_replies_csv(const std::filesystem::path& path, const PointCloudMeasure& mu, const AssignmentMap& map,
                       const Grid1D& grid);
void write_convergence_csv(const std::filesystem::path& path, const EquilibriumResult& result);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& rows);
/// i, j, gamma for every entry; refuses M * N > 10^6.
void write_coupling_csv(const std::filesystem::path& path, const Matrix& gamma);
void write_points_csv(const std::filesystem::path& path, const PointCloudMeasure& mu);

/// Numeric matrix, one row per line. A first line that does not parse as
/// numbers is treated as a header and skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
/// The last column of read_matrix_csv.
Vector read_vector_csv(const std::filesystem::path& path);

}  // namespace cournot::io
