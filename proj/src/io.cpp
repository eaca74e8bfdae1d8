#include "cournot/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cournot/errors.hpp"

namespace cournot::io {

namespace {

constexpr Index kMaxCouplingEntries = 1000000;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

bool parse_row(const std::string& line, std::vector<double>& values) {
  values.clear();
  std::stringstream fields(line);
  std::string field;
  while (std::getline(fields, field, ',')) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(begin, &end);
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    if (end == begin || *end != '\0' || errno == ERANGE) return false;
    values.push_back(value);
  }
  return !values.empty();
}

}  // namespace

void write_density_csv(const std::filesystem::path& path, const GridMeasure1D& nu) {
  auto out = open_out(path);
  out << "y,density\n";
  for (Index j = 0; j < nu.size(); ++j) out << nu.grid().midpoint(j) << ',' << nu.density(j) << '\n';
}

GridMeasure1D read_density_csv(const std::filesystem::path& path) {
  const Matrix table = read_matrix_csv(path);
  if (table.cols() != 2) throw InputError(path.string() + ": expected columns y,density");
  const Index n = table.rows();
  if (n < 1) throw InputError(path.string() + ": no rows");
  const double dy = n > 1 ? (table(n - 1, 0) - table(0, 0)) / static_cast<double>(n - 1) : 1.0;
  if (!(dy > 0.0)) throw InputError(path.string() + ": midpoints must increase");
  for (Index j = 1; j < n; ++j) {
    if (std::abs(table(j, 0) - table(j - 1, 0) - dy) > 1e-9 * (1.0 + std::abs(dy)))
      throw InputError(path.string() + ": midpoints are not equally spaced (line " + std::to_string(j + 2) + ")");
  }
  const Grid1D grid(table(0, 0) - 0.5 * dy, table(n - 1, 0) + 0.5 * dy, n);
  try {
    return GridMeasure1D(grid, table.col(1));
  } catch (const std::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_profile_csv(const std::filesystem::path& path, const LevelProfile& profile) {
  auto out = open_out(path);
  out << "y,k,v\n";
  for (Index j = 0; j < profile.grid.n_cells; ++j)
    out << profile.grid.midpoint(j) << ',' << profile.k(j) << ',' << profile.v(j) << '\n';
}

void write_level_curves_csv(const std::filesystem::path& path, const std::vector<LevelCurveRecord>& curves) {
  auto out = open_out(path);
  out << "y_level,k,x1,x2\n";
  for (const auto& record : curves)
    for (const auto& piece : record.curve.pieces)
      for (const auto& p : piece) out << record.y << ',' << record.k << ',' << p.x() << ',' << p.y() << '\n';
}

void write_assignment_csv(const std::filesystem::path& path, const PointCloudMeasure& mu, const AssignmentMap& map) {
  if (map.assigned_y.size() != mu.size()) throw ShapeError("write_assignment_csv: map does not match mu");
  auto out = open_out(path);
  out << "x1,x2,weight,assigned_y\n";
  for (Index i = 0; i < mu.size(); ++i)
    out << mu.point(i)(0) << ',' << mu.point(i)(1) << ',' << mu.weight(i) << ',' << map.assigned_y(i) << '\n';
}

void write_replies_csv(const std::filesystem::path& path, const PointCloudMeasure& mu, const AssignmentMap& map,
                       const Grid1D& grid) {
  if (map.assigned_y.size() != mu.size()) throw ShapeError("write_replies_csv: map does not match mu");
  auto out = open_out(path);
  out << "x1,x2,weight,reply,clamped\n";
  for (Index i = 0; i < mu.size(); ++i) {
    const double y = map.assigned_y(i);
    const bool clamped = y == grid.y_min || y == grid.y_max;
    out << mu.point(i)(0) << ',' << mu.point(i)(1) << ',' << mu.weight(i) << ',' << y << ',' << (clamped ? 1 : 0)
        << '\n';
  }
}

void write_convergence_csv(const std::filesystem::path& path, const EquilibriumResult& result) {
  auto out = open_out(path);
  out << "iter,l1_delta,residual\n";
  for (std::size_t k = 0; k < result.history.size(); ++k) {
    const double residual = k < result.residual_history.size() ? result.residual_history[k] : std::nan("");
    out << k + 1 << ',' << result.history[k] << ',' << residual << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& rows) {
  auto out = open_out(path);
  out << "metric,value\n";
  for (const auto& [name, value] : rows) out << name << ',' << value << '\n';
}

void write_coupling_csv(const std::filesystem::path& path, const Matrix& gamma) {
  if (gamma.size() > kMaxCouplingEntries) throw DomainError("write_coupling_csv: M * N exceeds 10^6");
  auto out = open_out(path);
  out << "i,j,gamma\n";
  for (Index i = 0; i < gamma.rows(); ++i)
    for (Index j = 0; j < gamma.cols(); ++j) out << i << ',' << j << ',' << gamma(i, j) << '\n';
}

void write_points_csv(const std::filesystem::path& path, const PointCloudMeasure& mu) {
  auto out = open_out(path);
  for (Index d = 0; d < mu.dim(); ++d) out << 'x' << d + 1 << ',';
  out << "weight\n";
  for (Index i = 0; i < mu.size(); ++i) {
    for (Index d = 0; d < mu.dim(); ++d) out << mu.point(i)(d) << ',';
    out << mu.weight(i) << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!parse_row(line, values)) {
      if (line_no == 1) continue;
      throw InputError(path.string() + ": line " + std::to_string(line_no) + " is not numeric");
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw InputError(path.string() + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(values.size()) + " fields, expected " + std::to_string(rows.front().size()));
    rows.push_back(values);
  }
  if (rows.empty()) throw InputError(path.string() + ": no numeric rows");
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix table = read_matrix_csv(path);
  return table.col(table.cols() - 1);
}

}  // namespace cournot::io
