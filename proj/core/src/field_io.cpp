#include "cipwave/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "cipwave/errors.hpp"

namespace cipwave {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw InputError(where + ": not a number: '" + s + "'");
  while (*end == ' ' || *end == '\r' || *end == '\t') ++end;
  if (*end != '\0') throw InputError(where + ": trailing characters in '" + s + "'");
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const BoundaryTrace& trace) {
  auto out = open_out(path);
  out << "t,side,index,value\n";
  const Grid2D& g = trace.grid();
  for (int n = 0; n <= g.nt; ++n) {
    const std::string t = fmt17(g.t(n));
    for (Side s : trace.sides().list()) {
      const auto vals = trace.side_values(n, s);
      for (std::size_t k = 0; k < vals.size(); ++k) {
        out << t << ',' << static_cast<int>(s) << ',' << k << ',' << fmt17(vals[k])
            << '\n';
      }
    }
  }
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

BoundaryTrace read_trace_csv(const std::filesystem::path& path, const Grid2D& grid) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "t,side,index,value") {
    throw InputError(path.string() + ": expected header 't,side,index,value'");
  }

  struct Row {
    int level;
    Side side;
    int index;
    double value;
  };
  std::vector<Row> rows;
  SideSet sides;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw InputError(where + ": expected 4 columns");
    const double t = parse_double(cells[0], where);
    const double sv = parse_double(cells[1], where);
    const double iv = parse_double(cells[2], where);
    const double value = parse_double(cells[3], where);
    const int side = static_cast<int>(sv);
    if (side < 1 || side > 4 || side != sv) throw InputError(where + ": side must be 1..4");
    const long level = std::lround(t / grid.dt);
    if (level < 0 || level > grid.nt ||
        std::abs(t - level * grid.dt) > 1e-9 * std::max(1.0, grid.T)) {
      throw InputError(where + ": time " + cells[0] + " is not a level of the grid");
    }
    const auto s = static_cast<Side>(side);
    const int k = static_cast<int>(iv);
    if (k != iv || k < 0 || k >= side_length(grid, s)) {
      throw InputError(where + ": node index out of range for side " + cells[1]);
    }
    sides.insert(s);
    rows.push_back({static_cast<int>(level), s, k, value});
  }
  if (sides.empty()) throw InputError(path.string() + ": no data rows");

  BoundaryTrace trace(grid, sides);
  std::vector<char> filled(trace.data().size(), 0);
  for (const Row& r : rows) {
    auto vals = trace.side_values(r.level, r.side);
    const auto pos = static_cast<std::size_t>(
        &vals[static_cast<std::size_t>(r.index)] - trace.data().data());
    if (filled[pos]) {
      throw InputError(path.string() + ": duplicate entry at level " +
                       std::to_string(r.level));
    }
    filled[pos] = 1;
    vals[static_cast<std::size_t>(r.index)] = r.value;
  }
  for (char f : filled) {
    if (!f) {
      throw InputError(path.string() +
                       ": trace does not cover every time level and side node of "
                       "the configured grid");
    }
  }
  return trace;
}

void write_vtk(const std::filesystem::path& path, const Grid2D& grid,
               std::span<const double> values, const std::string& name) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << name << "\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << grid.nodes_x() << ' ' << grid.nodes_y() << " 1\n"
      << "ORIGIN " << fmt17(grid.x0) << ' ' << fmt17(grid.y0) << " 0\n"
      << "SPACING " << fmt17(grid.h) << ' ' << fmt17(grid.h) << " 1\n"
      << "POINT_DATA " << grid.node_count() << '\n'
      << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << fmt17(v) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const Grid2D& grid,
                     std::span<const double> values) {
  auto out = open_out(path);
  out << "x,y,value\n";
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      out << fmt17(grid.x(i)) << ',' << fmt17(grid.y(j)) << ','
          << fmt17(values[grid.index(i, j)]) << '\n';
    }
  }
}

CoefficientField read_field_csv(const std::filesystem::path& path,
                                const Grid2D& grid, Role role) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "x,y,value") {
    throw InputError(path.string() + ": expected header 'x,y,value'");
  }
  CoefficientField field(grid, role);
  std::vector<char> filled(grid.node_count(), 0);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw InputError(where + ": expected 3 columns");
    const double x = parse_double(cells[0], where);
    const double y = parse_double(cells[1], where);
    const long i = std::lround((x - grid.x0) / grid.h);
    const long j = std::lround((y - grid.y0) / grid.h);
    if (i < 0 || i > grid.nx || j < 0 || j > grid.ny ||
        std::abs(grid.x(static_cast<int>(i)) - x) > 1e-9 * grid.h ||
        std::abs(grid.y(static_cast<int>(j)) - y) > 1e-9 * grid.h) {
      throw InputError(where + ": point is not a node of the configured grid");
    }
    const std::size_t node = grid.index(static_cast<int>(i), static_cast<int>(j));
    field.values[node] = parse_double(cells[2], where);
    filled[node] = 1;
  }
  for (char f : filled) {
    if (!f) throw InputError(path.string() + ": field does not cover every grid node");
  }
  return field;
}

}  // namespace cipwave
