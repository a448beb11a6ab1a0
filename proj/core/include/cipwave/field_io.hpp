#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "cipwave/fields.hpp"

namespace cipwave {

/// CSV with header `t,side,index,value`, time-major, 17 significant digits.
void write_trace_csv(const std::filesystem::path& path, const BoundaryTrace& trace);

/// Reads a trace written by write_trace_csv and checks it against `grid`:
/// every time level, every node of each listed side, matching times.
/// Throws InputError on any mismatch.
BoundaryTrace read_trace_csv(const std::filesystem::path& path, const Grid2D& grid);

/// Legacy ASCII VTK, STRUCTURED_POINTS with one scalar point field.
void write_vtk(const std::filesystem::path& path, const Grid2D& grid,
               std::span<const double> values, const std::string& name);

/// Plain `x,y,value` CSV.
void write_field_csv(const std::filesystem::path& path, const Grid2D& grid,
                     std::span<const double> values);

/// Reads an `x,y,value` CSV onto `grid`; every node must be present.
CoefficientField read_field_csv(const std::filesystem::path& path,
                                const Grid2D& grid, Role role);

}  // namespace cipwave
