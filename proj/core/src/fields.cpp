#include "cipwave/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cipwave {

std::string to_string(Role role) {
  return role == Role::epsilon ? "eps" : "sigma";
}

double AdmissibleSet::lower(Role role) const {
  return role == Role::epsilon ? 1.0 : sigma_min;
}

double AdmissibleSet::upper(Role role) const {
  return role == Role::epsilon ? eps_max : sigma_max;
}

double AdmissibleSet::background(Role role) const {
  return role == Role::epsilon ? eps_background : sigma_background;
}

void AdmissibleSet::validate() const {
  if (!(eps_background >= 1.0)) {
    throw std::invalid_argument("eps_background must be >= 1");
  }
  if (!(eps_max >= eps_background)) {
    throw std::invalid_argument("eps_max must be >= eps_background");
  }
  if (!(sigma_min >= 0.0 && sigma_max >= sigma_min)) {
    throw std::invalid_argument("need sigma_max >= sigma_min >= 0");
  }
  if (sigma_background < sigma_min || sigma_background > sigma_max) {
    throw std::invalid_argument("sigma_background outside [sigma_min, sigma_max]");
  }
}

double CoefficientField::min() const {
  return *std::min_element(values.begin(), values.end());
}

double CoefficientField::max() const {
  return *std::max_element(values.begin(), values.end());
}

SpaceTimeField::SpaceTimeField(const Grid2D& grid, SpaceTimeRole role)
    : grid_(grid),
      role_(role),
      data_(grid.node_count() * static_cast<std::size_t>(grid.nt + 1), 0.0) {}

std::span<const double> SpaceTimeField::snapshot(int n) const {
  const std::size_t m = grid_.node_count();
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(n) * m, m);
}

std::span<double> SpaceTimeField::snapshot(int n) {
  const std::size_t m = grid_.node_count();
  return std::span<double>(data_).subspan(static_cast<std::size_t>(n) * m, m);
}

SideSet::SideSet(std::initializer_list<Side> sides) {
  for (Side s : sides) insert(s);
}

std::vector<Side> SideSet::list() const {
  std::vector<Side> out;
  for (Side s : kAllSides) {
    if (contains(s)) out.push_back(s);
  }
  return out;
}

int side_length(const Grid2D& grid, Side side) {
  return (side == Side::left || side == Side::right) ? grid.ny + 1 : grid.nx + 1;
}

std::size_t side_node(const Grid2D& grid, Side side, int k) {
  switch (side) {
    case Side::left:
      return grid.index(0, k);
    case Side::bottom:
      return grid.index(k, 0);
    case Side::right:
      return grid.index(grid.nx, k);
    case Side::top:
      return grid.index(k, grid.ny);
  }
  return 0;
}

BoundaryTrace::BoundaryTrace(const Grid2D& grid, SideSet sides)
    : grid_(grid), sides_(sides) {
  if (sides.empty()) throw std::invalid_argument("trace needs at least one side");
  for (Side s : sides.list()) {
    side_offset_[static_cast<std::size_t>(s) - 1] = per_level_;
    per_level_ += static_cast<std::size_t>(side_length(grid, s));
  }
  data_.assign(per_level_ * static_cast<std::size_t>(grid.nt + 1), 0.0);
}

std::size_t BoundaryTrace::boundary_node_count() const {
  std::vector<bool> seen(grid_.node_count(), false);
  std::size_t count = 0;
  for (Side s : sides_.list()) {
    for (int k = 0; k < side_length(grid_, s); ++k) {
      const std::size_t node = side_node(grid_, s, k);
      if (!seen[node]) {
        seen[node] = true;
        ++count;
      }
    }
  }
  return count;
}

std::size_t BoundaryTrace::offset(int n, Side side) const {
  if (!sides_.contains(side)) {
    throw std::out_of_range("side " + std::to_string(static_cast<int>(side)) +
                            " not present in trace");
  }
  return static_cast<std::size_t>(n) * per_level_ +
         side_offset_[static_cast<std::size_t>(side) - 1];
}

std::span<const double> BoundaryTrace::side_values(int n, Side side) const {
  return std::span<const double>(data_).subspan(
      offset(n, side), static_cast<std::size_t>(side_length(grid_, side)));
}

std::span<double> BoundaryTrace::side_values(int n, Side side) {
  return std::span<double>(data_).subspan(
      offset(n, side), static_cast<std::size_t>(side_length(grid_, side)));
}

bool BoundaryTrace::compatible_with(const BoundaryTrace& other) const {
  return grid_ == other.grid_ && sides_ == other.sides_;
}

CoefficientField gaussian_coefficient(const Grid2D& grid, Role role, double base,
                                      double amp, double cx, double cy,
                                      double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  CoefficientField f(grid, role, base);
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const double dx = grid.x(i) - cx;
      const double dy = grid.y(j) - cy;
      f.at(i, j) = base + amp * std::exp(-(dx * dx + dy * dy) / width);
    }
  }
  return f;
}

CoefficientField add_bubble(const CoefficientField& field, double scale) {
  CoefficientField out = field;
  const Grid2D& g = field.grid;
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const double X = static_cast<double>(i) / g.nx;
      const double Y = static_cast<double>(j) / g.ny;
      const double b = X * Y * (1.0 - X) * (1.0 - Y);
      out.at(i, j) += scale * b * b;
    }
  }
  return out;
}

CoefficientField project(const CoefficientField& field, const AdmissibleSet& adm,
                         const RegionMask& mask) {
  if (mask.size() != field.values.size()) {
    throw std::invalid_argument("region mask does not match coefficient grid");
  }
  CoefficientField out = field;
  const double lo = adm.lower(field.role);
  const double hi = adm.upper(field.role);
  const double bg = adm.background(field.role);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = mask.is_frame(k) ? bg : std::clamp(out.values[k], lo, hi);
  }
  return out;
}

std::string to_string(NoiseModel model) {
  return model == NoiseModel::additive_gaussian ? "additive_gaussian"
                                                : "relative_gaussian";
}

NoiseModel noise_model_from_string(const std::string& name) {
  if (name == "additive_gaussian" || name == "additive") {
    return NoiseModel::additive_gaussian;
  }
  if (name == "relative_gaussian" || name == "relative") {
    return NoiseModel::relative_gaussian;
  }
  throw std::invalid_argument("unknown noise model '" + name + "'");
}

BoundaryTrace add_noise(const BoundaryTrace& trace, NoiseModel model,
                        double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  BoundaryTrace out = trace;
  if (level == 0.0) return out;

  double scale = level;
  if (model == NoiseModel::relative_gaussian) {
    double amax = 0.0;
    for (double v : trace.data()) amax = std::max(amax, std::abs(v));
    scale = level * amax;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.data()) v += scale * normal(rng);
  return out;
}

BoundaryTrace extract_trace(const SpaceTimeField& field, SideSet sides) {
  if (field.role() != SpaceTimeRole::state) {
    throw std::invalid_argument("traces are extracted from state fields only");
  }
  if (sides.empty()) throw std::invalid_argument("empty side set");
  const Grid2D& g = field.grid();
  BoundaryTrace trace(g, sides);
  for (int n = 0; n <= g.nt; ++n) {
    const auto snap = field.snapshot(n);
    for (Side s : sides.list()) {
      auto out = trace.side_values(n, s);
      for (int k = 0; k < side_length(g, s); ++k) {
        out[static_cast<std::size_t>(k)] = snap[side_node(g, s, k)];
      }
    }
  }
  return trace;
}

BoundaryTrace trace_difference(const BoundaryTrace& sim, const BoundaryTrace& obs) {
  if (!sim.compatible_with(obs)) {
    throw std::invalid_argument("traces differ in grid, sides or time levels");
  }
  BoundaryTrace out = sim;
  auto d = out.data();
  const auto o = obs.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] -= o[k];
  return out;
}

namespace {

void require_nested(const Grid2D& coarse, const Grid2D& fine) {
  if (!is_nested_refinement(coarse, fine)) {
    throw std::invalid_argument("target grid is not the factor-2 refinement");
  }
}

}  // namespace

CoefficientField transfer_to_refined(const CoefficientField& field,
                                     const Grid2D& fine_grid) {
  const Grid2D& c = field.grid;
  require_nested(c, fine_grid);
  CoefficientField out(fine_grid, field.role);
  for (int j = 0; j <= fine_grid.ny; ++j) {
    const int cj = j / 2;
    const bool jodd = (j % 2) != 0;
    for (int i = 0; i <= fine_grid.nx; ++i) {
      const int ci = i / 2;
      const bool iodd = (i % 2) != 0;
      double v = 0.0;
      if (!iodd && !jodd) {
        v = field.at(ci, cj);
      } else if (iodd && !jodd) {
        v = 0.5 * (field.at(ci, cj) + field.at(ci + 1, cj));
      } else if (!iodd && jodd) {
        v = 0.5 * (field.at(ci, cj) + field.at(ci, cj + 1));
      } else {
        v = 0.25 * (field.at(ci, cj) + field.at(ci + 1, cj) +
                    field.at(ci, cj + 1) + field.at(ci + 1, cj + 1));
      }
      out.at(i, j) = v;
    }
  }
  return out;
}

BoundaryTrace transfer_to_refined(const BoundaryTrace& trace,
                                  const Grid2D& fine_grid) {
  const Grid2D& c = trace.grid();
  require_nested(c, fine_grid);
  BoundaryTrace out(fine_grid, trace.sides());
  for (int n = 0; n <= fine_grid.nt; ++n) {
    const double tc = fine_grid.t(n) / c.dt;
    int lo = std::clamp(static_cast<int>(std::floor(tc)), 0, c.nt);
    double frac = tc - lo;
    if (lo == c.nt) {
      frac = 0.0;
    } else if (frac < 1e-12) {
      frac = 0.0;
    } else if (frac > 1.0 - 1e-12) {
      lo += 1;
      frac = 0.0;
    }
    for (Side s : trace.sides().list()) {
      const auto a = trace.side_values(lo, s);
      const auto b = trace.side_values(std::min(lo + 1, c.nt), s);
      auto dst = out.side_values(n, s);
      const int len = side_length(fine_grid, s);
      for (int k = 0; k < len; ++k) {
        const int ck = k / 2;
        auto at = [&](std::span<const double> level) {
          const auto uk = static_cast<std::size_t>(ck);
          return (k % 2 == 0) ? level[uk] : 0.5 * (level[uk] + level[uk + 1]);
        };
        dst[static_cast<std::size_t>(k)] = (1.0 - frac) * at(a) + frac * at(b);
      }
    }
  }
  return out;
}

CoefficientField restrict_to_coarse(const CoefficientField& fine,
                                    const Grid2D& coarse_grid) {
  require_nested(coarse_grid, fine.grid);
  CoefficientField out(coarse_grid, fine.role);
  for (int j = 0; j <= coarse_grid.ny; ++j) {
    for (int i = 0; i <= coarse_grid.nx; ++i) out.at(i, j) = fine.at(2 * i, 2 * j);
  }
  return out;
}

}  // namespace cipwave
