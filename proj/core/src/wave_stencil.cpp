#include "cipwave/wave_stencil.hpp"

#include <stdexcept>

namespace cipwave {

namespace {

const SideCondition& cond(const SideConditions& sides, Side s) {
  return sides[static_cast<std::size_t>(s) - 1];
}

}  // namespace

WaveStencil::WaveStencil(const Grid2D& grid, std::span<const double> eps,
                         std::span<const double> sigma)
    : grid_(grid), eps_(eps), sigma_(sigma) {
  const std::size_t m = grid.node_count();
  if (eps.size() != m || sigma.size() != m) {
    throw std::invalid_argument("coefficient size does not match grid");
  }
  const double idt2 = 1.0 / (grid.dt * grid.dt);
  const double i2dt = 0.5 / grid.dt;
  a_.resize(m);
  b_.resize(m);
  c_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    a_[k] = eps[k] * idt2 + sigma[k] * i2dt;
    b_[k] = eps[k] * idt2 - sigma[k] * i2dt;
    c_[k] = 2.0 * eps[k] * idt2;
  }
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      if (i == 0 || j == 0 || i == grid.nx || j == grid.ny) {
        boundary_nodes_.push_back(grid.index(i, j));
      }
    }
  }
}

int WaveStencil::absorbing_count(int i, int j, const SideConditions& sides) const {
  int count = 0;
  if (i == 0 && cond(sides, Side::left).absorbing) ++count;
  if (i == grid_.nx && cond(sides, Side::right).absorbing) ++count;
  if (j == 0 && cond(sides, Side::bottom).absorbing) ++count;
  if (j == grid_.ny && cond(sides, Side::top).absorbing) ++count;
  return count;
}

double WaveStencil::extra_damping(std::size_t node, const SideConditions& sides,
                                  bool old_level) const {
  const int nx1 = grid_.nx + 1;
  const int i = static_cast<int>(node % static_cast<std::size_t>(nx1));
  const int j = static_cast<int>(node / static_cast<std::size_t>(nx1));
  if (!old_level) return absorbing_count(i, j, sides) / (grid_.h * grid_.dt);
  SideConditions old = sides;
  for (SideCondition& c : old) c.absorbing = c.absorbing_prev.value_or(c.absorbing);
  return absorbing_count(i, j, old) / (grid_.h * grid_.dt);
}

void WaveStencil::add_flux(const SideConditions& sides, std::span<const double> f1,
                           std::span<double> out) const {
  const double scale = 2.0 / grid_.h;
  for (Side s : kAllSides) {
    const SideCondition& c = cond(sides, s);
    const bool use_f1 = c.absorbing && !f1.empty();
    if (c.flux == 0.0 && c.nodal_flux.empty() && !use_f1) continue;
    const int len = side_length(grid_, s);
    if (!c.nodal_flux.empty() && c.nodal_flux.size() != static_cast<std::size_t>(len)) {
      throw std::invalid_argument("nodal flux length does not match side");
    }
    for (int k = 0; k < len; ++k) {
      const std::size_t node = side_node(grid_, s, k);
      double g = c.flux;
      if (!c.nodal_flux.empty()) g += c.nodal_flux[static_cast<std::size_t>(k)];
      if (use_f1) g -= f1[node];
      out[node] += scale * g;
    }
  }
}

void WaveStencil::laplacian(std::span<const double> u, const SideConditions& sides,
                            std::span<double> out) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const int stride = nx + 1;
  const double ih2 = 1.0 / (grid_.h * grid_.h);
  for (int j = 0; j <= ny; ++j) {
    const std::size_t row = grid_.index(0, j);
    const bool jlo = j == 0;
    const bool jhi = j == ny;
    for (int i = 0; i <= nx; ++i) {
      const std::size_t k = row + static_cast<std::size_t>(i);
      const double xm = i > 0 ? u[k - 1] : u[k + 1];
      const double xp = i < nx ? u[k + 1] : u[k - 1];
      const double ym = jlo ? u[k + stride] : u[k - stride];
      const double yp = jhi ? u[k - stride] : u[k + stride];
      out[k] = (xm + xp + ym + yp - 4.0 * u[k]) * ih2;
    }
  }
  add_flux(sides, {}, out);
}

void WaveStencil::start(std::span<const double> f0, std::span<const double> f1,
                        const SideConditions& sides, std::span<const double> forcing,
                        std::span<double> next) const {
  const std::size_t m = grid_.node_count();
  std::vector<double> lap(m, 0.0);
  if (!f0.empty()) {
    laplacian(f0, {}, lap);
  }
  add_flux(sides, f1, lap);
  const double dt = grid_.dt;
  for (std::size_t k = 0; k < m; ++k) {
    double acc = lap[k];
    if (!f1.empty()) acc -= sigma_[k] * f1[k];
    if (!forcing.empty()) acc += forcing[k];
    double v = dt * dt / (2.0 * eps_[k]) * acc;
    if (!f0.empty()) v += f0[k];
    if (!f1.empty()) v += dt * f1[k];
    next[k] = v;
  }
}

void WaveStencil::start_defect(std::span<const double> f0, std::span<const double> f1,
                               std::span<const double> next,
                               const SideConditions& sides,
                               std::span<const double> forcing,
                               std::span<double> out) const {
  const std::size_t m = grid_.node_count();
  std::vector<double> lap(m, 0.0);
  if (!f0.empty()) laplacian(f0, {}, lap);
  add_flux(sides, f1, lap);
  const double dt = grid_.dt;
  for (std::size_t k = 0; k < m; ++k) {
    double base = next[k];
    if (!f0.empty()) base -= f0[k];
    if (!f1.empty()) base -= dt * f1[k];
    double rhs = lap[k];
    if (!f1.empty()) rhs -= sigma_[k] * f1[k];
    if (!forcing.empty()) rhs += forcing[k];
    out[k] = c_[k] * base - rhs;
  }
}

void WaveStencil::step(std::span<const double> prev, std::span<const double> curr,
                       const SideConditions& sides, std::span<const double> forcing,
                       std::span<double> next) const {
  laplacian(curr, sides, next);
  const std::size_t m = grid_.node_count();
  if (forcing.empty()) {
    for (std::size_t k = 0; k < m; ++k) {
      next[k] = (next[k] + c_[k] * curr[k] - b_[k] * prev[k]) / a_[k];
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      next[k] = (next[k] + forcing[k] + c_[k] * curr[k] - b_[k] * prev[k]) / a_[k];
    }
  }
  // Absorbing sides add damping on their nodes: undo the division by a and
  // redo it with a + d on the new level and b - d_old on the old one.
  for (std::size_t k : boundary_nodes_) {
    const double d = extra_damping(k, sides, false);
    const double d_old = extra_damping(k, sides, true);
    if (d == 0.0 && d_old == 0.0) continue;
    const double rhs = next[k] * a_[k] + d_old * prev[k];
    next[k] = rhs / (a_[k] + d);
  }
}

void WaveStencil::step_defect(std::span<const double> prev,
                              std::span<const double> curr,
                              std::span<const double> next,
                              const SideConditions& sides,
                              std::span<const double> forcing,
                              std::span<double> out) const {
  laplacian(curr, sides, out);
  const std::size_t m = grid_.node_count();
  for (std::size_t k = 0; k < m; ++k) {
    double r = a_[k] * next[k] - c_[k] * curr[k] + b_[k] * prev[k] - out[k];
    if (!forcing.empty()) r -= forcing[k];
    out[k] = r;
  }
  for (std::size_t k : boundary_nodes_) {
    out[k] += extra_damping(k, sides, false) * next[k] -
              extra_damping(k, sides, true) * prev[k];
  }
}

double gradient_form(const Grid2D& grid, std::span<const double> u,
                     std::span<const double> v) {
  double sum = 0.0;
  for (int j = 0; j <= grid.ny; ++j) {
    const double wy = (j == 0 || j == grid.ny) ? 0.5 : 1.0;
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      sum += wy * (u[k + 1] - u[k]) * (v[k + 1] - v[k]);
    }
  }
  const std::size_t stride = static_cast<std::size_t>(grid.nx + 1);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const double wx = (i == 0 || i == grid.nx) ? 0.5 : 1.0;
      const std::size_t k = grid.index(i, j);
      sum += wx * (u[k + stride] - u[k]) * (v[k + stride] - v[k]);
    }
  }
  return sum;
}

double area_dot(const Grid2D& grid, std::span<const double> u,
                std::span<const double> v) {
  double sum = 0.0;
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      sum += grid.area_weight(i, j) * u[k] * v[k];
    }
  }
  return sum;
}

}  // namespace cipwave
