#include "specont/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace specont {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.141592653589793238462643;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev estimate
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

void RealMesh::append(const RealMesh& other) {
  nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

// Composite GL over sigma-cells of the map mu = a + (b-a) sigma^power.  The
// offset is floored so no node collapses onto the endpoint in floating point.
RealMesh mesh_from_sigma_cells(double a, double b, int points, double power,
                               const std::vector<std::pair<double, double>>& cells) {
  const GaussRule& gl = gauss_legendre(points);
  RealMesh mesh;
  mesh.nodes.reserve(cells.size() * points);
  mesh.weights.reserve(cells.size() * points);
  const double len = b - a;
  const double floor_frac = 1e-13;
  for (const auto& [s0, s1] : cells) {
    const double half = 0.5 * (s1 - s0);
    const double mid = 0.5 * (s1 + s0);
    for (int i = 0; i < points; ++i) {
      const double sigma = mid + half * gl.nodes[i];
      const double jac = len * power * std::pow(sigma, power - 1.0);
      const double frac = std::max(std::pow(sigma, power), floor_frac);
      mesh.nodes.push_back(a + len * frac);
      mesh.weights.push_back(gl.weights[i] * half * jac);
    }
  }
  return mesh;
}

std::vector<std::pair<double, double>> sigma_cells(int cells, int graded_levels) {
  std::vector<std::pair<double, double>> out;
  const double w = 1.0 / cells;
  // split the first cell geometrically toward sigma = 0
  double lo = 0.0;
  std::vector<double> edges;
  for (int l = graded_levels; l >= 1; --l) edges.push_back(w * std::pow(0.5, l));
  edges.push_back(w);
  for (double e : edges) {
    out.emplace_back(lo, e);
    lo = e;
  }
  for (int c = 1; c < cells; ++c) out.emplace_back(c * w, (c + 1) * w);
  return out;
}

}  // namespace

RealMesh graded_segment_mesh(double a, double b, int cells, int points,
                             double power, int graded_levels) {
  if (!(b > a)) raise(errc::invalid_operand, "empty quadrature interval");
  return mesh_from_sigma_cells(a, b, points, power, sigma_cells(cells, graded_levels));
}

RealMesh graded_segment_mesh_refined(double a, double b, int cells, int points,
                                     double power, int graded_levels,
                                     double pole_re, double pole_dist) {
  auto base = sigma_cells(cells, graded_levels);
  const double len = b - a;
  auto mu_of = [&](double s) { return a + len * std::pow(s, power); };

  std::vector<std::pair<double, double>> out;
  std::vector<std::pair<double, double>> work(base.begin(), base.end());
  while (!work.empty()) {
    auto [s0, s1] = work.back();
    work.pop_back();
    const double m0 = mu_of(s0), m1 = mu_of(s1);
    const double width = m1 - m0;
    double dist = pole_dist;
    if (pole_re > m1)
      dist = std::hypot(pole_re - m1, pole_dist);
    else if (pole_re < m0)
      dist = std::hypot(m0 - pole_re, pole_dist);
    if (width > 0.5 * dist && width > 1e-13 * (1.0 + std::abs(m0))) {
      const double sm = 0.5 * (s0 + s1);
      work.emplace_back(s0, sm);
      work.emplace_back(sm, s1);
    } else {
      out.emplace_back(s0, s1);
    }
  }
  std::sort(out.begin(), out.end());
  return mesh_from_sigma_cells(a, b, points, power, out);
}

RealMesh tail_mesh_sqrt(double alpha0, double M, double Lambda, double s_cell,
                        int points) {
  if (!(Lambda > M) || !(M > alpha0))
    raise(errc::invalid_operand, "tail interval empty");
  const double s0 = std::sqrt(M - alpha0);
  const double s1 = std::sqrt(Lambda - alpha0);
  const int cells = std::max(1, static_cast<int>(std::ceil((s1 - s0) / s_cell)));
  const GaussRule& gl = gauss_legendre(points);
  RealMesh mesh;
  mesh.nodes.reserve(cells * points);
  mesh.weights.reserve(cells * points);
  const double w = (s1 - s0) / cells;
  for (int c = 0; c < cells; ++c) {
    const double half = 0.5 * w;
    const double mid = s0 + (c + 0.5) * w;
    for (int i = 0; i < points; ++i) {
      const double s = mid + half * gl.nodes[i];
      mesh.nodes.push_back(alpha0 + s * s);
      mesh.weights.push_back(gl.weights[i] * half * 2.0 * s);
    }
  }
  return mesh;
}

RealMesh sqrt_segment_mesh(double alpha0, double to, double s_cell, int points,
                           double pole_re, double pole_dist) {
  if (!(to > alpha0)) raise(errc::invalid_operand, "empty quadrature interval");
  const double s_floor = 1e-7;  // keeps mu - alpha0 representable
  const double s_hi = std::sqrt(to - alpha0);
  const int base_cells =
      std::max(2, static_cast<int>(std::ceil((s_hi - s_floor) / s_cell)));

  std::vector<std::pair<double, double>> cells;
  std::vector<std::pair<double, double>> work;
  const double w = (s_hi - s_floor) / base_cells;
  for (int c = 0; c < base_cells; ++c)
    work.emplace_back(s_floor + c * w, s_floor + (c + 1) * w);
  while (!work.empty()) {
    auto [s0, s1] = work.back();
    work.pop_back();
    const double m0 = alpha0 + s0 * s0;
    const double m1 = alpha0 + s1 * s1;
    double dist = pole_dist;
    if (pole_re > m1)
      dist = std::hypot(pole_re - m1, pole_dist);
    else if (pole_re < m0)
      dist = std::hypot(m0 - pole_re, pole_dist);
    if (m1 - m0 > 0.5 * dist && s1 - s0 > 1e-9) {
      const double sm = 0.5 * (s0 + s1);
      work.emplace_back(s0, sm);
      work.emplace_back(sm, s1);
    } else {
      cells.emplace_back(s0, s1);
    }
  }
  std::sort(cells.begin(), cells.end());

  const GaussRule& gl = gauss_legendre(points);
  RealMesh mesh;
  for (const auto& [s0, s1] : cells) {
    const double half = 0.5 * (s1 - s0);
    const double mid = 0.5 * (s1 + s0);
    for (int i = 0; i < points; ++i) {
      const double s = mid + half * gl.nodes[i];
      mesh.nodes.push_back(alpha0 + s * s);
      mesh.weights.push_back(gl.weights[i] * half * 2.0 * s);
    }
  }
  return mesh;
}

RealMesh tail_mesh(double M, double Lambda, int cells, int points) {
  if (!(Lambda > M)) raise(errc::invalid_operand, "tail interval empty");
  // mu(u) = M - 1 + (1-u)^{-4}, u in [0, u_max]
  const double u_max = 1.0 - std::pow(1.0 + Lambda - M, -0.25);
  const GaussRule& gl = gauss_legendre(points);
  RealMesh mesh;
  mesh.nodes.reserve(cells * points);
  mesh.weights.reserve(cells * points);
  const double w = u_max / cells;
  for (int c = 0; c < cells; ++c) {
    const double half = 0.5 * w;
    const double mid = (c + 0.5) * w;
    for (int i = 0; i < points; ++i) {
      const double u = mid + half * gl.nodes[i];
      const double omu = 1.0 - u;
      mesh.nodes.push_back(M - 1.0 + std::pow(omu, -4.0));
      mesh.weights.push_back(gl.weights[i] * half * 4.0 * std::pow(omu, -5.0));
    }
  }
  return mesh;
}

}  // namespace specont
