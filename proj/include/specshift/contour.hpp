#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "specshift/core.hpp"

namespace specshift {

// Clockwise rectangle [a - margin, b + margin] x [-half_height, half_height]
// around the real segment [a, b].
struct Contour {
  double a;
  double b;
  double half_height;
  double margin;

  Contour(double a_, double b_, double half_height_, double margin_)
      : a(a_), b(b_), half_height(half_height_), margin(margin_) {
    if (!(a < b)) throw DomainError("Contour: need a < b");
    if (!(half_height > 0.0))
      throw DomainError("Contour: half_height must be positive");
    if (!(margin > 0.0)) throw DomainError("Contour: margin must be positive");
  }

  double x_lo() const { return a - margin; }
  double x_hi() const { return b + margin; }
  double perimeter() const {
    return 2.0 * ((x_hi() - x_lo()) + 2.0 * half_height);
  }

  bool strictly_inside(Complex z) const {
    return z.real() > x_lo() && z.real() < x_hi() &&
           std::abs(z.imag()) < half_height;
  }

  // Distance to the rectangle boundary (finite for interior points too).
  double distance(Complex z) const {
    const double dx = std::max({x_lo() - z.real(), z.real() - x_hi(), 0.0});
    const double dy = std::max(std::abs(z.imag()) - half_height, 0.0);
    if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
    const double inner_x = std::min(z.real() - x_lo(), x_hi() - z.real());
    const double inner_y = half_height - std::abs(z.imag());
    return std::min(inner_x, inner_y);
  }

  double min_clearance(int n_points) const {
    return 1e-3 * perimeter() / static_cast<double>(n_points);
  }
};

struct ContourNode {
  Complex z;
  Complex weight;  // dz element; sum of f(z) * weight approximates the loop
};

namespace detail {

// Trapezoid rule on each edge after a substitution whose velocity vanishes
// to fourth order at the corners; the endpoint corrections of the composite
// rule cancel there, so the closed-loop sum converges at high order even
// though the rectangle has corners.
inline double corner_smooth(double u) {
  const double pi = std::numbers::pi;
  return u - (2.0 / (3.0 * pi)) * std::sin(2.0 * pi * u) +
         (1.0 / (12.0 * pi)) * std::sin(4.0 * pi * u);
}

inline double corner_smooth_velocity(double u) {
  const double s = std::sin(std::numbers::pi * u);
  return (8.0 / 3.0) * s * s * s * s;
}

}  // namespace detail

// Clockwise traversal; nodes per edge proportional to edge length.
inline std::vector<ContourNode> contour_nodes(const Contour& c, int n_points) {
  if (n_points < 16) throw DomainError("contour_nodes: need n_points >= 16");
  const Complex tl(c.x_lo(), c.half_height);
  const Complex tr(c.x_hi(), c.half_height);
  const Complex br(c.x_hi(), -c.half_height);
  const Complex bl(c.x_lo(), -c.half_height);
  const Complex corners[5] = {tl, tr, br, bl, tl};

  const double per = c.perimeter();
  std::vector<ContourNode> nodes;
  nodes.reserve(static_cast<size_t>(n_points) + 8);
  for (int e = 0; e < 4; ++e) {
    const Complex start = corners[e];
    const Complex span = corners[e + 1] - corners[e];
    const double len = std::abs(span);
    const int m = std::max(2, static_cast<int>(std::lround(
                                  n_points * len / per)));
    const double h = 1.0 / m;
    for (int i = 1; i < m; ++i) {
      const double u = i * h;
      ContourNode node;
      node.z = start + span * detail::corner_smooth(u);
      node.weight = span * (detail::corner_smooth_velocity(u) * h);
      nodes.push_back(node);
    }
  }
  return nodes;
}

// (1 / 2 pi i) * clockwise loop integral of f. With this orientation a simple
// pole of f(z) = A / (p - z) strictly inside contributes +A.
// Value is Complex or ComplexMatrix.
template <typename Value, typename F>
Value contour_integral(const Contour& c, int n_points, F&& f) {
  const std::vector<ContourNode> nodes = contour_nodes(c, n_points);
  Value acc = Value(f(nodes.front().z) * nodes.front().weight);
  for (size_t i = 1; i < nodes.size(); ++i)
    acc += Value(f(nodes[i].z) * nodes[i].weight);
  const Complex inv_2pii = 1.0 / (Complex(0.0, 2.0) * std::numbers::pi);
  return Value(acc * inv_2pii);
}

}  // namespace specshift
