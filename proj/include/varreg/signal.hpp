#pragma once

#include <cstddef>
#include <vector>

namespace varreg {

// One-dimensional signal on a uniform grid. Inner products and norms carry
// the grid weight, so they approximate their continuum counterparts and two
// signals are only comparable on matching grids.
struct Signal {
  std::vector<double> values;
  double grid_spacing = 1.0;

  std::size_t size() const { return values.size(); }
};

Signal make_signal(std::vector<double> values, double grid_spacing = 1.0);

// Weighted inner product <a,b> = spacing * sum a_i b_i. Mismatched sizes or
// spacings are rejected.
double inner(const Signal& a, const Signal& b);
double norm(const Signal& s);

}  // namespace varreg
