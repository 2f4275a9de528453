#include "varreg/signal.hpp"

#include <cmath>

#include "varreg/errors.hpp"

namespace varreg {

Signal make_signal(std::vector<double> values, double grid_spacing) {
  if (!(grid_spacing > 0.0)) {
    throw InvalidInputError("signal grid_spacing must be positive");
  }
  if (values.empty()) throw InvalidInputError("signal must have at least one entry");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInputError("signal has non-finite entries");
  }
  return Signal{std::move(values), grid_spacing};
}

static void check_compatible(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) {
    throw InvalidInputError("signal size mismatch: " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
  if (a.grid_spacing != b.grid_spacing) {
    throw InvalidInputError("signal grid_spacing mismatch");
  }
}

double inner(const Signal& a, const Signal& b) {
  check_compatible(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * b.values[i];
  return s * a.grid_spacing;
}

double norm(const Signal& s) {
  double q = 0.0;
  for (double v : s.values) q += v * v;
  return std::sqrt(q * s.grid_spacing);
}

}  // namespace varreg
