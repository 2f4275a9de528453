#include "varreg/linops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varreg/errors.hpp"
#include "varreg/rng.hpp"

namespace varreg {

LinearMap make_dense(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidInputError("dense operator matrix must be non-empty");
  }
  if (!m.allFinite()) {
    throw InvalidInputError("dense operator matrix has non-finite entries");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  if (qr.rank() < m.cols()) {
    throw InvalidInputError("dense operator is rank-deficient (column rank " +
                            std::to_string(qr.rank()) + " < " +
                            std::to_string(m.cols()) + "); not injective");
  }
  LinearMap op;
  op.kind = OpKind::dense;
  op.matrix = m;
  op.in_dim = static_cast<std::size_t>(m.cols());
  op.out_dim = static_cast<std::size_t>(m.rows());
  return op;
}

LinearMap make_convolution(std::vector<double> kernel, std::size_t n) {
  if (kernel.empty()) throw InvalidInputError("convolution kernel must be non-empty");
  if (n == 0) throw InvalidInputError("convolution signal length must be positive");
  for (double k : kernel) {
    if (!std::isfinite(k)) throw InvalidInputError("convolution kernel has non-finite entries");
  }
  bool all_zero = true;
  for (double k : kernel) all_zero = all_zero && k == 0.0;
  if (all_zero) throw InvalidInputError("convolution kernel must not be identically zero");
  LinearMap op;
  op.kind = OpKind::convolution;
  op.kernel = std::move(kernel);
  op.in_dim = n;
  op.out_dim = n;
  return op;
}

static void check_dim(const LinearMap& op, const Signal& x, std::size_t want,
                      const char* which) {
  if (x.size() != want) {
    throw InvalidInputError(std::string("operator ") + which + " dimension mismatch: got " +
                            std::to_string(x.size()) + ", want " + std::to_string(want));
  }
}

Signal apply(const LinearMap& op, const Signal& x) {
  check_dim(op, x, op.in_dim, "input");
  Signal y;
  y.grid_spacing = x.grid_spacing;
  y.values.assign(op.out_dim, 0.0);
  if (op.kind == OpKind::dense) {
    Eigen::Map<const Eigen::VectorXd> xv(x.values.data(), x.values.size());
    Eigen::Map<Eigen::VectorXd>(y.values.data(), y.values.size()) = op.matrix * xv;
    return y;
  }
  const std::size_t k = op.kernel.size();
  const std::size_t n = op.in_dim;
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>((k - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + c - static_cast<std::ptrdiff_t>(m);
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(n)) s += op.kernel[m] * x.values[j];
    }
    y.values[i] = s;
  }
  return y;
}

Signal apply_adjoint(const LinearMap& op, const Signal& y) {
  check_dim(op, y, op.out_dim, "output");
  Signal x;
  x.grid_spacing = y.grid_spacing;
  x.values.assign(op.in_dim, 0.0);
  if (op.kind == OpKind::dense) {
    Eigen::Map<const Eigen::VectorXd> yv(y.values.data(), y.values.size());
    Eigen::Map<Eigen::VectorXd>(x.values.data(), x.values.size()) =
        op.matrix.transpose() * yv;
    return x;
  }
  const std::size_t k = op.kernel.size();
  const std::size_t n = op.in_dim;
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>((k - 1) / 2);
  // row i, column j of the forward matrix carries kernel[i + c - j]
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(m) - c;
      if (i >= 0 && i < static_cast<std::ptrdiff_t>(n)) s += op.kernel[m] * y.values[i];
    }
    x.values[j] = s;
  }
  return x;
}

Eigen::MatrixXd dense_equivalent(const LinearMap& op) {
  if (op.kind == OpKind::dense) return op.matrix;
  Eigen::MatrixXd m(op.out_dim, op.in_dim);
  Signal e;
  e.values.assign(op.in_dim, 0.0);
  for (std::size_t j = 0; j < op.in_dim; ++j) {
    e.values[j] = 1.0;
    const Signal col = apply(op, e);
    for (std::size_t i = 0; i < op.out_dim; ++i) m(i, j) = col.values[i];
    e.values[j] = 0.0;
  }
  return m;
}

double adjoint_check(const LinearMap& op, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidInputError("adjoint_check needs at least one trial");
  Rng rng(splitmix64(seed));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Signal x, y;
    x.values.resize(op.in_dim);
    y.values.resize(op.out_dim);
    for (double& v : x.values) v = rng.normal();
    for (double& v : y.values) v = rng.normal();
    const double lhs = inner(apply(op, x), y);
    const double rhs = inner(x, apply_adjoint(op, y));
    const double defect = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    worst = std::max(worst, defect);
  }
  return worst;
}

double constant_nonvanish_check(const LinearMap& op) {
  Signal ones;
  ones.values.assign(op.in_dim, 1.0);
  return norm(apply(op, ones));
}

double op_norm_sq_estimate(const LinearMap& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw InvalidInputError("op_norm_sq_estimate needs at least one iteration");
  Rng rng(splitmix64(seed));
  Signal v;
  v.values.resize(op.in_dim);
  for (double& x : v.values) x = rng.normal();
  double nv = norm(v);
  if (nv == 0.0) {
    v.values[0] = 1.0;
    nv = norm(v);
  }
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (double& x : v.values) x /= nv;
    const Signal w = apply_adjoint(op, apply(op, v));
    lambda = inner(v, w);  // Rayleigh quotient, ||v|| = 1
    v = w;
    nv = norm(v);
    if (nv == 0.0) return 0.0;  // v in the null space; estimate is exact
  }
  return lambda;
}

}  // namespace varreg
