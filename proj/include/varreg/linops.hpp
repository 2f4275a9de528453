#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "varreg/signal.hpp"

namespace varreg {

enum class OpKind { dense, convolution };

// Linear forward operator between signal spaces on a shared grid. Two
// kinds: an explicit dense matrix, and same-length discrete convolution
// with zero padding (whose adjoint matches the dense equivalent exactly).
struct LinearMap {
  OpKind kind = OpKind::dense;
  Eigen::MatrixXd matrix;       // dense kind
  std::vector<double> kernel;   // convolution kind
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

// Checked factory: enforces full column rank (pivoted QR, threshold 1e-10).
// All config-driven construction goes through here; the raw aggregate stays
// available so degenerate operators can still be probed by the diagnostics
// below.
LinearMap make_dense(const Eigen::MatrixXd& m);

// y_i = sum_m kernel[m] * x[i + c - m], c = (k-1)/2, x zero-padded.
LinearMap make_convolution(std::vector<double> kernel, std::size_t n);

Signal apply(const LinearMap& op, const Signal& x);
Signal apply_adjoint(const LinearMap& op, const Signal& y);

// Dense matrix assembly of either kind (columns = images of basis vectors).
Eigen::MatrixXd dense_equivalent(const LinearMap& op);

// Max over seeded random pairs of |<Tx,y> - <x,T*y>| / (1 + |<Tx,y>|).
double adjoint_check(const LinearMap& op, int trials, std::uint64_t seed);

// ||T 1||; a vanishing value flags operators that kill constants.
double constant_nonvanish_check(const LinearMap& op);

// Power iteration estimate of ||T||^2 (largest eigenvalue of T*T).
double op_norm_sq_estimate(const LinearMap& op, int iters = 20,
                           std::uint64_t seed = 0x5eed);

}  // namespace varreg
