#include <doctest.h>

#include <cmath>
#include <vector>

#include "varreg/errors.hpp"
#include "varreg/harness.hpp"
#include "varreg/linops.hpp"
#include "varreg/mdp.hpp"
#include "varreg/penalties.hpp"
#include "varreg/signal.hpp"
#include "varreg/vsc.hpp"

using namespace varreg;

namespace {

Signal sig(std::vector<double> v, double h = 1.0) { return make_signal(std::move(v), h); }

LinearMap identity_op(std::size_t n) {
  return make_dense(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n)));
}

}  // namespace

TEST_CASE("radii validation") {
  CHECK_THROWS_AS(validate_radii({1.0, 2.0}), InvalidInputError);
  CHECK_THROWS_AS(validate_radii({0.5, 2.0}), InvalidInputError);
  CHECK_THROWS_AS(validate_radii({2.0, 1.5}), InvalidInputError);
  CHECK_NOTHROW(validate_radii({1.5, 1.5}));
  CHECK_NOTHROW(validate_radii({1.5, 2.0}));
}

TEST_CASE("identity instance lands in the closed-form alpha interval") {
  // residual(alpha) = alpha/(1+alpha) for T = I, f = (1,0), so the window
  // [0.15, 0.2] maps to alpha in [3/17, 1/4]
  const MdpResult r = select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}),
                                       0.1, {1.5, 2.0});
  CHECK(r.alpha >= 3.0 / 17.0 - 1e-9);
  CHECK(r.alpha <= 0.25 + 1e-9);
  CHECK(r.solution.residual_norm >= 0.15 - 1e-6);
  CHECK(r.solution.residual_norm <= 0.20 + 1e-6);
  CHECK(r.solution.converged);
  CHECK(r.evaluations >= 1);
  CHECK(r.bracket_low <= r.alpha);
  CHECK(r.bracket_high >= r.alpha);
  CHECK(r.monotonicity_warnings == 0);

  const MdpResult again = select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}),
                                           0.1, {1.5, 2.0});
  CHECK(again.alpha == r.alpha);  // deterministic search
}

TEST_CASE("degenerate window tau_lower == tau_upper converges by bisection") {
  const MdpResult r = select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}),
                                       0.1, {2.0, 2.0});
  // target residual exactly 0.2, i.e. alpha = 0.25; bracket collapse accepts
  // the nearest probe within the documented slack
  CHECK(std::fabs(r.solution.residual_norm - 0.2) <= 5e-4);
  CHECK(std::fabs(r.alpha - 0.25) <= 1e-2);
}

TEST_CASE("noise at the data scale is refused") {
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 1.0,
                                   {1.5, 2.0}),
                  NoAdmissibleAlphaError);
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 1.5,
                                   {1.5, 2.0}),
                  NoAdmissibleAlphaError);
}

TEST_CASE("unreachable window exhausts the probe budget") {
  // window [0.0015, 0.002] lies below any probe's resolution from alpha0 =
  // delta^2 downward within 60 probes only if the residual can get there;
  // tiny tau with tight window and max_probes 3 forces failure
  SearchSettings s;
  s.max_probes = 2;
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 0.1,
                                   {1.9, 1.901}, s),
                  NoAdmissibleAlphaError);
}

TEST_CASE("consequence check on the identity MDP instance") {
  const Signal phi_true = sig({1, 0});
  const Signal f_true = phi_true;  // identity operator
  const double delta = 0.1;
  // data on the noise ball boundary: f_delta = f_true + delta * e with a
  // unit direction e
  const Signal f_delta = sig({1, -0.1});
  const DiscrepancyRadii radii{1.5, 2.0};
  const LinearMap op = identity_op(2);
  const MdpResult r = select_alpha_mdp(op, make_quadratic(), f_delta, delta, radii);
  const ConsequenceCheck c = mdp_consequence_check(r, op, phi_true, delta, radii);
  CHECK(c.upper_ok);
  CHECK(c.lower_ok);
  CHECK(c.discrepancy <= (radii.tau_upper + 1.0) * delta + 1e-10);
  CHECK(c.discrepancy >= (radii.tau_lower - 1.0) * delta - 1e-10);
}

TEST_CASE("consequence check flags the degenerate exact-recovery case") {
  // phi_reg == phi_true makes the lower consequence fail: 0 < (tau_lower-1)*delta
  MdpResult r;
  r.alpha = 0.1;
  r.solution.phi = sig({1, 0});
  const ConsequenceCheck c =
      mdp_consequence_check(r, identity_op(2), sig({1, 0}), 0.1, {1.5, 2.0});
  CHECK(c.upper_ok);
  CHECK(!c.lower_ok);
  CHECK(c.discrepancy == 0.0);
}

TEST_CASE("lower consequence trivializes as tau_lower approaches 1") {
  MdpResult r;
  r.alpha = 0.1;
  r.solution.phi = sig({0.99, 0});
  const ConsequenceCheck c =
      mdp_consequence_check(r, identity_op(2), sig({1, 0}), 0.1, {1.0 + 1e-9, 2.0});
  CHECK(c.lower_ok);  // (tau_lower - 1) * delta ~ 1e-10 below the discrepancy
}

TEST_CASE("alpha bounds reproduce hand-evaluated values") {
  SUBCASE("new lower bound") {
    const AlphaBounds b = compute_alpha_bounds({2.0, 2.0}, 0.25,
                                               make_index_power(1.0, 0.5), 1.0, 0.01);
    CHECK(b.new_lower == doctest::Approx(6.25e-5).epsilon(1e-12));
  }
  SUBCASE("alpha max, printed variant") {
    // psi(delta) = 0.1 at delta = 0.1 via psi(t) = t
    const AlphaBounds b = compute_alpha_bounds({2.0, 2.0}, 0.25,
                                               make_index_power(1.0, 1.0), 1.0, 0.1);
    CHECK(b.alpha_max == doctest::Approx(1.0 / 4.2).epsilon(1e-12));
  }
  SUBCASE("hofmann-mathe lower bound") {
    const AlphaBounds b = compute_alpha_bounds({2.0, 2.0}, 0.25,
                                               make_index_power(1.0, 1.0), 1.0, 0.1);
    CHECK(b.hm_lower == doctest::Approx(0.015).epsilon(1e-12));
  }
  SUBCASE("index lower bound at delta") {
    const AlphaBounds b = compute_alpha_bounds({2.0, 2.0}, 0.25,
                                               make_index_power(1.0, 1.0), 2.0, 0.1);
    CHECK(b.index_lower_at_delta == doctest::Approx(0.25 / 4.0 * 2.0 * 0.01).epsilon(1e-12));
  }
  SUBCASE("variants differ exactly by the (tau_lower - 1) placement") {
    const IndexFunction psi = make_index_power(1.0, 1.0);
    const DiscrepancyRadii radii{3.0, 3.0};
    const AlphaBounds printed = compute_alpha_bounds(radii, 0.25, psi, 1.0, 0.1,
                                                     AlphaMaxVariant::printed);
    const AlphaBounds corrected = compute_alpha_bounds(radii, 0.25, psi, 1.0, 0.1,
                                                       AlphaMaxVariant::corrected);
    CHECK(printed.alpha_max == doctest::Approx(1.0 / (32.0 * 2.0 * 0.1 + 1.0)).epsilon(1e-12));
    CHECK(corrected.alpha_max == doctest::Approx(1.0 / (32.0 * 0.5 * 0.1 + 1.0)).epsilon(1e-12));
    CHECK(printed.alpha_max != corrected.alpha_max);
  }
  SUBCASE("all entries positive and finite for valid input") {
    const AlphaBounds b = compute_alpha_bounds({1.5, 2.0}, 0.25,
                                               make_index_power(0.5, 0.7), 8.0, 0.05);
    CHECK(b.hm_lower > 0.0);
    CHECK(b.new_lower > 0.0);
    CHECK(b.alpha_max > 0.0);
    CHECK(b.index_lower_at_delta > 0.0);
  }
  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(compute_alpha_bounds({1.0, 2.0}, 0.25, make_index_power(1, 1), 1.0, 0.1),
                    InvalidInputError);
    CHECK_THROWS_AS(compute_alpha_bounds({1.5, 2.0}, 0.25, make_index_power(1, 1), 1.0, 0.0),
                    InvalidInputError);
    CHECK_THROWS_AS(compute_alpha_bounds({1.5, 2.0}, 0.0, make_index_power(1, 1), 1.0, 0.1),
                    InvalidInputError);
  }
}

TEST_CASE("search settings are validated") {
  SearchSettings bad;
  bad.expansion = 1.0;
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 0.1,
                                   {1.5, 2.0}, bad),
                  InvalidInputError);
  SearchSettings bad2;
  bad2.bracket_tol = 0.0;
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 0.1,
                                   {1.5, 2.0}, bad2),
                  InvalidInputError);
  SearchSettings bad3;
  bad3.alpha0 = -1.0;
  CHECK_THROWS_AS(select_alpha_mdp(identity_op(2), make_quadratic(), sig({1, 0}), 0.1,
                                   {1.5, 2.0}, bad3),
                  InvalidInputError);
}

TEST_CASE("warm-started search with non-quadratic penalties stays in the window") {
  const LinearMap op = make_convolution({0.06, 0.24, 0.4, 0.24, 0.06}, 24);
  const PhantomSpec spec{PhantomName::step, 24};
  const Signal phi_true = make_phantom(spec, 1.0);
  const Signal f_true = apply(op, phi_true);
  const double delta = 0.05;
  const Signal f_delta = add_noise_exact(f_true, delta, 99);
  const DiscrepancyRadii radii{1.5, 2.0};
  for (const Penalty& j : {make_smoothed_tv(0.01), make_l1()}) {
    const MdpResult r = select_alpha_mdp(op, j, f_delta, delta, radii);
    CHECK(r.solution.residual_norm >= radii.tau_lower * delta - 1e-6);
    CHECK(r.solution.residual_norm <= radii.tau_upper * delta + 1e-6);
    CHECK(r.solution.converged);
  }
}
