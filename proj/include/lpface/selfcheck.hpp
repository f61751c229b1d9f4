#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lpface/image.hpp"

namespace lpface {

/// Outcome of one self-test property; detail carries the measured margin.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Six rendered faces at ORL geometry (92x112), used as fixtures by the
/// image-level invariance checks.
std::vector<GrayImage> selfcheck_fixtures();

CheckResult check_pgm_round_trip();
CheckResult check_rotation_column_shift(const std::vector<GrayImage>& fixtures);
CheckResult check_scale_invariance(const std::vector<GrayImage>& fixtures);
CheckResult check_gram_vs_direct();
CheckResult check_eigen_orthonormality();
CheckResult check_trace_identity();
CheckResult check_mlp_gradients();
CheckResult check_update_arithmetic();
CheckResult check_rate_positivity();
CheckResult check_gradient_descent_reduction();
CheckResult check_xor_convergence();

/// The deterministic property suite: every check above except XOR
/// convergence, in a fixed order.
std::vector<CheckResult> run_property_suite(const std::vector<GrayImage>& fixtures);

/// Property suite plus XOR convergence. Prints one [PASS]/[FAIL] line per
/// check; returns true when everything passed.
bool run_selftest(std::ostream& out);

}  // namespace lpface
