#ifndef GQMECH_VERIFY_HPP
#define GQMECH_VERIFY_HPP

#include <cstdint>

#include "gqmech/report.hpp"

namespace gqm {

struct VerifyOptions {
  std::uint64_t seed = 20260809;
};

// Named verification checks. Each aggregates the sub-measurements of one
// acceptance area; tolerances are pinned inside.
CheckResult check_poisson_algebra(std::uint64_t seed);
CheckResult check_affine_closure(std::uint64_t seed);
CheckResult check_kinematics(std::uint64_t seed);
CheckResult check_classical_dynamics(std::uint64_t seed);
CheckResult check_constraint_compatibility(std::uint64_t seed);
CheckResult check_prequantization(std::uint64_t seed);
CheckResult check_schrodinger_representation(std::uint64_t seed);
CheckResult check_half_density_transform(std::uint64_t seed);
CheckResult check_quantum_constraints(std::uint64_t seed);

// Runs all checks; the final entry re-runs the suite with the same seed and
// verifies the rendered report is byte-identical.
VerificationReport run_full_verification(const VerifyOptions& options = {});

}  // namespace gqm

#endif  // GQMECH_VERIFY_HPP
