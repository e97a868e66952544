#pragma once

#include "alslq/integrator.hpp"
#include "alslq/lq_approximation.hpp"
#include "alslq/trajectory.hpp"

namespace alslq {

/// Value-function coefficients of the costate ansatz lambda = S dx + s.
struct RiccatiSolution {
  MatrixTrajectory S;
  Trajectory s;
};

struct RiccatiResult {
  RiccatiSolution solution;
  MatrixTrajectory K;  // -R^-1 (B'S + P)
  Trajectory u_ff;     // -R^-1 (B's + r)
  IntegrationStats stats;
};

struct RiccatiSettings {
  IntegratorSettings integrator = IntegratorSettings::adaptive(1e-8, 1e-6);
  // Throws once any |S_ij| exceeds this bound.
  double norm_cap = 1e12;
};

/// Integrates the differential Riccati equations backward from tf:
///   -S' = Q + A'S + SA - (SB + P')R^-1(B'S + P),   S(tf) = Qf
///   -s' = q + A's + S d - (SB + P')R^-1(B's + r),  s(tf) = qf
/// with LQ data linearly interpolated between nodes. S is re-symmetrized
/// after every step. R must be positive definite (see regularize()).
///
/// Throws IntegrationError on step-budget exhaustion or when S exceeds the norm cap.
RiccatiResult backward_riccati(const LqApproximation& lq, const RiccatiSettings& settings = {});

}  // namespace alslq
