#pragma once

// The two-oscillator extremals of f = (x2^2, -x1^2) (or any field with curl
// -2(x1 + x2)). With y = x1 - x2 and z = x1 + x2 the Lorentz equations
// conserve yd^2 + zd^2 = r^2 and yd - lambda_osc z^2 / 2 = c, where
// lambda_osc = 2 lambda, and the time along the path is an incomplete
// elliptic integral of the first kind in the angle theta with
// z = sqrt(2 (r - c) / lambda_osc) sin(theta).

#include <vector>

#include "nonholo/optimal/extremal.hpp"

namespace nonholo::optimal {

struct OscillatorReduction {
  double lambda_osc = 0.0;
  double r = 0.0;
  double c = 0.0;
  double kappa = 0.0;  // sqrt((r - c) / (r + c))
  double m = 0.0;      // kappa^2 / (1 + kappa^2)
  double r_spread = 0.0;  // standard deviations of the two conserved quantities
  double c_spread = 0.0;
  // lambda_osc = 0 or r <= |c|: the elliptic time map does not apply.
  bool degenerate = false;
  std::string note;
  std::vector<double> times, y, z;
  // Unwrapped angle per sample, increasing in time; theta.front() is theta0.
  std::vector<double> theta;
};

// Throws ValidationError unless the problem has this curl and the energy
// cost, TaskError when either conserved quantity varies by more than 1e-5
// (relative to r^2 and r).
OscillatorReduction reduce_oscillator(const OptimalSolution& solution, const ExtremalProblem& problem);

// F(psi | m) = integral over [0, psi] of (1 - m sin^2)^(-1/2), by adaptive
// Gauss-Kronrod to 1e-12. Throws ValidationError for m >= 1.
double elliptic_f(double psi, double m);

// |t(theta) - t(theta0)|. Throws ValidationError on a degenerate reduction.
double elliptic_time_map(const OscillatorReduction& red, double theta);

}  // namespace nonholo::optimal
