#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gwpam/potential.hpp"
#include "gwpam/spectral.hpp"

namespace gwpam {

enum class EvolveMethod { expm_action, ode_rk, spectral };

std::string to_string(EvolveMethod m);
EvolveMethod parse_evolve_method(const std::string& s);

struct EvolveOptions {
  double tol = 1e-10;       // truncation per uniformization chunk
  double chunk = 25.0;      // bound on nu * h per chunk
  double rk_rtol = 1e-12;
  double rk_atol = 1e-14;
};

struct EvolutionResult {
  Vertex y = 0;
  double t = 0.0;
  EvolveMethod method = EvolveMethod::expm_action;
  std::vector<double> u;  // window positions; u(x) = (e^{tM})(y, x)
  double total_mass = 0.0;
  double log_total_mass = 0.0;
  double error_estimate = 0.0;

  nlohmann::json to_json(const DirichletWindow& window) const;
};

EvolutionResult evolve(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                       EvolveMethod method = EvolveMethod::expm_action, const EvolveOptions& opts = {});

// (e^{tM} 1)(y), evolved from the all-ones vector.
double total_mass(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                  const EvolveOptions& opts = {});
double log_total_mass(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                      const EvolveOptions& opts = {});

// log U_y(t) for increasing times, reusing the semigroup between them.
std::vector<double> log_total_mass_curve(const DirichletWindow& window, const PotentialField& xi, Vertex y,
                                         const std::vector<double>& times, const EvolveOptions& opts = {});

struct GrowthPoint {
  double t = 0.0;
  double log_mass = 0.0;
  double rate = 0.0;  // (1/t) log U(t)
};

std::vector<GrowthPoint> growth_curve(const DirichletWindow& window, const PotentialField& xi, Vertex y,
                                      const std::vector<double>& times, const EvolveOptions& opts = {});

// e^{tS} v for a symmetric matrix with nonnegative off-diagonal, returned as
// (vector, log scale) with the true value vector * exp(log scale).
struct ScaledVector {
  Eigen::VectorXd v;
  double log_scale = 0.0;
  double error = 0.0;
};

ScaledVector expm_action_symmetric(const SparseMatrix& S, ScaledVector start, double t, const EvolveOptions& opts = {});

}  // namespace gwpam
