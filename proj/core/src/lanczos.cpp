#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gwpam/spectral.hpp"

namespace gwpam {

Eigenpair lanczos_top(const SparseMatrix& S, const SpectralOptions& opts, const Eigen::VectorXd* start) {
  const Eigen::Index n = S.rows();
  if (n == 0) throw std::invalid_argument("lanczos_top: empty matrix");
  Eigen::VectorXd v = start ? *start : Eigen::VectorXd::Ones(n);
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  Eigen::Index m = std::min<Eigen::Index>(opts.krylov_dim, n);
  if (n > 200000) m = std::min<Eigen::Index>(m, 20);

  Eigenpair out;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    Eigen::MatrixXd V(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    V.col(0) = v;
    Eigen::Index steps = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd w = S * V.col(j);
      alpha[j] = V.col(j).dot(w);
      w -= alpha[j] * V.col(j);
      if (j > 0) w -= beta[j - 1] * V.col(j - 1);
      // full reorthogonalization, twice for stability
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
      beta[j] = w.norm();
      steps = j + 1;
      if (j + 1 == m || beta[j] < 1e-14) break;
      V.col(j + 1) = w / beta[j];
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index j = 0; j < steps; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T);
    const double theta = tri.eigenvalues()[steps - 1];
    Eigen::VectorXd s = tri.eigenvectors().col(steps - 1);
    v = V.leftCols(steps) * s;
    v.normalize();
    out.value = theta;
    out.iterations = restart + 1;
    out.residual = (S * v - theta * v).norm();
    const double scale = std::max(1.0, std::abs(theta));
    if (out.residual <= opts.tolerance * scale * 1e3 || (std::abs(theta - previous) <= opts.tolerance * scale &&
                                                         out.residual <= 1e-8 * scale)) {
      out.phi = v;
      return out;
    }
    previous = theta;
  }
  throw std::runtime_error("lanczos_top: no convergence after " + std::to_string(opts.max_restarts) +
                           " restarts (residual " + std::to_string(out.residual) + ")");
}

}  // namespace gwpam
