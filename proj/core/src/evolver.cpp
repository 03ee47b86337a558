#include "gwpam/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace gwpam {

std::string to_string(EvolveMethod m) {
  switch (m) {
    case EvolveMethod::expm_action:
      return "expm_action";
    case EvolveMethod::ode_rk:
      return "ode_rk";
    case EvolveMethod::spectral:
      return "spectral";
  }
  return "unknown";
}

EvolveMethod parse_evolve_method(const std::string& s) {
  if (s == "expm_action" || s == "expm") return EvolveMethod::expm_action;
  if (s == "ode_rk" || s == "rk") return EvolveMethod::ode_rk;
  if (s == "spectral") return EvolveMethod::spectral;
  throw std::invalid_argument("unknown evolve method: " + s);
}

nlohmann::json EvolutionResult::to_json(const DirichletWindow& window) const {
  nlohmann::json vertices = window.vertices();
  return {{"y", y},
          {"t", t},
          {"method", to_string(method)},
          {"vertices", vertices},
          {"u", u},
          {"total_mass", total_mass},
          {"log_total_mass", log_total_mass},
          {"error_estimate", error_estimate}};
}

ScaledVector expm_action_symmetric(const SparseMatrix& S, ScaledVector start, double t, const EvolveOptions& opts) {
  if (t < 0) throw std::invalid_argument("expm_action: t must be nonnegative");
  const Eigen::Index n = S.rows();
  ScaledVector cur = std::move(start);
  if (t == 0.0 || n == 0) return cur;
  // Gershgorin shift m bounds the spectrum; P = I + (S - m)/nu is then
  // entrywise nonnegative with row sums at most one.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(S, i); it; ++it) {
      if (it.col() == i)
        diag[i] = it.value();
      else if (it.value() < 0)
        throw std::invalid_argument("expm_action: off-diagonal entries must be nonnegative");
      row += it.value();
    }
    m = std::max(m, row);
  }
  const double nu = (m - diag.array()).maxCoeff();
  if (nu <= 0.0) {
    cur.log_scale += m * t;
    return cur;
  }
  SparseMatrix P = S / nu;
  for (Eigen::Index i = 0; i < n; ++i) P.coeffRef(i, i) += 1.0 - m / nu;
  P.makeCompressed();

  const int chunks = std::max(1, static_cast<int>(std::ceil(nu * t / opts.chunk)));
  const double h = t / chunks;
  const double lam = nu * h;
  Eigen::VectorXd term(n), acc(n);
  for (int c = 0; c < chunks; ++c) {
    double weight = std::exp(-lam);
    double cumulative = weight;
    term = cur.v;
    acc = weight * term;
    for (int k = 1; 1.0 - cumulative > opts.tol || k <= lam; ++k) {
      term = P * term;
      weight *= lam / k;
      cumulative += weight;
      acc += weight * term;
      if (k > 10000) throw std::runtime_error("expm_action: Poisson series did not terminate");
    }
    cur.error += std::max(0.0, 1.0 - cumulative);
    const double scale = acc.cwiseAbs().maxCoeff();
    if (scale <= 0.0 || !std::isfinite(scale)) {
      cur.v = acc;
      cur.log_scale += m * h;
      continue;
    }
    cur.v = acc / scale;
    cur.log_scale += m * h + std::log(scale);
  }
  return cur;
}

namespace {

struct Prepared {
  Hamiltonian h;
  int y_local = -1;  // position among kept rows
};

Prepared prepare(const DirichletWindow& window, const PotentialField& xi, Vertex y) {
  if (xi.size() != window.graph().size()) throw std::invalid_argument("evolve: potential size does not match graph");
  Prepared p;
  p.h = hamiltonian_matrix(window, xi.values());
  const int yl = window.local_index(y);
  if (yl < 0) throw std::invalid_argument("evolve: y outside the window");
  auto it = std::find(p.h.kept.begin(), p.h.kept.end(), yl);
  p.y_local = static_cast<int>(it - p.h.kept.begin());
  return p;
}

double safe_exp_sum(const std::vector<double>& u, double& log_sum) {
  double s = 0.0;
  for (double v : u) s += v;
  log_sum = std::log(s);
  return s;
}

}  // namespace

EvolutionResult evolve(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                       EvolveMethod method, const EvolveOptions& opts) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be nonnegative");
  Prepared prep = prepare(window, xi, y);
  const Hamiltonian& h = prep.h;
  const auto n = static_cast<Eigen::Index>(h.kept.size());
  EvolutionResult out;
  out.y = y;
  out.t = t;
  out.method = method;
  out.u.assign(window.size(), 0.0);
  const double dy = h.degree[prep.y_local];

  if (t == 0.0) {
    out.u[static_cast<std::size_t>(h.kept[static_cast<std::size_t>(prep.y_local)])] = 1.0;
    out.total_mass = 1.0;
    out.log_total_mass = 0.0;
    return out;
  }

  switch (method) {
    case EvolveMethod::expm_action: {
      ScaledVector start;
      start.v = Eigen::VectorXd::Zero(n);
      start.v[prep.y_local] = 1.0;
      ScaledVector res = expm_action_symmetric(h.S, std::move(start), t, opts);
      double mass_scaled = 0.0;
      for (Eigen::Index a = 0; a < n; ++a) {
        const double val = res.v[a] * std::sqrt(h.degree[a] / dy);
        mass_scaled += val;
        out.u[static_cast<std::size_t>(h.kept[static_cast<std::size_t>(a)])] = val * std::exp(res.log_scale);
      }
      out.log_total_mass = std::log(mass_scaled) + res.log_scale;
      out.total_mass = std::exp(out.log_total_mass);
      out.error_estimate = res.error;
      return out;
    }
    case EvolveMethod::ode_rk: {
      namespace odeint = boost::numeric::odeint;
      using State = std::vector<double>;
      double shift = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < n; ++a) shift = std::max(shift, h.M.coeff(a, a));
      Eigen::SparseMatrix<double, Eigen::RowMajor> Mt = h.M.transpose();
      auto system = [&](const State& v, State& dv, double) {
        Eigen::Map<const Eigen::VectorXd> vin(v.data(), n);
        Eigen::Map<Eigen::VectorXd> vout(dv.data(), n);
        vout = Mt * vin - shift * vin;
      };
      State v(static_cast<std::size_t>(n), 0.0);
      v[static_cast<std::size_t>(prep.y_local)] = 1.0;
      auto stepper = odeint::make_controlled(opts.rk_atol, opts.rk_rtol, odeint::runge_kutta_dopri5<State>());
      odeint::integrate_adaptive(stepper, system, v, 0.0, t, std::min(t, 1e-3));
      double mass_scaled = 0.0;
      for (Eigen::Index a = 0; a < n; ++a) {
        const double val = std::max(0.0, v[static_cast<std::size_t>(a)]);
        mass_scaled += val;
        out.u[static_cast<std::size_t>(h.kept[static_cast<std::size_t>(a)])] = val * std::exp(shift * t);
      }
      out.log_total_mass = std::log(mass_scaled) + shift * t;
      out.total_mass = std::exp(out.log_total_mass);
      out.error_estimate = opts.rk_rtol;
      return out;
    }
    case EvolveMethod::spectral: {
      Eigen::VectorXd u = evolve_spectral(window, xi.values(), y, t);
      for (Eigen::Index i = 0; i < u.size(); ++i) out.u[static_cast<std::size_t>(i)] = std::max(0.0, u[i]);
      out.total_mass = safe_exp_sum(out.u, out.log_total_mass);
      out.error_estimate = 1e-13 * std::max(1.0, t);
      return out;
    }
  }
  throw std::invalid_argument("evolve: unknown method");
}

std::vector<double> log_total_mass_curve(const DirichletWindow& window, const PotentialField& xi, Vertex y,
                                         const std::vector<double>& times, const EvolveOptions& opts) {
  Prepared prep = prepare(window, xi, y);
  const Hamiltonian& h = prep.h;
  // e^{tM} 1 = D^{-1/2} e^{tS} D^{1/2} 1
  ScaledVector cur;
  cur.v = h.degree.cwiseSqrt();
  const double sqrt_dy = std::sqrt(h.degree[prep.y_local]);
  std::vector<double> out;
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw std::invalid_argument("log_total_mass_curve: times must be increasing");
    cur = expm_action_symmetric(h.S, std::move(cur), t - now, opts);
    now = t;
    out.push_back(std::log(cur.v[prep.y_local] / sqrt_dy) + cur.log_scale);
  }
  return out;
}

double log_total_mass(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                      const EvolveOptions& opts) {
  return log_total_mass_curve(window, xi, y, {t}, opts).front();
}

double total_mass(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                  const EvolveOptions& opts) {
  return std::exp(log_total_mass(window, xi, y, t, opts));
}

std::vector<GrowthPoint> growth_curve(const DirichletWindow& window, const PotentialField& xi, Vertex y,
                                      const std::vector<double>& times, const EvolveOptions& opts) {
  for (double t : times)
    if (!(t > 0.0)) throw std::invalid_argument("growth_curve: times must be positive");
  auto logs = log_total_mass_curve(window, xi, y, times, opts);
  std::vector<GrowthPoint> out;
  for (std::size_t i = 0; i < times.size(); ++i) out.push_back({times[i], logs[i], logs[i] / times[i]});
  return out;
}

}  // namespace gwpam
