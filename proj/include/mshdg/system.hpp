#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mshdg/common.hpp"

namespace mshdg {

/// State maps take (x in R^m, u in R^n, sigma in R^{mn}) with sigma stored
/// row-major as sigma[i][mu], field index i outer, direction mu inner.
using StateMapVec = std::function<Vec(const Vec&, const Vec&, const Vec&)>;
using StateMapMat = std::function<Mat(const Vec&, const Vec&, const Vec&)>;
using StateMapScalar = std::function<double(const Vec&, const Vec&, const Vec&)>;

struct HamiltonianDef {
  StateMapScalar H;
  StateMapVec dH_du;      // R^n
  StateMapVec dH_dsigma;  // R^{mn}
};

/// First-order canonical system: grad-type equation with right side phi and
/// divergence-type equation with right side f, plus their state Jacobians.
/// All callables must be pure; they may be invoked concurrently.
struct CanonicalSystem {
  int m = 0;  // space dimension
  int n = 0;  // field count
  StateMapVec phi;            // R^{mn}
  StateMapVec f;              // R^n
  StateMapMat jac_phi_u;      // mn x n
  StateMapMat jac_phi_sigma;  // mn x mn
  StateMapMat jac_f_u;        // n x n
  StateMapMat jac_f_sigma;    // n x mn
  std::string label;
  std::optional<HamiltonianDef> hamiltonian;  // set for built-in Hamiltonian systems
};

struct SourceProbe {
  StateMapVec psi;  // (x, v, tau) -> R^{mn}
  StateMapVec g;    // (x, v, tau) -> R^n
};

struct SystemState {
  Vec x, u, sigma;
};

/// Deterministic sample states with |u|, |sigma| <= amplitude and x in [0,1]^m.
inline std::vector<SystemState> sample_states(int m, int n, int count, std::uint64_t seed,
                                              double amplitude = 10.0) {
  Lcg rng(seed);
  std::vector<SystemState> states(count);
  for (auto& s : states) {
    s.x = Vec::Zero(m);
    s.u = Vec::Zero(n);
    s.sigma = Vec::Zero(m * n);
    for (int i = 0; i < m; ++i) s.x(i) = rng.next_double();
    for (int i = 0; i < n; ++i) s.u(i) = amplitude * rng.next_symmetric();
    for (int i = 0; i < m * n; ++i) s.sigma(i) = amplitude * rng.next_symmetric();
  }
  return states;
}

namespace detail {

inline Mat fd_jacobian(const StateMapVec& fn, const Vec& x, const Vec& u, const Vec& s,
                       bool wrt_u, int out_dim) {
  const Vec& z = wrt_u ? u : s;
  Mat jac(out_dim, z.size());
  for (int j = 0; j < z.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
    Vec zp = z, zm = z;
    zp(j) += h;
    zm(j) -= h;
    Vec fp = wrt_u ? fn(x, zp, s) : fn(x, u, zp);
    Vec fm = wrt_u ? fn(x, zm, s) : fn(x, u, zm);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace detail

/// Maximum relative mismatch between the supplied Jacobians and central
/// finite differences of phi and f over deterministic sample states.
inline double jacobian_consistency(const CanonicalSystem& sys, int count = 20,
                                   std::uint64_t seed = 12345) {
  double worst = 0.0;
  for (const auto& st : sample_states(sys.m, sys.n, count, seed, 2.0)) {
    auto rel = [&](const Mat& a, const Mat& b) {
      const double scale = std::max(1.0, inf_norm(a));
      return inf_norm(a - b) / scale;
    };
    worst = std::max(worst, rel(sys.jac_phi_u(st.x, st.u, st.sigma),
                                detail::fd_jacobian(sys.phi, st.x, st.u, st.sigma, true, sys.m * sys.n)));
    worst = std::max(worst, rel(sys.jac_phi_sigma(st.x, st.u, st.sigma),
                                detail::fd_jacobian(sys.phi, st.x, st.u, st.sigma, false, sys.m * sys.n)));
    worst = std::max(worst, rel(sys.jac_f_u(st.x, st.u, st.sigma),
                                detail::fd_jacobian(sys.f, st.x, st.u, st.sigma, true, sys.n)));
    worst = std::max(worst, rel(sys.jac_f_sigma(st.x, st.u, st.sigma),
                                detail::fd_jacobian(sys.f, st.x, st.u, st.sigma, false, sys.n)));
  }
  return worst;
}

/// Jacobian of the coefficient vector c(z) = (f, phi) with respect to
/// z = (u, sigma). The coefficient 1-form is closed iff this is symmetric.
inline Mat coefficient_jacobian(const CanonicalSystem& sys, const SystemState& st) {
  const int n = sys.n, mn = sys.m * sys.n;
  Mat jac(n + mn, n + mn);
  jac.topLeftCorner(n, n) = sys.jac_f_u(st.x, st.u, st.sigma);
  jac.topRightCorner(n, mn) = sys.jac_f_sigma(st.x, st.u, st.sigma);
  jac.bottomLeftCorner(mn, n) = sys.jac_phi_u(st.x, st.u, st.sigma);
  jac.bottomRightCorner(mn, mn) = sys.jac_phi_sigma(st.x, st.u, st.sigma);
  return jac;
}

/// Max over samples of ||J - J^T||_inf for the coefficient Jacobian.
inline double closedness_residual(const CanonicalSystem& sys, const std::vector<SystemState>& states) {
  MSHDG_REQUIRE(!states.empty(), "closedness check needs at least one sample state");
  double worst = 0.0;
  for (const auto& st : states) {
    Mat jac = coefficient_jacobian(sys, st);
    worst = std::max(worst, inf_norm(jac - jac.transpose()));
  }
  return worst;
}

inline double closedness_residual(const CanonicalSystem& sys, int count = 50,
                                  std::uint64_t seed = 2024, double amplitude = 10.0) {
  return closedness_residual(sys, sample_states(sys.m, sys.n, count, seed, amplitude));
}

/// Build a canonical system from a Hamiltonian: phi = dH/dsigma, f = dH/du.
/// Jacobians come from the optional Hessian blocks, otherwise from central
/// finite differences of the gradients (flagged in the label).
struct HamiltonianHessian {
  StateMapMat d2H_du2;         // n x n
  StateMapMat d2H_dudsigma;    // mn x n  (d(dH_dsigma)/du)
  StateMapMat d2H_dsigma2;     // mn x mn
};

inline CanonicalSystem from_hamiltonian(const HamiltonianDef& h, int m, int n,
                                        const std::optional<HamiltonianHessian>& hess = std::nullopt,
                                        const std::string& label = "hamiltonian") {
  CanonicalSystem sys;
  sys.m = m;
  sys.n = n;
  sys.phi = h.dH_dsigma;
  sys.f = h.dH_du;
  if (hess) {
    sys.jac_phi_u = hess->d2H_dudsigma;
    sys.jac_phi_sigma = hess->d2H_dsigma2;
    sys.jac_f_u = hess->d2H_du2;
    StateMapMat mixed = hess->d2H_dudsigma;
    sys.jac_f_sigma = [mixed](const Vec& x, const Vec& u, const Vec& s) {
      return Mat(mixed(x, u, s).transpose());
    };
    sys.label = label;
  } else {
    StateMapVec phi = h.dH_dsigma, f = h.dH_du;
    const int mn = m * n;
    sys.jac_phi_u = [phi, mn](const Vec& x, const Vec& u, const Vec& s) {
      return detail::fd_jacobian(phi, x, u, s, true, mn);
    };
    sys.jac_phi_sigma = [phi, mn](const Vec& x, const Vec& u, const Vec& s) {
      return detail::fd_jacobian(phi, x, u, s, false, mn);
    };
    sys.jac_f_u = [f, n](const Vec& x, const Vec& u, const Vec& s) {
      return detail::fd_jacobian(f, x, u, s, true, n);
    };
    sys.jac_f_sigma = [f, n](const Vec& x, const Vec& u, const Vec& s) {
      return detail::fd_jacobian(f, x, u, s, false, n);
    };
    sys.label = label + " [fd-jacobians]";
  }
  sys.hamiltonian = h;
  double relerr = jacobian_consistency(sys, 20);
  MSHDG_REQUIRE(relerr <= 1e-5, "Hamiltonian gradients inconsistent with finite differences");
  return sys;
}

namespace detail {

/// Adaptive Gauss quadrature of a scalar function on [a, b].
inline double adaptive_gauss(const std::function<double(double)>& fn, double a, double b,
                             double tol, int depth = 0) {
  static const double x7[] = {0.025446043828620812, 0.12923440720030277, 0.2970774243113014,
                              0.5, 0.7029225756886986, 0.8707655927996972, 0.9745539561713792};
  static const double w7[] = {0.06474248308443485, 0.1398526957446383, 0.19091502525255946,
                              0.20897959183673468, 0.19091502525255946, 0.1398526957446383,
                              0.06474248308443485};
  auto panel = [&](double lo, double hi) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += w7[i] * fn(lo + (hi - lo) * x7[i]);
    return s * (hi - lo);
  };
  const double whole = panel(a, b);
  const double mid = 0.5 * (a + b);
  const double split = panel(a, mid) + panel(mid, b);
  if (std::abs(whole - split) <= tol || depth >= 30) return split;
  return adaptive_gauss(fn, a, mid, 0.5 * tol, depth + 1) +
         adaptive_gauss(fn, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Potential recovered by radial integration of (f, phi) from the zero state:
/// H(x,u,sigma) = int_0^1 [ phi(x,tu,ts).s + f(x,tu,ts).u ] dt, so H(x,0,0)=0.
/// Requires the coefficient 1-form to be closed along the segment, otherwise
/// the value would be path dependent.
inline double reconstruct_hamiltonian(const CanonicalSystem& sys, const Vec& x, const Vec& u,
                                      const Vec& sigma) {
  std::vector<SystemState> seg;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) seg.push_back({x, t * u, t * sigma});
  const double closed = closedness_residual(sys, seg);
  if (closed > 1e-6) {
    std::ostringstream os;
    os << "system is not closed (residual " << closed << "); potential would be path dependent";
    throw std::runtime_error(os.str());
  }
  auto integrand = [&](double t) {
    return sys.phi(x, t * u, t * sigma).dot(sigma) + sys.f(x, t * u, t * sigma).dot(u);
  };
  return detail::adaptive_gauss(integrand, 0.0, 1.0, 1e-13);
}

// ---------------------------------------------------------------------------
// Built-in system catalog
// ---------------------------------------------------------------------------

namespace detail {

inline StateMapMat const_mat(Mat a) {
  return [a](const Vec&, const Vec&, const Vec&) { return a; };
}

}  // namespace detail

/// phi = sigma, f = f0 (constant source). H = |sigma|^2/2 + f0.u.
inline CanonicalSystem poisson_system(int m, double f0 = 0.0, int n = 1) {
  CanonicalSystem sys;
  sys.m = m;
  sys.n = n;
  const int mn = m * n;
  sys.phi = [](const Vec&, const Vec&, const Vec& s) { return s; };
  sys.f = [f0, n](const Vec&, const Vec&, const Vec&) { return Vec::Constant(n, f0).eval(); };
  sys.jac_phi_u = detail::const_mat(Mat::Zero(mn, n));
  sys.jac_phi_sigma = detail::const_mat(Mat::Identity(mn, mn));
  sys.jac_f_u = detail::const_mat(Mat::Zero(n, n));
  sys.jac_f_sigma = detail::const_mat(Mat::Zero(n, mn));
  std::ostringstream os;
  os << "poisson(f=" << f0 << ")";
  sys.label = os.str();
  HamiltonianDef h;
  h.H = [f0, n](const Vec&, const Vec& u, const Vec& s) {
    return 0.5 * s.squaredNorm() + f0 * u.sum();
  };
  h.dH_du = [f0, n](const Vec&, const Vec&, const Vec&) { return Vec::Constant(n, f0).eval(); };
  h.dH_dsigma = [](const Vec&, const Vec&, const Vec& s) { return s; };
  sys.hamiltonian = h;
  return sys;
}

/// phi = a sigma (a constant SPD), f = f0 - c u. H = s'as/2 + f0.u - c|u|^2/2.
inline CanonicalSystem linear_elliptic_system(Mat a, double c, double f0, int n = 1) {
  const int mn = static_cast<int>(a.rows());
  MSHDG_REQUIRE(a.rows() == a.cols() && mn % n == 0, "coefficient matrix must be mn x mn");
  MSHDG_REQUIRE(inf_norm(a - a.transpose()) <= 1e-14 * std::max(1.0, inf_norm(a)),
                "coefficient matrix must be symmetric");
  const int m = mn / n;
  CanonicalSystem sys;
  sys.m = m;
  sys.n = n;
  sys.phi = [a](const Vec&, const Vec&, const Vec& s) { return (a * s).eval(); };
  sys.f = [f0, c, n](const Vec&, const Vec& u, const Vec&) {
    return (Vec::Constant(n, f0) - c * u).eval();
  };
  sys.jac_phi_u = detail::const_mat(Mat::Zero(mn, n));
  sys.jac_phi_sigma = detail::const_mat(a);
  sys.jac_f_u = detail::const_mat(-c * Mat::Identity(n, n));
  sys.jac_f_sigma = detail::const_mat(Mat::Zero(n, mn));
  std::ostringstream os;
  os << "linear_elliptic(c=" << c << ",f=" << f0 << ")";
  sys.label = os.str();
  HamiltonianDef h;
  h.H = [a, c, f0](const Vec&, const Vec& u, const Vec& s) {
    return 0.5 * s.dot(a * s) + f0 * u.sum() - 0.5 * c * u.squaredNorm();
  };
  h.dH_du = sys.f;
  h.dH_dsigma = sys.phi;
  sys.hamiltonian = h;
  return sys;
}

/// Default anisotropic coefficient used throughout the catalog.
inline Mat default_anisotropy(int m) {
  if (m == 1) return Mat::Constant(1, 1, 2.0);
  Mat a(2, 2);
  a << 2.0, 1.0, 1.0, 3.0;
  return a;
}

/// phi = a sigma with SPD a, f = 0. H = s'as/2.
inline CanonicalSystem anisotropic_system(int m, std::optional<Mat> a_opt = std::nullopt) {
  Mat a = a_opt ? *a_opt : default_anisotropy(m);
  CanonicalSystem sys = linear_elliptic_system(a, 0.0, 0.0, 1);
  sys.label = "anisotropic";
  return sys;
}

/// phi = sigma, f = kappa sin(u). H = |sigma|^2/2 + kappa (1 - cos u).
inline CanonicalSystem semilinear_sine_system(int m, double kappa = 1.0) {
  CanonicalSystem sys;
  sys.m = m;
  sys.n = 1;
  const int mn = m;
  sys.phi = [](const Vec&, const Vec&, const Vec& s) { return s; };
  sys.f = [kappa](const Vec&, const Vec& u, const Vec&) {
    return Vec::Constant(1, kappa * std::sin(u(0))).eval();
  };
  sys.jac_phi_u = detail::const_mat(Mat::Zero(mn, 1));
  sys.jac_phi_sigma = detail::const_mat(Mat::Identity(mn, mn));
  sys.jac_f_u = [kappa](const Vec&, const Vec& u, const Vec&) {
    return Mat::Constant(1, 1, kappa * std::cos(u(0))).eval();
  };
  sys.jac_f_sigma = detail::const_mat(Mat::Zero(1, mn));
  std::ostringstream os;
  os << "semilinear_sine(kappa=" << kappa << ")";
  sys.label = os.str();
  HamiltonianDef h;
  h.H = [kappa](const Vec&, const Vec& u, const Vec& s) {
    return 0.5 * s.squaredNorm() + kappa * (1.0 - std::cos(u(0)));
  };
  h.dH_du = sys.f;
  h.dH_dsigma = sys.phi;
  sys.hamiltonian = h;
  return sys;
}

/// Two fields with quadratic coupling: phi = sigma, f = (u2, u1).
/// H = |sigma|^2/2 + u1 u2.
inline CanonicalSystem coupled_pair_system(int m) {
  CanonicalSystem sys;
  sys.m = m;
  sys.n = 2;
  const int mn = 2 * m;
  sys.phi = [](const Vec&, const Vec&, const Vec& s) { return s; };
  sys.f = [](const Vec&, const Vec& u, const Vec&) {
    Vec out(2);
    out << u(1), u(0);
    return out;
  };
  sys.jac_phi_u = detail::const_mat(Mat::Zero(mn, 2));
  sys.jac_phi_sigma = detail::const_mat(Mat::Identity(mn, mn));
  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  sys.jac_f_u = detail::const_mat(swap);
  sys.jac_f_sigma = detail::const_mat(Mat::Zero(2, mn));
  sys.label = "coupled_pair";
  HamiltonianDef h;
  h.H = [](const Vec&, const Vec& u, const Vec& s) { return 0.5 * s.squaredNorm() + u(0) * u(1); };
  h.dH_du = sys.f;
  h.dH_dsigma = sys.phi;
  sys.hamiltonian = h;
  return sys;
}

/// Non-Hamiltonian negative control: phi = sigma, f = (u2, 0).
/// The coefficient Jacobian has asymmetry exactly 1.
inline CanonicalSystem non_hamiltonian_control_system(int m) {
  CanonicalSystem sys;
  sys.m = m;
  sys.n = 2;
  const int mn = 2 * m;
  sys.phi = [](const Vec&, const Vec&, const Vec& s) { return s; };
  sys.f = [](const Vec&, const Vec& u, const Vec&) {
    Vec out(2);
    out << u(1), 0.0;
    return out;
  };
  sys.jac_phi_u = detail::const_mat(Mat::Zero(mn, 2));
  sys.jac_phi_sigma = detail::const_mat(Mat::Identity(mn, mn));
  Mat j(2, 2);
  j << 0, 1, 0, 0;
  sys.jac_f_u = detail::const_mat(j);
  sys.jac_f_sigma = detail::const_mat(Mat::Zero(2, mn));
  sys.label = "non_hamiltonian_control";
  return sys;
}

/// Catalog lookup by "name" or "name:key=value,key=value".
inline CanonicalSystem builtin_system(const std::string& spec, int m) {
  std::string name = spec;
  std::map<std::string, double> params;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    name = spec.substr(0, pos);
    std::istringstream rest(spec.substr(pos + 1));
    std::string kv;
    while (std::getline(rest, kv, ',')) {
      auto eq = kv.find('=');
      MSHDG_REQUIRE(eq != std::string::npos, "bad system parameter: " + kv);
      params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
  }
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "poisson") return poisson_system(m, get("f", 0.0));
  if (name == "linear_elliptic")
    return linear_elliptic_system(default_anisotropy(m), get("c", 1.0), get("f", 1.0));
  if (name == "anisotropic") return anisotropic_system(m);
  if (name == "semilinear_sine") return semilinear_sine_system(m, get("kappa", 1.0));
  if (name == "coupled_pair") return coupled_pair_system(m);
  if (name == "non_hamiltonian_control") return non_hamiltonian_control_system(m);
  throw std::runtime_error("unknown system: " + name);
}

}  // namespace mshdg
