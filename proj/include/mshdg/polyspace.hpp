#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mshdg/common.hpp"

namespace mshdg {

enum class BasisKind { p_scalar, p_vector, rt };

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return static_cast<int>(v);
}

/// Dimension of the local polynomial spaces used by the method catalog.
inline int space_dim(BasisKind kind, int r, int d) {
  MSHDG_REQUIRE(r >= 0, "polynomial degree must be nonnegative");
  MSHDG_REQUIRE(d == 1 || d == 2, "unsupported space dimension");
  switch (kind) {
    case BasisKind::p_scalar:
      return binomial(r + d, d);
    case BasisKind::p_vector:
      return d * binomial(r + d, d);
    case BasisKind::rt:
      return d == 2 ? (r + 1) * (r + 3) : r + 2;
  }
  throw std::runtime_error("unsupported basis kind");
}

/// Gauss--Legendre nodes and weights on [0, 1].
inline std::pair<Vec, Vec> gauss_legendre(int npts) {
  MSHDG_REQUIRE(npts >= 1 && npts <= 64, "unsupported Gauss rule size");
  Vec x(npts), w(npts);
  const int n = npts;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n over [-1, 1], cosine initial guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x(i) = 0.5 * (1.0 - z);
    x(n - 1 - i) = 0.5 * (1.0 + z);
    w(i) = 1.0 / ((1.0 - z * z) * pp * pp);
    w(n - 1 - i) = w(i);
  }
  return {x, w};
}

/// Quadrature on the reference point / segment [0,1] / triangle {x,y>=0, x+y<=1}.
/// Points are stored in barycentric coordinates; weights sum to the reference measure.
struct QuadratureRule {
  int sim_dim = 0;
  int degree = 0;       // requested exactness
  Mat bary;             // npts x (sim_dim+1)
  Vec weights;

  int size() const { return static_cast<int>(weights.size()); }

  /// Reference Cartesian coordinates (npts x sim_dim).
  Mat ref_points() const {
    Mat p(size(), sim_dim);
    for (int q = 0; q < size(); ++q)
      for (int c = 0; c < sim_dim; ++c) p(q, c) = bary(q, c + 1);
    return p;
  }
};

inline QuadratureRule quadrature_rule(int sim_dim, int target_degree) {
  MSHDG_REQUIRE(target_degree >= 0 && target_degree <= 24, "quadrature degree out of supported range");
  QuadratureRule rule;
  rule.sim_dim = sim_dim;
  rule.degree = target_degree;
  if (sim_dim == 0) {
    rule.bary = Mat::Ones(1, 1);
    rule.weights = Vec::Ones(1);
    return rule;
  }
  if (sim_dim == 1) {
    auto [x, w] = gauss_legendre((target_degree + 2) / 2);
    rule.bary.resize(x.size(), 2);
    rule.weights = w;
    for (int q = 0; q < x.size(); ++q) {
      rule.bary(q, 0) = 1.0 - x(q);
      rule.bary(q, 1) = x(q);
    }
    return rule;
  }
  MSHDG_REQUIRE(sim_dim == 2, "unsupported simplex dimension");
  // Collapsed tensor rule: x = a(1-b), y = b, Jacobian (1-b).
  auto [xa, wa] = gauss_legendre((target_degree + 2) / 2);
  auto [xb, wb] = gauss_legendre((target_degree + 3) / 2);
  const int np = static_cast<int>(xa.size() * xb.size());
  rule.bary.resize(np, 3);
  rule.weights.resize(np);
  int q = 0;
  for (int i = 0; i < xa.size(); ++i)
    for (int j = 0; j < xb.size(); ++j, ++q) {
      const double x = xa(i) * (1.0 - xb(j));
      const double y = xb(j);
      rule.bary(q, 0) = 1.0 - x - y;
      rule.bary(q, 1) = x;
      rule.bary(q, 2) = y;
      rule.weights(q) = wa(i) * wb(j) * (1.0 - xb(j));
    }
  return rule;
}

namespace detail {

/// Monomial exponent list for P_r in d dimensions, ordered by total degree.
inline std::vector<std::array<int, 2>> monomial_exponents(int r, int d) {
  std::vector<std::array<int, 2>> exps;
  if (d == 1) {
    for (int i = 0; i <= r; ++i) exps.push_back({i, 0});
  } else {
    for (int k = 0; k <= r; ++k)
      for (int j = 0; j <= k; ++j) exps.push_back({k - j, j});
  }
  return exps;
}

inline double mono_value(const std::array<int, 2>& e, int d, const double* x) {
  double v = std::pow(x[0], e[0]);
  if (d == 2) v *= std::pow(x[1], e[1]);
  return v;
}

inline double mono_deriv(const std::array<int, 2>& e, int d, int comp, const double* x) {
  std::array<int, 2> f = e;
  if (f[comp] == 0) return 0.0;
  const double c = f[comp];
  f[comp] -= 1;
  return c * mono_value(f, d, x);
}

inline Mat monomial_values(const std::vector<std::array<int, 2>>& exps, int d, const Mat& pts) {
  Mat v(exps.size(), pts.rows());
  for (int q = 0; q < pts.rows(); ++q) {
    double x[2] = {pts(q, 0), d == 2 ? pts(q, 1) : 0.0};
    for (std::size_t i = 0; i < exps.size(); ++i) v(i, q) = mono_value(exps[i], d, x);
  }
  return v;
}

inline Mat monomial_derivs(const std::vector<std::array<int, 2>>& exps, int d, int comp, const Mat& pts) {
  Mat v(exps.size(), pts.rows());
  for (int q = 0; q < pts.rows(); ++q) {
    double x[2] = {pts(q, 0), d == 2 ? pts(q, 1) : 0.0};
    for (std::size_t i = 0; i < exps.size(); ++i) v(i, q) = mono_deriv(exps[i], d, comp, x);
  }
  return v;
}

}  // namespace detail

/// Scalar polynomial basis on a reference simplex, either L2-orthonormal
/// ("modal") or Lagrange on the principal lattice ("nodal").
///
/// Degrees above 4 are rejected unless explicitly overridden; the default
/// construction guarantees Gram condition numbers below 1e8 only up to r = 4.
class ScalarBasis {
 public:
  static ScalarBasis modal(int r, int d, bool allow_high_degree = false) {
    ScalarBasis b(r, d, allow_high_degree);
    auto quad = quadrature_rule(d, 2 * r);
    Mat mv = detail::monomial_values(b.exps_, d, quad.ref_points());
    Mat gram = mv * quad.weights.asDiagonal() * mv.transpose();
    Eigen::LLT<Mat> llt(gram);
    MSHDG_REQUIRE(llt.info() == Eigen::Success, "monomial Gram matrix not positive definite");
    b.coeffs_ = llt.matrixL().solve(Mat::Identity(b.size_, b.size_));
    return b;
  }

  static ScalarBasis nodal(int r, int d, bool allow_high_degree = false) {
    ScalarBasis b(r, d, allow_high_degree);
    b.nodes_.resize(b.size_, d);
    for (int i = 0; i < b.size_; ++i)
      for (int c = 0; c < d; ++c)
        b.nodes_(i, c) = r == 0 ? 1.0 / (d + 1) : static_cast<double>(b.exps_[i][c]) / r;
    Mat vand = detail::monomial_values(b.exps_, d, b.nodes_);  // mono x node
    Eigen::PartialPivLU<Mat> lu(vand.transpose());
    b.coeffs_ = lu.solve(Mat::Identity(b.size_, b.size_)).transpose();
    b.has_nodes_ = true;
    return b;
  }

  int size() const { return size_; }
  int degree() const { return degree_; }
  int dim() const { return dim_; }

  /// Lattice nodes (nodal basis only), size x d.
  const Mat& nodes() const {
    MSHDG_REQUIRE(has_nodes_, "basis has no nodes (modal)");
    return nodes_;
  }

  /// Lattice multi-indices; node i sits at exps[i]/r.
  const std::vector<std::array<int, 2>>& multi_indices() const { return exps_; }

  /// Values at reference points: size x npts.
  Mat values(const Mat& ref_pts) const {
    return coeffs_ * detail::monomial_values(exps_, dim_, ref_pts);
  }

  /// Reference-coordinate gradients, one (size x npts) matrix per component.
  std::vector<Mat> ref_gradients(const Mat& ref_pts) const {
    std::vector<Mat> g;
    for (int c = 0; c < dim_; ++c)
      g.push_back(coeffs_ * detail::monomial_derivs(exps_, dim_, c, ref_pts));
    return g;
  }

 private:
  ScalarBasis(int r, int d, bool allow_high_degree) : degree_(r), dim_(d) {
    MSHDG_REQUIRE(d == 1 || d == 2, "unsupported dimension");
    MSHDG_REQUIRE(r >= 0, "negative degree");
    MSHDG_REQUIRE(allow_high_degree || r <= 4, "degree above 4 not supported by default conditioning guarantee");
    exps_ = detail::monomial_exponents(r, d);
    size_ = static_cast<int>(exps_.size());
  }

  int degree_, dim_, size_ = 0;
  std::vector<std::array<int, 2>> exps_;
  Mat coeffs_;  // size x n_monomials
  Mat nodes_;
  bool has_nodes_ = false;
};

/// Raviart--Thomas basis [P_r]^d + x P_r on a physical cell.
///
/// The componentwise members use the modal scalar basis in reference
/// coordinates; the x-weighted members multiply homogeneous reference
/// monomials by the physical position, so normal traces on straight facets
/// have degree <= r (x.n is constant on a facet).
class RtBasis {
 public:
  RtBasis(int r, int d, bool allow_high_degree = false)
      : degree_(r), dim_(d), scalar_(ScalarBasis::modal(r, d, allow_high_degree)) {
    MSHDG_REQUIRE(d == 1 || d == 2, "unsupported dimension");
    if (d == 2)
      for (int j = 0; j <= r; ++j) homog_.push_back({r - j, j});
    else
      homog_.push_back({r, 0});
    size_ = d * scalar_.size() + static_cast<int>(homog_.size());
  }

  int size() const { return size_; }
  int degree() const { return degree_; }

  /// Evaluate at reference points under the affine map x = x0 + J xi.
  /// comp_values: d matrices (size x npts); divergence: physical divergence.
  void eval(const Vec& x0, const Mat& jac, const Mat& inv_jac, const Mat& ref_pts,
            std::vector<Mat>& comp_values, Mat& divergence) const {
    const int np = static_cast<int>(ref_pts.rows());
    const int ns = scalar_.size();
    Mat sval = scalar_.values(ref_pts);
    std::vector<Mat> sgrad = scalar_.ref_gradients(ref_pts);
    comp_values.assign(dim_, Mat::Zero(size_, np));
    divergence = Mat::Zero(size_, np);
    for (int mu = 0; mu < dim_; ++mu) {
      comp_values[mu].block(mu * ns, 0, ns, np) = sval;
      for (int c = 0; c < dim_; ++c)
        divergence.block(mu * ns, 0, ns, np) += inv_jac(c, mu) * sgrad[c];
    }
    // x-weighted homogeneous members
    Mat hval = detail::monomial_values(homog_, dim_, ref_pts);
    std::vector<Mat> hgrad;
    for (int c = 0; c < dim_; ++c) hgrad.push_back(detail::monomial_derivs(homog_, dim_, c, ref_pts));
    for (std::size_t h = 0; h < homog_.size(); ++h) {
      const int row = dim_ * ns + static_cast<int>(h);
      for (int q = 0; q < np; ++q) {
        Vec x = x0 + jac * ref_pts.row(q).transpose();
        double div = dim_ * hval(h, q);
        for (int mu = 0; mu < dim_; ++mu) {
          comp_values[mu](row, q) = x(mu) * hval(h, q);
          for (int c = 0; c < dim_; ++c) div += x(mu) * inv_jac(c, mu) * hgrad[c](h, q);
        }
        divergence(row, q) = div;
      }
    }
  }

 private:
  int degree_, dim_, size_;
  ScalarBasis scalar_;
  std::vector<std::array<int, 2>> homog_;
};

/// 1-D Lagrange basis on [0,1] with k+1 equispaced nodes (midpoint for k=0).
/// Used for facet trace spaces.
class FacetLagrange {
 public:
  explicit FacetLagrange(int k) : degree_(k) {
    MSHDG_REQUIRE(k >= 0 && k <= 8, "unsupported facet degree");
    nodes_.resize(k + 1);
    for (int i = 0; i <= k; ++i) nodes_(i) = k == 0 ? 0.5 : static_cast<double>(i) / k;
    Mat vand(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) vand(i, j) = std::pow(nodes_(i), j);
    coeffs_ = vand.inverse().transpose();  // basis_i(t) = sum_j coeffs(i,j) t^j
  }

  int size() const { return degree_ + 1; }
  const Vec& nodes() const { return nodes_; }

  /// Values at parameters t: size x npts.
  Mat values(const Vec& t) const {
    Mat v(size(), t.size());
    for (int q = 0; q < t.size(); ++q) {
      double p = 1.0;
      Vec powers(size());
      for (int j = 0; j < size(); ++j, p *= t(q)) powers(j) = p;
      v.col(q) = coeffs_ * powers;
    }
    return v;
  }

 private:
  int degree_;
  Vec nodes_;
  Mat coeffs_;
};

}  // namespace mshdg
