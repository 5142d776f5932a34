#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mshdg/polyspace.hpp"

using namespace mshdg;

namespace {

double factorial(int k) {
  double v = 1.0;
  for (int i = 2; i <= k; ++i) v *= i;
  return v;
}

// int_T x^a y^b over the reference triangle {x,y>=0, x+y<=1}
double tri_monomial_integral(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

Mat single_point(double x, double y) {
  Mat p(1, 2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("space dimensions") {
  CHECK(space_dim(BasisKind::p_scalar, 2, 2) == 6);
  CHECK(space_dim(BasisKind::p_scalar, 0, 2) == 1);
  CHECK(space_dim(BasisKind::p_scalar, 3, 1) == 4);
  CHECK(space_dim(BasisKind::p_vector, 1, 2) == 6);
  CHECK(space_dim(BasisKind::rt, 0, 2) == 3);
  CHECK(space_dim(BasisKind::rt, 1, 2) == 8);
  CHECK(space_dim(BasisKind::rt, 1, 1) == 3);
  CHECK_THROWS(space_dim(BasisKind::p_scalar, 1, 3));
}

TEST_CASE("1-D Gauss rules") {
  auto rule = quadrature_rule(1, 3);
  REQUIRE(rule.size() == 2);
  // integrate x^3 on [0,1]
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) s += rule.weights(q) * std::pow(rule.bary(q, 1), 3);
  CHECK(s == Catch::Approx(0.25).margin(1e-15));
  for (int d = 0; d <= 24; ++d) {
    auto r = quadrature_rule(1, d);
    CHECK(r.weights.minCoeff() > 0.0);
    for (int k = 0; k <= d; ++k) {
      double acc = 0.0;
      for (int q = 0; q < r.size(); ++q) acc += r.weights(q) * std::pow(r.bary(q, 1), k);
      CHECK(acc == Catch::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle quadrature") {
  auto rule = quadrature_rule(2, 2);
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) s += rule.weights(q) * rule.bary(q, 1) * rule.bary(q, 2);
  CHECK(s == Catch::Approx(1.0 / 24.0).margin(1e-15));

  auto r12 = quadrature_rule(2, 12);
  double s66 = 0.0;
  for (int q = 0; q < r12.size(); ++q)
    s66 += r12.weights(q) * std::pow(r12.bary(q, 1), 6) * std::pow(r12.bary(q, 2), 6);
  CHECK(s66 == Catch::Approx(tri_monomial_integral(6, 6)).epsilon(1e-13));

  // exactness sweep over all monomials up to the requested degree
  for (int d : {1, 4, 9, 16, 24}) {
    auto r = quadrature_rule(2, d);
    CHECK(r.weights.sum() == Catch::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double acc = 0.0;
        for (int q = 0; q < r.size(); ++q)
          acc += r.weights(q) * std::pow(r.bary(q, 1), a) * std::pow(r.bary(q, 2), b);
        REQUIRE(std::abs(acc - tri_monomial_integral(a, b)) <= 1e-13 * std::abs(tri_monomial_integral(a, b)) + 1e-16);
      }
  }
  CHECK_THROWS(quadrature_rule(2, 25));
}

TEST_CASE("nodal basis Kronecker property") {
  for (int d : {1, 2})
    for (int r = 1; r <= 4; ++r) {
      auto basis = ScalarBasis::nodal(r, d);
      Mat vals = basis.values(basis.nodes());
      CHECK(inf_norm(vals - Mat::Identity(basis.size(), basis.size())) < 1e-10);
    }
}

TEST_CASE("nodal P1 functions are the barycentric coordinates") {
  auto basis = ScalarBasis::nodal(1, 2);
  Mat p = single_point(0.31, 0.22);
  Mat v = basis.values(p);
  CHECK(v(0, 0) == Catch::Approx(1.0 - 0.31 - 0.22).margin(1e-14));
  CHECK(v(1, 0) == Catch::Approx(0.31).margin(1e-14));
  CHECK(v(2, 0) == Catch::Approx(0.22).margin(1e-14));
}

TEST_CASE("modal basis is orthonormal") {
  for (int d : {1, 2})
    for (int r = 0; r <= 4; ++r) {
      auto basis = ScalarBasis::modal(r, d);
      auto quad = quadrature_rule(d, 2 * r);
      Mat v = basis.values(quad.ref_points());
      Mat gram = v * quad.weights.asDiagonal() * v.transpose();
      CHECK(inf_norm(gram - Mat::Identity(basis.size(), basis.size())) < 1e-12);
    }
}

TEST_CASE("partition of unity") {
  for (int r = 1; r <= 4; ++r) {
    auto basis = ScalarBasis::nodal(r, 2);
    auto quad = quadrature_rule(2, 2 * r + 6);
    Mat v = basis.values(quad.ref_points());
    Vec sums = v.colwise().sum();
    CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("tabulated gradients match finite differences") {
  const double step = 1e-5;
  for (int r = 1; r <= 4; ++r) {
    auto basis = ScalarBasis::nodal(r, 2);
    Mat pts(3, 2);
    pts << 0.21, 0.17, 0.4, 0.35, 0.12, 0.55;
    auto grads = basis.ref_gradients(pts);
    for (int c = 0; c < 2; ++c) {
      Mat pp = pts, pm = pts;
      pp.col(c).array() += step;
      pm.col(c).array() -= step;
      Mat fd = (basis.values(pp) - basis.values(pm)) / (2.0 * step);
      CHECK(inf_norm(fd - grads[c]) / std::max(1.0, inf_norm(grads[c])) < 1e-6);
    }
  }
}

TEST_CASE("degree cap") {
  CHECK_THROWS(ScalarBasis::nodal(5, 2));
  CHECK_NOTHROW(ScalarBasis::nodal(5, 2, true));
}

namespace {

// Evaluate RT basis on the reference triangle (identity map).
void rt_reference_eval(const RtBasis& rt, const Mat& pts, std::vector<Mat>& comp, Mat& div) {
  Vec x0 = Vec::Zero(2);
  Mat jac = Mat::Identity(2, 2);
  rt.eval(x0, jac, jac, pts, comp, div);
}

// Reference triangle facets: 0 = hypotenuse, 1 = {x=0}, 2 = {y=0}.
void ref_facet_points(int lf, const Vec& t, Mat& pts, Vec& normal) {
  pts.resize(t.size(), 2);
  normal.resize(2);
  for (int q = 0; q < t.size(); ++q) {
    switch (lf) {
      case 0: pts.row(q) << 1.0 - t(q), t(q); break;
      case 1: pts.row(q) << 0.0, t(q); break;
      case 2: pts.row(q) << t(q), 0.0; break;
    }
  }
  if (lf == 0) normal << M_SQRT1_2, M_SQRT1_2;
  if (lf == 1) normal << -1.0, 0.0;
  if (lf == 2) normal << 0.0, -1.0;
}

}  // namespace

TEST_CASE("RT normal traces have degree <= r") {
  for (int r = 0; r <= 3; ++r) {
    RtBasis rt(r, 2);
    // sample the normal trace at r+1 Lagrange nodes, then check the
    // interpolant reproduces it at off-node points
    FacetLagrange lag(r);
    Vec tcheck(5);
    tcheck << 0.05, 0.3, 0.51, 0.77, 0.93;
    for (int lf = 0; lf < 3; ++lf) {
      Mat node_pts, check_pts;
      Vec normal, dummy;
      ref_facet_points(lf, lag.nodes(), node_pts, normal);
      ref_facet_points(lf, tcheck, check_pts, dummy);
      std::vector<Mat> cn, cc;
      Mat divn, divc;
      rt_reference_eval(rt, node_pts, cn, divn);
      rt_reference_eval(rt, check_pts, cc, divc);
      Mat trace_nodes = cn[0] * normal(0) + cn[1] * normal(1);   // size x (r+1)
      Mat trace_check = cc[0] * normal(0) + cc[1] * normal(1);
      Mat interp = trace_nodes * lag.values(tcheck);             // size x 5
      CHECK(inf_norm(interp - trace_check) < 1e-12);
      if (r == 0) {
        for (int i = 0; i < rt.size(); ++i)
          CHECK(std::abs(trace_check(i, 0) - trace_check(i, 4)) < 1e-13);
      }
    }
  }
}

TEST_CASE("RT in 1-D spans P_{r+1}") {
  RtBasis rt(1, 1);
  CHECK(rt.size() == 3);
  Mat pts(4, 1);
  pts << 0.1, 0.35, 0.6, 0.9;
  std::vector<Mat> comp;
  Mat div;
  Vec x0 = Vec::Zero(1);
  Mat jac = Mat::Identity(1, 1);
  rt.eval(x0, jac, jac, pts, comp, div);
  // solve for coefficients reproducing {1, x, x^2} at 4 points
  Mat vand(4, 3);
  for (int q = 0; q < 4; ++q) vand.row(q) = comp[0].col(q).transpose();
  for (int mono = 0; mono <= 2; ++mono) {
    Vec target(4);
    for (int q = 0; q < 4; ++q) target(q) = std::pow(pts(q, 0), mono);
    Vec c = vand.colPivHouseholderQr().solve(target);
    CHECK((vand * c - target).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("RT containment P_r^2 in RT_r in P_{r+1}^2") {
  for (int r = 0; r <= 2; ++r) {
    RtBasis rt(r, 2);
    auto quad = quadrature_rule(2, 2 * (r + 2));
    std::vector<Mat> comp;
    Mat div;
    rt_reference_eval(rt, quad.ref_points(), comp, div);
    const int nq = quad.size();

    // stack component samples as rows of a big matrix: member -> R^{2 nq}
    Mat rt_samples(rt.size(), 2 * nq);
    rt_samples << comp[0], comp[1];

    auto project_residual = [&](const Vec& target) {
      // least squares onto span of rt_samples rows, weighted by quadrature
      Vec w2(2 * nq);
      w2 << quad.weights, quad.weights;
      Mat a = rt_samples * w2.asDiagonal() * rt_samples.transpose();
      Vec b = rt_samples * w2.asDiagonal() * target;
      Vec c = a.ldlt().solve(b);
      return std::sqrt((target - rt_samples.transpose() * c).dot(w2.asDiagonal() * (target - rt_samples.transpose() * c)));
    };

    // every P_r^2 monomial field lies in RT_r
    auto scal = ScalarBasis::modal(r, 2);
    Mat sval = scal.values(quad.ref_points());
    for (int mu = 0; mu < 2; ++mu)
      for (int i = 0; i < scal.size(); ++i) {
        Vec target = Vec::Zero(2 * nq);
        target.segment(mu * nq, nq) = sval.row(i).transpose();
        CHECK(project_residual(target) < 1e-12);
      }

    // every RT_r member lies in P_{r+1}^2
    auto scal1 = ScalarBasis::modal(r + 1, 2, true);
    Mat s1 = scal1.values(quad.ref_points());
    Mat p1_samples(2 * scal1.size(), 2 * nq);
    p1_samples.setZero();
    p1_samples.block(0, 0, scal1.size(), nq) = s1;
    p1_samples.block(scal1.size(), nq, scal1.size(), nq) = s1;
    Vec w2(2 * nq);
    w2 << quad.weights, quad.weights;
    Mat a = p1_samples * w2.asDiagonal() * p1_samples.transpose();
    for (int i = 0; i < rt.size(); ++i) {
      Vec target(2 * nq);
      target << comp[0].row(i).transpose(), comp[1].row(i).transpose();
      Vec b = p1_samples * w2.asDiagonal() * target;
      Vec c = a.ldlt().solve(b);
      CHECK((target - p1_samples.transpose() * c).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("Gram condition numbers stay below 1e8 up to degree 4") {
  for (int d : {1, 2})
    for (int r = 0; r <= 4; ++r) {
      auto basis = ScalarBasis::nodal(r, d);
      auto quad = quadrature_rule(d, 2 * r);
      Mat v = basis.values(quad.ref_points());
      Mat gram = v * quad.weights.asDiagonal() * v.transpose();
      Eigen::SelfAdjointEigenSolver<Mat> es(gram);
      CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() < 1e8);
    }
  for (int r = 0; r <= 4; ++r) {
    RtBasis rt(r, 2);
    auto quad = quadrature_rule(2, 2 * (r + 2));
    std::vector<Mat> comp;
    Mat div;
    rt_reference_eval(rt, quad.ref_points(), comp, div);
    Mat gram = comp[0] * quad.weights.asDiagonal() * comp[0].transpose() +
               comp[1] * quad.weights.asDiagonal() * comp[1].transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() < 1e8);
  }
}

TEST_CASE("facet Lagrange basis") {
  FacetLagrange lag(2);
  Vec t = lag.nodes();
  Mat v = lag.values(t);
  CHECK(inf_norm(v - Mat::Identity(3, 3)) < 1e-13);
  FacetLagrange l0(0);
  Vec tt(2);
  tt << 0.2, 0.9;
  CHECK(inf_norm(l0.values(tt) - Mat::Ones(1, 2)) < 1e-15);
}
