#include "doctest.h"

#include "spline/spline.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <random>

using namespace morphopt;
using namespace morphopt::spline;

namespace {

SplineGrid grid(int n, int p, mesh::Rect box = {-0.95, 0.95, -0.95, 0.95}) { return {box, n, n, p}; }

}  // namespace

TEST_CASE("build_spline_space: active counts") {
  CHECK(build_spline_space(grid(4, 2)).num_active() == 4);
  CHECK(build_spline_space(grid(4, 2)).dim() == 8);
  CHECK(build_spline_space(grid(4, 1)).num_active() == 9);
  CHECK(build_spline_space(grid(4, 1)).dim() == 18);
  CHECK(build_spline_space(grid(4, 3)).dim() == 2);
  CHECK_THROWS_AS(build_spline_space(grid(3, 3)), InvalidArgument);
  CHECK_THROWS_AS(build_spline_space(grid(1, 1)), InvalidArgument);
  CHECK_THROWS_AS(build_spline_space(grid(8, 4)), InvalidArgument);
}

TEST_CASE("cardinal B-spline values") {
  CHECK(cardinal_bspline(2, 1.5) == doctest::Approx(0.75));
  CHECK(cardinal_bspline(3, 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(cardinal_bspline(1, 1.0) == 1.0);
  CHECK(cardinal_bspline_derivative(1, 1.0) == 0.0);
}

TEST_CASE("eval_basis examples") {
  SUBCASE("hat peak") {
    const SplineSpace s = build_spline_space(grid(4, 1, {0, 4, 0, 4}));
    // active a=0 is anchored at (0,0); its peak sits at (1,1).
    const BasisValue b = s.eval_basis(0, Point2(1, 1));
    CHECK(b.value == doctest::Approx(1.0));
    CHECK(b.gradient.norm() == doctest::Approx(0.0));
  }
  SUBCASE("quadratic center") {
    const SplineSpace s = build_spline_space(grid(4, 2, {0, 4, 0, 4}));
    const BasisValue b = s.eval_basis(0, Point2(1.5, 1.5));
    CHECK(b.value == doctest::Approx(9.0 / 16.0));
  }
  SUBCASE("outside support") {
    const SplineSpace s = build_spline_space(grid(5, 1, {0, 5, 0, 5}));
    const BasisValue b = s.eval_basis(0, Point2(4.5, 4.5));
    CHECK(b.value == 0.0);
    CHECK(b.gradient.isZero(0.0));
  }
}

TEST_CASE("spline basis properties") {
  std::mt19937 rng(11);
  for (int p = 1; p <= 3; ++p) {
    const SplineSpace s = build_spline_space(grid(9, p, {0, 9, 0, 9}));
    std::uniform_real_distribution<double> interior(p, 9 - p);
    std::uniform_real_distribution<double> all(0, 9);
    for (int k = 0; k < 200; ++k) {
      // Partition of unity of the full basis away from the box boundary.
      const Point2 x(interior(rng), interior(rng));
      double sum = 0.0;
      for (int iy = -p; iy < 9; ++iy)
        for (int ix = -p; ix < 9; ++ix) sum += s.eval_full_basis(ix, iy, x).value;
      CHECK(std::abs(sum - 1.0) <= 1e-12);

      // Nonnegativity and agreement of for_each_active with eval_basis.
      const Point2 y(all(rng), all(rng));
      Vector direct = Vector::Zero(s.num_active());
      for (int a = 0; a < s.num_active(); ++a) {
        direct[a] = s.eval_basis(a, y).value;
        CHECK(direct[a] >= 0.0);
      }
      Vector visited = Vector::Zero(s.num_active());
      s.for_each_active(y, [&](int a, const BasisValue& bv) { visited[a] = bv.value; });
      CHECK((direct - visited).norm() <= 1e-15);
    }
  }
}

TEST_CASE("active basis vanishes on the box boundary") {
  for (int p = 1; p <= 3; ++p) {
    const SplineSpace s = build_spline_space(grid(7, p));
    for (int k = 0; k <= 40; ++k) {
      const double t = -0.95 + 1.9 * k / 40;
      for (const Point2& x : {Point2(t, -0.95), Point2(t, 0.95), Point2(-0.95, t), Point2(0.95, t)}) {
        for (int a = 0; a < s.num_active(); ++a) CHECK(s.eval_basis(a, x).value == 0.0);
      }
    }
  }
}

TEST_CASE("C1 continuity across knot lines for p >= 2") {
  for (int p = 2; p <= 3; ++p) {
    const double knot = 3.0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      for (int shift = 0; shift <= p; ++shift) {
        const double t = knot - shift;
        const double jump = cardinal_bspline_derivative(p, t + eps) - cardinal_bspline_derivative(p, t - eps);
        CHECK(std::abs(jump) <= 4.0 * eps);
      }
    }
  }
}

TEST_CASE("eval_field: linearity and unit vectors") {
  const SplineSpace s = build_spline_space(grid(8, 2));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> box(-0.95, 0.95), coef(-1, 1);
  Vector u(s.dim()), v(s.dim());
  for (int k = 0; k < s.dim(); ++k) {
    u[k] = coef(rng);
    v[k] = coef(rng);
  }
  const double alpha = 0.7, beta = -1.3;
  const Vector w = alpha * u + beta * v;
  CHECK(s.eval_field(Vector::Zero(s.dim()), Point2(0.1, 0.2)).isZero(0.0));
  for (int k = 0; k < 100; ++k) {
    const Point2 x(box(rng), box(rng));
    const Vec2 lhs = s.eval_field(w, x);
    const Vec2 rhs = alpha * s.eval_field(u, x) + beta * s.eval_field(v, x);
    CHECK((lhs - rhs).norm() <= 1e-13);
  }
  for (int k = 0; k < s.dim(); ++k) {
    Vector e = Vector::Zero(s.dim());
    e[k] = 1.0;
    const Point2 x(box(rng), box(rng));
    Mat2 J;
    const Vec2 f = s.eval_field(e, x, &J);
    const BasisValue b = s.eval_basis(k / 2, x);
    CHECK(f[k % 2] == doctest::Approx(b.value));
    CHECK(f[1 - k % 2] == 0.0);
    CHECK((J.row(k % 2).transpose() - b.gradient).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(s.eval_field(Vector::Zero(3), Point2(0, 0)), InvalidArgument);
}

TEST_CASE("gram_h1: structure and SPD") {
  for (int p = 1; p <= 3; ++p) {
    const SplineSpace s = build_spline_space(grid(9, p));
    const SparseMatrix K = gram_h1(s);
    const Eigen::MatrixXd D(K);
    CHECK((D - D.transpose()).norm() <= 1e-13 * D.norm());
    Eigen::SimplicialLLT<SparseMatrix> llt(K);
    CHECK(llt.info() == Eigen::Success);
    for (int k = 0; k < s.dim(); ++k) {
      for (int l = 0; l < s.dim(); ++l) {
        if (k % 2 != l % 2) CHECK(D(k, l) == 0.0);
        const auto [ax, ay] = s.active_index(k / 2);
        const auto [bx, by] = s.active_index(l / 2);
        if (std::abs(ax - bx) > p || std::abs(ay - by) > p) CHECK(D(k, l) == 0.0);
      }
    }
  }
}

TEST_CASE("gram_h1: brute-force midpoint oracle") {
  // Midpoint rule on an m x m grid over the whole box, combined over m and 2m
  // so the h^2 error term of the piecewise-polynomial integrand cancels.
  auto midpoint = [](const SplineSpace& s, int m) {
    const auto& g = s.grid();
    const double dx = g.box.width() / m, dy = g.box.height() / m;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s.num_active(), s.num_active());
    std::vector<std::pair<int, BasisValue>> vals;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const Point2 x(g.box.xmin + (i + 0.5) * dx, g.box.ymin + (j + 0.5) * dy);
        vals.clear();
        s.for_each_active(x, [&](int a, const BasisValue& bv) { vals.emplace_back(a, bv); });
        for (const auto& [a, va] : vals)
          for (const auto& [b, vb] : vals)
            G(a, b) += (va.gradient.dot(vb.gradient) + va.value * vb.value) * dx * dy;
      }
    }
    return G;
  };
  auto oracle = [&](const SplineSpace& s) { return ((4.0 * midpoint(s, 1000) - midpoint(s, 500)) / 3.0).eval(); };

  for (int p = 1; p <= 2; ++p) {
    const SplineSpace s = build_spline_space(grid(4 + p, p, {0, 1, 0, 1.5}));
    const Eigen::MatrixXd K(gram_h1(s));
    const Eigen::MatrixXd G = oracle(s);
    for (int a = 0; a < s.num_active(); ++a) {
      for (int b = 0; b < s.num_active(); ++b) {
        for (int c = 0; c < 2; ++c) {
          const double k = K(2 * a + c, 2 * b + c);
          if (G(a, b) == 0.0) {
            CHECK(k == 0.0);
          } else {
            CHECK(std::abs(k - G(a, b)) <= 1e-6 * std::abs(G(a, b)));
          }
        }
      }
    }
  }
  SUBCASE("interior hat diagonal, n=4 p=1") {
    const SplineSpace s = build_spline_space(grid(4, 1));
    const Eigen::MatrixXd K(gram_h1(s));
    const Eigen::MatrixXd G = oracle(s);
    const int center = 4;  // active (1,1): the hat centered in the box
    CHECK(std::abs(K(2 * center, 2 * center) - G(center, center)) <= 1e-6 * G(center, center));
  }
}
