#include "fem/quadrature.hpp"

namespace morphopt::fem {

namespace {

// Builders take area-normalized weights (sum 1) and barycentric orbits.
struct RuleBuilder {
  QuadratureRule rule;

  void bary(double l0, double l1, double l2, double w) {
    rule.points.emplace_back(l1, l2);
    rule.weights.push_back(0.5 * w);
    (void)l0;
  }
  void centroid(double w) { bary(1.0 / 3, 1.0 / 3, 1.0 / 3, w); }
  void orbit3(double a, double w) {
    const double b = 1.0 - 2.0 * a;
    bary(b, a, a, w);
    bary(a, b, a, w);
    bary(a, a, b, w);
  }
  void orbit6(double a, double b, double w) {
    const double c = 1.0 - a - b;
    bary(a, b, c, w);
    bary(a, c, b, w);
    bary(b, a, c, w);
    bary(b, c, a, w);
    bary(c, a, b, w);
    bary(c, b, a, w);
  }
};

std::vector<QuadratureRule> make_rules() {
  std::vector<QuadratureRule> rules;
  {
    RuleBuilder r;
    r.centroid(1.0);
    r.rule.degree = 1;
    rules.push_back(r.rule);
  }
  {
    RuleBuilder r;
    r.orbit3(1.0 / 6.0, 1.0 / 3.0);
    r.rule.degree = 2;
    rules.push_back(r.rule);
  }
  {  // Dunavant, 6 points
    RuleBuilder r;
    r.orbit3(0.445948490915965, 0.223381589678011);
    r.orbit3(0.091576213509771, 0.109951743655322);
    r.rule.degree = 4;
    rules.push_back(r.rule);
  }
  {  // Dunavant, 12 points
    RuleBuilder r;
    r.orbit3(0.249286745170910, 0.116786275726379);
    r.orbit3(0.063089014491502, 0.050844906370207);
    r.orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374);
    r.rule.degree = 6;
    rules.push_back(r.rule);
  }
  {  // Dunavant, 16 points
    RuleBuilder r;
    r.centroid(0.144315607677787);
    r.orbit3(0.459292588292723, 0.095091634267285);
    r.orbit3(0.170569307751760, 0.103217370534718);
    r.orbit3(0.050547228317031, 0.032458497623198);
    r.orbit6(0.008394777409958, 0.263112829634638, 0.027230314174435);
    r.rule.degree = 8;
    rules.push_back(r.rule);
  }
  return rules;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
  static const std::vector<QuadratureRule> rules = make_rules();
  for (const auto& r : rules) {
    if (r.degree >= degree) return r;
  }
  throw InvalidArgument("no triangle quadrature rule of degree " + std::to_string(degree));
}

RefBasis reference_basis(int degree, const Point2& xhat) {
  const double l0 = 1.0 - xhat.x() - xhat.y(), l1 = xhat.x(), l2 = xhat.y();
  const Vec2 g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
  RefBasis b;
  if (degree == 1) {
    b.n = 3;
    b.values = {l0, l1, l2};
    b.grads = {g0, g1, g2};
  } else if (degree == 2) {
    b.n = 6;
    b.values = {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0};
    b.grads = {(4 * l0 - 1) * g0, (4 * l1 - 1) * g1, (4 * l2 - 1) * g2,
               4 * (l1 * g0 + l0 * g1), 4 * (l2 * g1 + l1 * g2), 4 * (l0 * g2 + l2 * g0)};
  } else {
    throw InvalidArgument("finite element degree must be 1 or 2");
  }
  return b;
}

const std::vector<Point2>& reference_nodes(int degree) {
  static const std::vector<Point2> p1 = {Point2(0, 0), Point2(1, 0), Point2(0, 1)};
  static const std::vector<Point2> p2 = {Point2(0, 0),   Point2(1, 0),     Point2(0, 1),
                                         Point2(0.5, 0), Point2(0.5, 0.5), Point2(0, 0.5)};
  if (degree == 1) return p1;
  if (degree == 2) return p2;
  throw InvalidArgument("finite element degree must be 1 or 2");
}

}  // namespace morphopt::fem
