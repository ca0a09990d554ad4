#include "mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace morphopt::mesh {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

std::array<int, 2> sorted_pair(int a, int b) { return a < b ? std::array{a, b} : std::array{b, a}; }

}  // namespace

TriMesh::TriMesh(std::vector<Point2> nodes, std::vector<std::array<int, 3>> cells,
                 std::vector<BoundaryEdge> boundary)
    : nodes_(std::move(nodes)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
  const int nv = num_nodes();
  for (const auto& p : nodes_) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw InvalidArgument("non-finite node coordinate");
  }
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& t = cells_[c];
    for (int v : t) {
      if (v < 0 || v >= nv) throw InvalidArgument("cell " + std::to_string(c) + " references missing node");
    }
    double a = signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
    if (a == 0.0) throw InvalidArgument("degenerate cell " + std::to_string(c));
    if (a < 0.0) std::swap(t[1], t[2]);
  }

  // Edge table: collect (edge key, cell, local edge), sort by key.
  struct Slot {
    std::array<int, 2> key;
    int cell;
    int local;
  };
  std::vector<Slot> slots;
  slots.reserve(3 * cells_.size());
  for (int c = 0; c < num_cells(); ++c) {
    const auto& t = cells_[c];
    for (int k = 0; k < 3; ++k) slots.push_back({sorted_pair(t[k], t[(k + 1) % 3]), c, k});
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.key != b.key ? a.key < b.key : a.cell < b.cell;
  });

  cell_edges_.assign(cells_.size(), {-1, -1, -1});
  std::vector<int> edge_count;
  std::vector<std::pair<int, int>> edge_owner;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i == 0 || slots[i].key != slots[i - 1].key) {
      edges_.push_back(slots[i].key);
      edge_count.push_back(0);
      edge_owner.emplace_back(slots[i].cell, slots[i].local);
    }
    const int e = num_edges() - 1;
    ++edge_count[e];
    if (edge_count[e] > 2) throw InvalidArgument("edge shared by more than two cells");
    cell_edges_[slots[i].cell][slots[i].local] = e;
  }

  auto find_edge = [&](std::array<int, 2> key) {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    return (it != edges_.end() && *it == key) ? static_cast<int>(it - edges_.begin()) : -1;
  };

  std::vector<char> tagged(edges_.size(), 0);
  boundary_cells_.reserve(boundary_.size());
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    const auto& be = boundary_[i];
    const int e = find_edge(sorted_pair(be.v[0], be.v[1]));
    if (e < 0) throw InvalidArgument("boundary edge " + std::to_string(i) + " is not a mesh edge");
    if (edge_count[e] != 1) throw InvalidArgument("boundary edge " + std::to_string(i) + " is interior");
    if (tagged[e]) throw InvalidArgument("boundary edge " + std::to_string(i) + " tagged twice");
    if (be.tag.empty()) throw InvalidArgument("boundary edge " + std::to_string(i) + " has empty tag");
    tagged[e] = 1;
    boundary_cells_.push_back(edge_owner[e]);
  }
  for (int e = 0; e < num_edges(); ++e) {
    if (edge_count[e] == 1 && !tagged[e]) {
      throw InvalidArgument("untagged boundary edge (" + std::to_string(edges_[e][0]) + "," +
                            std::to_string(edges_[e][1]) + ")");
    }
  }
}

double TriMesh::cell_area(int c) const {
  const auto& t = cells_[c];
  return signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int c = 0; c < num_cells(); ++c) sum += cell_area(c);
  return sum;
}

double TriMesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& e : edges_) h = std::max(h, (nodes_[e[0]] - nodes_[e[1]]).norm());
  return h;
}

std::vector<std::string> TriMesh::tags() const {
  std::set<std::string> s;
  for (const auto& be : boundary_) s.insert(be.tag);
  return {s.begin(), s.end()};
}

bool TriMesh::has_tag(const std::string& tag) const {
  return std::any_of(boundary_.begin(), boundary_.end(), [&](const BoundaryEdge& be) { return be.tag == tag; });
}

AffineCellMap affine_map(const TriMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.num_cells()) throw InvalidArgument("cell index out of range");
  const auto& t = mesh.cell(cell);
  const Point2& p0 = mesh.node(t[0]);
  AffineCellMap m;
  m.cell = cell;
  m.B.col(0) = mesh.node(t[1]) - p0;
  m.B.col(1) = mesh.node(t[2]) - p0;
  m.b = p0;
  if (!(std::abs(m.B.determinant()) > 0.0)) throw InvalidArgument("degenerate cell " + std::to_string(cell));
  return m;
}

Point2 Circle::project(const Point2& x) const {
  const Vec2 d = x - center;
  const double n = d.norm();
  if (!(n > 1e-14 * std::max(1.0, radius))) throw InvalidArgument("projection onto circle undefined at its center");
  return center + (radius / n) * d;
}

TriMesh generate_annulus(const Circle& inner, const Rect& outer, int n_theta, int n_r, double grading) {
  if (n_theta < 8) throw InvalidArgument("generate_annulus: n_theta must be >= 8");
  if (n_r < 2) throw InvalidArgument("generate_annulus: n_r must be >= 2");
  if (!(inner.radius > 0.0)) throw InvalidArgument("generate_annulus: radius must be positive");
  if (!(grading > 0.0)) throw InvalidArgument("generate_annulus: grading must be positive");
  const Point2& c = inner.center;
  const double r = inner.radius;
  if (c.x() - r <= outer.xmin || c.x() + r >= outer.xmax || c.y() - r <= outer.ymin || c.y() + r >= outer.ymax) {
    throw InvalidArgument("generate_annulus: circle intersects the outer boundary");
  }

  // Sides counterclockwise: right, top, left, bottom, each from its start corner.
  const std::array<Point2, 4> corners = {Point2(outer.xmax, outer.ymin), Point2(outer.xmax, outer.ymax),
                                         Point2(outer.xmin, outer.ymax), Point2(outer.xmin, outer.ymin)};
  std::array<double, 4> start_angle{}, span{};
  for (int s = 0; s < 4; ++s) {
    const Vec2 a = corners[s] - c, b = corners[(s + 1) % 4] - c;
    start_angle[s] = std::atan2(a.y(), a.x());
    double d = std::atan2(b.y(), b.x()) - start_angle[s];
    while (d <= 0.0) d += 2.0 * std::numbers::pi;
    span[s] = d;
  }

  // Largest-remainder apportionment of n_theta over the sides, at least one each.
  std::array<int, 4> segs{};
  std::array<double, 4> rem{};
  int used = 0;
  for (int s = 0; s < 4; ++s) {
    const double share = n_theta * span[s] / (2.0 * std::numbers::pi);
    segs[s] = std::max(1, static_cast<int>(std::floor(share)));
    rem[s] = share - std::floor(share);
    used += segs[s];
  }
  while (used < n_theta) {
    int best = static_cast<int>(std::max_element(rem.begin(), rem.end()) - rem.begin());
    ++segs[best];
    rem[best] = -1.0;
    ++used;
  }
  while (used > n_theta) {
    int best = static_cast<int>(std::max_element(segs.begin(), segs.end()) - segs.begin());
    --segs[best];
    --used;
  }

  std::vector<Point2> ring_outer, ring_inner;
  for (int s = 0; s < 4; ++s) {
    const Point2& p0 = corners[s];
    const Vec2 e = corners[(s + 1) % 4] - p0;
    for (int k = 0; k < segs[s]; ++k) {
      const double th = start_angle[s] + span[s] * k / segs[s];
      const Vec2 d(std::cos(th), std::sin(th));
      // Solve c + t d = p0 + u e for u.
      Mat2 M;
      M.col(0) = d;
      M.col(1) = -e;
      const Vec2 tu = M.lu().solve(p0 - c);
      const double u = std::clamp(tu.y(), 0.0, 1.0);
      const Point2 q = k == 0 ? p0 : Point2(p0 + u * e);
      ring_outer.push_back(q);
      ring_inner.push_back(c + r * (q - c).normalized());
    }
  }

  std::vector<double> t(n_r + 1);
  for (int i = 0; i <= n_r; ++i) {
    t[i] = grading == 1.0 ? static_cast<double>(i) / n_r
                          : (std::pow(grading, i) - 1.0) / (std::pow(grading, n_r) - 1.0);
  }

  std::vector<Point2> nodes;
  nodes.reserve(static_cast<std::size_t>(n_theta) * (n_r + 1));
  for (int i = 0; i <= n_r; ++i) {
    for (int j = 0; j < n_theta; ++j) nodes.push_back(ring_inner[j] + t[i] * (ring_outer[j] - ring_inner[j]));
  }
  auto id = [n_theta](int j, int i) { return i * n_theta + (j % n_theta); };

  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(n_theta) * n_r);
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const int a = id(j, i), b = id(j + 1, i), cc = id(j + 1, i + 1), d = id(j, i + 1);
      cells.push_back({a, b, cc});
      cells.push_back({a, cc, d});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int j = 0; j < n_theta; ++j) {
    boundary.push_back({{id(j, 0), id(j + 1, 0)}, "inner"});
    boundary.push_back({{id(j, n_r), id(j + 1, n_r)}, "outer"});
  }
  return TriMesh(std::move(nodes), std::move(cells), std::move(boundary));
}

TriMesh generate_rectangle(const Rect& rect, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidArgument("generate_rectangle: need at least one cell per axis");
  if (!(rect.width() > 0.0 && rect.height() > 0.0)) throw InvalidArgument("generate_rectangle: empty rectangle");
  std::vector<Point2> nodes;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      nodes.emplace_back(rect.xmin + rect.width() * i / nx, rect.ymin + rect.height() * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < nx; ++i) {
    boundary.push_back({{id(i, 0), id(i + 1, 0)}, "boundary"});
    boundary.push_back({{id(i, ny), id(i + 1, ny)}, "boundary"});
  }
  for (int j = 0; j < ny; ++j) {
    boundary.push_back({{id(0, j), id(0, j + 1)}, "boundary"});
    boundary.push_back({{id(nx, j), id(nx, j + 1)}, "boundary"});
  }
  return TriMesh(std::move(nodes), std::move(cells), std::move(boundary));
}

TriMesh retag(const TriMesh& mesh, const EdgeClassifier& classify) {
  std::vector<BoundaryEdge> boundary = mesh.boundary_edges();
  for (auto& be : boundary) be.tag = classify(mesh.node(be.v[0]), mesh.node(be.v[1]), be.tag);
  return TriMesh(mesh.nodes(), mesh.cells(), std::move(boundary));
}

TriMesh uniform_refine(const TriMesh& mesh, const BoundaryGeometry* snap) {
  const int nv = mesh.num_nodes();
  std::vector<Point2> nodes = mesh.nodes();
  nodes.reserve(nv + mesh.num_edges());
  for (const auto& e : mesh.edges()) nodes.push_back(0.5 * (mesh.node(e[0]) + mesh.node(e[1])));

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cell(c);
    const auto& ce = mesh.cell_edges(c);
    const int m01 = nv + ce[0], m12 = nv + ce[1], m20 = nv + ce[2];
    cells.push_back({t[0], m01, m20});
    cells.push_back({m01, t[1], m12});
    cells.push_back({m20, m12, t[2]});
    cells.push_back({m01, m12, m20});
  }

  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * mesh.boundary_edges().size());
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i) {
    const auto& be = mesh.boundary_edges()[i];
    const auto [cell, local] = mesh.boundary_edge_cell(i);
    const int m = nv + mesh.cell_edges(cell)[local];
    boundary.push_back({{be.v[0], m}, be.tag});
    boundary.push_back({{m, be.v[1]}, be.tag});
    if (snap) {
      if (auto it = snap->find(be.tag); it != snap->end()) nodes[m] = it->second.project(nodes[m]);
    }
  }
  return TriMesh(std::move(nodes), std::move(cells), std::move(boundary));
}

TriMesh uniform_refine(const TriMesh& mesh, int times, const BoundaryGeometry* snap) {
  TriMesh out = mesh;
  for (int i = 0; i < times; ++i) out = uniform_refine(out, snap);
  return out;
}

}  // namespace morphopt::mesh
