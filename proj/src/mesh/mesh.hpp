#pragma once

#include "common/types.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace morphopt::mesh {

struct BoundaryEdge {
  std::array<int, 2> v;
  std::string tag;
};

/// Simplicial triangulation of a polygonal domain with tagged boundary edges.
///
/// Cells are stored counterclockwise; clockwise input is reoriented on
/// construction. The constructor also builds the edge table (edges sorted by
/// their vertex pair) and checks that the tagged boundary edges are exactly the
/// edges owned by a single cell.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Point2> nodes, std::vector<std::array<int, 3>> cells,
          std::vector<BoundaryEdge> boundary);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const Point2& node(int i) const { return nodes_[i]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  /// Edge vertex pairs, v[0] < v[1].
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Local edge k of a cell joins local vertices k and (k+1)%3.
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  /// For boundary edge i: (owning cell, local edge index).
  const std::pair<int, int>& boundary_edge_cell(int i) const { return boundary_cells_[i]; }

  double cell_area(int c) const;
  double total_area() const;
  /// Longest edge length.
  double max_edge_length() const;
  /// Sorted, de-duplicated list of boundary tags.
  std::vector<std::string> tags() const;
  bool has_tag(const std::string& tag) const;

 private:
  std::vector<Point2> nodes_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::pair<int, int>> boundary_cells_;
};

/// G_K(x̂) = B x̂ + b, mapping the reference triangle (0,0),(1,0),(0,1) onto a cell.
struct AffineCellMap {
  int cell = -1;
  Mat2 B = Mat2::Identity();
  Vec2 b = Vec2::Zero();

  Point2 map(const Point2& ref) const { return B * ref + b; }
  Point2 inverse(const Point2& x) const { return B.lu().solve(x - b); }
  double det() const { return B.determinant(); }
};

AffineCellMap affine_map(const TriMesh& mesh, int cell);

struct Circle {
  Point2 center = Point2::Zero();
  double radius = 1.0;

  Point2 project(const Point2& x) const;
};

struct Rect {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Point2& p, double tol = 0.0) const {
    return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol &&
           p.y() <= ymax + tol;
  }
};

/// Analytic description of the curved parts of a boundary, keyed by tag.
/// Tags not listed are treated as polygonal.
using BoundaryGeometry = std::map<std::string, Circle>;

/// Structured mesh between a circle (tag "inner") and an enclosing rectangle
/// (tag "outer"). Points are placed along rays from the circle center; each
/// rectangle side receives a share of the n_theta angular segments matching
/// its angular span, so the four corners are mesh vertices. Radial layers are
/// uniform when grading == 1 and geometric with ratio `grading` otherwise.
TriMesh generate_annulus(const Circle& inner, const Rect& outer, int n_theta, int n_r,
                         double grading = 1.0);

/// Structured nx-by-ny rectangle, every quad split along its diagonal. All
/// boundary edges carry the tag "boundary"; use retag() to split it.
TriMesh generate_rectangle(const Rect& rect, int nx, int ny);

/// Reassigns boundary tags. The classifier receives the edge endpoints and the
/// current tag and returns the new tag.
using EdgeClassifier =
    std::function<std::string(const Point2&, const Point2&, const std::string&)>;
TriMesh retag(const TriMesh& mesh, const EdgeClassifier& classify);

/// Splits every cell into four through its edge midpoints. New vertex for edge
/// e gets index num_nodes() + e. Midpoints of boundary edges whose tag appears
/// in `snap` are projected onto that curve.
TriMesh uniform_refine(const TriMesh& mesh, const BoundaryGeometry* snap = nullptr);

TriMesh uniform_refine(const TriMesh& mesh, int times, const BoundaryGeometry* snap = nullptr);

// --- Gmsh MSH 2.2 ASCII -------------------------------------------------------

/// Maps physical group ids onto boundary tags.
using TagDictionary = std::map<int, std::string>;

/// Reads line (type 1) and triangle (type 2) elements. Line elements become
/// boundary edges tagged through `tags`; when an id is not in the dictionary,
/// a $PhysicalNames entry is used if the file has one.
TriMesh parse_msh(std::istream& in, const TagDictionary& tags = {});
TriMesh parse_msh_file(const std::string& path, const TagDictionary& tags = {});

/// Writes nodes with 17 significant digits. Physical ids are assigned in
/// sorted tag order starting at 1 (returned), triangles use id 0.
TagDictionary write_msh(std::ostream& out, const TriMesh& mesh);

// --- VTK legacy ASCII -----------------------------------------------------------

struct PointField {
  std::string name;
  int components = 1;  // 1 or 2
  std::vector<double> values;  // components * num_nodes
};

/// Writes an UNSTRUCTURED_GRID of linear triangles (cell type 5). `points`
/// replaces the mesh node coordinates when non-empty (deformed configuration).
void write_vtk(std::ostream& out, const TriMesh& mesh, const std::vector<Point2>& points,
               const std::vector<PointField>& fields, const std::string& title = "morphopt");

}  // namespace morphopt::mesh
