#pragma once

#include "common/types.hpp"
#include "mesh/mesh.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace morphopt::fem {

/// Lagrange P1/P2 space with 1 or 2 components on a TriMesh.
///
/// Scalar dofs: vertices first (index = vertex), then for P2 one dof per edge
/// (index = V + edge). Vector dofs interleave components: 2*i + c.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const mesh::TriMesh> mesh, int degree, int components);

  const mesh::TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const mesh::TriMesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int num_scalar_dofs() const { return static_cast<int>(coords_.size()); }
  int num_dofs() const { return components_ * num_scalar_dofs(); }
  int dofs_per_cell() const { return degree_ == 1 ? 3 : 6; }

  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * dofs_per_cell(),
            static_cast<std::size_t>(dofs_per_cell())};
  }
  int dof(int scalar, int component) const { return components_ * scalar + component; }

  /// Dof coordinates in the initial configuration.
  const Point2& dof_coord(int i) const { return coords_[i]; }
  const std::vector<Point2>& dof_coords() const { return coords_; }
  /// One (cell, local index) pair carrying scalar dof i.
  std::pair<int, int> dof_support(int i) const { return support_[i]; }

  /// Sorted scalar dofs on boundary edges with this tag. Throws on unknown tags.
  const std::vector<int>& boundary_dofs(const std::string& tag) const;

  /// Structural compatibility: same mesh object, degree and components.
  bool same_as(const FeSpace& other) const {
    return mesh_ == other.mesh_ && degree_ == other.degree_ && components_ == other.components_;
  }

 private:
  std::shared_ptr<const mesh::TriMesh> mesh_;
  int degree_;
  int components_;
  std::vector<int> cell_dofs_;
  std::vector<Point2> coords_;
  std::vector<std::pair<int, int>> support_;
  std::map<std::string, std::vector<int>> boundary_;
};

/// Coefficients of a field on a space plus the space it lives on.
struct FeField {
  std::shared_ptr<const FeSpace> space;
  Vector coeffs;
};

}  // namespace morphopt::fem
