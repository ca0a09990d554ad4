#include "fem/fe_space.hpp"

#include <algorithm>

namespace morphopt::fem {

FeSpace::FeSpace(std::shared_ptr<const mesh::TriMesh> mesh, int degree, int components)
    : mesh_(std::move(mesh)), degree_(degree), components_(components) {
  if (!mesh_) throw InvalidArgument("FeSpace: null mesh");
  if (degree != 1 && degree != 2) throw InvalidArgument("finite element degree must be 1 or 2");
  if (components != 1 && components != 2) throw InvalidArgument("FeSpace: components must be 1 or 2");
  const auto& m = *mesh_;
  const int nv = m.num_nodes();
  const int n = degree == 1 ? nv : nv + m.num_edges();
  coords_.resize(n);
  support_.assign(n, {-1, -1});
  for (int i = 0; i < nv; ++i) coords_[i] = m.node(i);
  if (degree == 2) {
    for (int e = 0; e < m.num_edges(); ++e) {
      coords_[nv + e] = 0.5 * (m.node(m.edges()[e][0]) + m.node(m.edges()[e][1]));
    }
  }
  const int k = dofs_per_cell();
  cell_dofs_.resize(static_cast<std::size_t>(m.num_cells()) * k);
  for (int c = 0; c < m.num_cells(); ++c) {
    int* d = cell_dofs_.data() + static_cast<std::size_t>(c) * k;
    for (int j = 0; j < 3; ++j) d[j] = m.cell(c)[j];
    if (degree == 2) {
      for (int j = 0; j < 3; ++j) d[3 + j] = nv + m.cell_edges(c)[j];
    }
    for (int j = 0; j < k; ++j) {
      if (support_[d[j]].first < 0) support_[d[j]] = {c, j};
    }
  }
  for (int i = 0; i < static_cast<int>(m.boundary_edges().size()); ++i) {
    const auto& be = m.boundary_edges()[i];
    auto& list = boundary_[be.tag];
    list.push_back(be.v[0]);
    list.push_back(be.v[1]);
    if (degree == 2) {
      const auto [cell, local] = m.boundary_edge_cell(i);
      list.push_back(nv + m.cell_edges(cell)[local]);
    }
  }
  for (auto& [tag, list] : boundary_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

const std::vector<int>& FeSpace::boundary_dofs(const std::string& tag) const {
  auto it = boundary_.find(tag);
  if (it == boundary_.end()) throw InvalidArgument("unknown boundary tag '" + tag + "'");
  return it->second;
}

}  // namespace morphopt::fem
