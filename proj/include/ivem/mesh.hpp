#pragma once

#include "ivem/types.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ivem {

struct PolygonGeometry {
  double area = 0.0;  // signed; positive for counterclockwise
  Vec2 centroid = Vec2::Zero();
  double diameter = 0.0;
};

PolygonGeometry polygon_geometry(std::span<const Vec2> vertices);
bool is_simple_polygon(std::span<const Vec2> vertices);

/// Undirected mesh edge; v[0] < v[1]. `left` is the cell that traverses the
/// edge from v[0] to v[1] counterclockwise, `right` the other one, or
/// kNoCell on the boundary (where the single cell is stored in `left`).
struct MeshEdge {
  std::array<Index, 2> v{};
  Index left = kNoCell;
  Index right = kNoCell;

  bool on_boundary() const { return right == kNoCell; }
};

/// Immutable polygonal mesh of a planar chart domain. Cells are stored
/// counterclockwise; construction derives edges and boundary flags and
/// validates the topology.
class PolyMesh {
 public:
  PolyMesh() = default;

  /// Throws TopologyError on out-of-range indices, duplicate vertices in a
  /// cell, self-intersecting or degenerate cells, non-manifold edges and
  /// dangling vertices. Clockwise cells are reversed and a warning is
  /// appended to `warnings()`.
  PolyMesh(std::vector<Vec2> vertices, std::vector<std::vector<Index>> cells,
           std::optional<std::vector<Index>> boundary_vertices = std::nullopt);

  Index n_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index n_cells() const { return static_cast<Index>(cells_.size()); }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::vector<Index>>& cells() const { return cells_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  const std::vector<bool>& boundary_vertex_flags() const { return boundary_vertex_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Global edge id of local edge i of cell c (from vertex i to vertex i+1).
  Index cell_edge(Index c, std::size_t i) const { return cell_edges_[c][i]; }
  /// True when the cell traverses the edge from its lower to its higher
  /// vertex index.
  bool cell_edge_forward(Index c, std::size_t i) const;

  std::vector<Vec2> cell_vertices(Index c) const;
  PolygonGeometry cell_geometry(Index c) const;

  /// Maximum cell diameter.
  double h() const { return h_; }
  double total_area() const;

  /// Order-dependent FNV-1a hash of the vertex coordinates and cell lists.
  std::uint64_t checksum() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::vector<Index>> cells_;
  std::vector<MeshEdge> edges_;
  std::vector<std::vector<Index>> cell_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<std::string> warnings_;
  double h_ = 0.0;
};

/// (area, centroid, diameter) of one cell.
PolygonGeometry cell_geometry(const PolyMesh& mesh, Index cell);

PolyMesh import_mesh(const std::filesystem::path& path);
PolyMesh parse_mesh_json(const std::string& text);
std::string mesh_to_json(const PolyMesh& mesh);
void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path);

struct RegularityReport {
  double rho_estimate = 0.0;      // min over cells of inradius-about-centroid / h_P
  double edge_ratio = 1.0;        // max over cells of longest / shortest edge
  double min_edge_over_hP = 1.0;  // min over cells of shortest edge / h_P
  std::vector<bool> star_shaped_flags;

  bool all_star_shaped() const;
};

RegularityReport regularity_report(const PolyMesh& mesh);

}  // namespace ivem
