#pragma once

#include "ivem/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ivem {

/// Incremental Bowyer-Watson triangulation.
///
/// Two flavours share the insertion kernel:
///  - `delaunay(points)` triangulates a point cloud inside an enclosing super
///    triangle; the super vertices stay in the structure so every real
///    vertex has a closed ring of triangles (used for Voronoi duals).
///  - `convex_polygon(polygon)` triangulates a strictly convex polygon and
///    removes the super triangle; polygon edges become hard boundary edges
///    (neighbor -1) that cavities never cross. Points can then be inserted
///    in the interior or on a boundary edge.
///
/// Public vertex ids exclude the three super vertices.
class Triangulation {
 public:
  static Triangulation delaunay(std::span<const Vec2> points);
  static Triangulation convex_polygon(std::span<const Vec2> polygon);

  /// Inserts a point inside the triangulated region. Returns its vertex id,
  /// or -1 if the point lies outside (constrained mode only).
  Index insert(const Vec2& p);

  /// Splits boundary edge `edge` of triangle `tri` at p (p on that edge).
  Index insert_on_boundary(const Vec2& p, Index tri, int edge);

  /// Triangle containing p (walk from the last touched triangle), or -1.
  Index locate(const Vec2& p) const;

  Index n_vertices() const { return static_cast<Index>(points_.size()) - 3; }
  const Vec2& point(Index v) const { return points_[v + 3]; }
  bool is_super(Index v) const { return v < 0; }

  /// Triangle slots; dead slots are skipped by `alive`.
  Index n_triangle_slots() const { return static_cast<Index>(tris_.size()); }
  bool alive(Index t) const { return tris_[t].alive; }
  /// Public vertex id at slot i of triangle t (super vertices are -3..-1).
  Index tri_vertex(Index t, int i) const { return tris_[t].v[i] - 3; }
  /// Neighbor across the edge opposite slot i, -1 on a boundary.
  Index tri_neighbor(Index t, int i) const { return tris_[t].n[i]; }

  /// Live triangles whose vertices are all real.
  std::vector<std::array<Index, 3>> triangles() const;

  /// Live triangles around vertex v in counterclockwise order. For interior
  /// vertices the ring is closed; for constrained-boundary vertices it runs
  /// from one boundary edge to the other.
  std::vector<Index> vertex_ring(Index v) const;

  /// Live triangle having the directed or undirected edge (a, b), with the
  /// local index of the edge (opposite vertex slot), or {-1, -1}.
  std::pair<Index, int> find_edge(Index a, Index b) const;

  Vec2 circumcenter(Index tri) const;

 private:
  struct Triangle {
    std::array<Index, 3> v{};  // internal ids, counterclockwise
    std::array<Index, 3> n{};  // n[i] is across the edge opposite v[i]
    bool alive = false;
  };

  Triangulation() = default;

  Index internal(Index v) const { return v + 3; }
  const Vec2& ipoint(Index iv) const { return points_[iv]; }
  bool in_circle(Index t, const Vec2& p) const;
  Index add_point(const Vec2& p);
  Index new_triangle(Index a, Index b, Index c);
  Index insert_with_cavity(Index vp, Index start, Index split_tri, int split_edge);

  std::vector<Vec2> points_;
  std::vector<Triangle> tris_;
  std::vector<Index> free_;
  std::vector<Index> vertex_tri_;  // some live triangle touching each vertex (internal ids)
  mutable std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  mutable Index last_ = 0;
  bool constrained_ = false;
};

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// > 0 when d lies strictly inside the circle through counterclockwise a, b, c.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace ivem
