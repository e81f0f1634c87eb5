#pragma once

#include "ivem/chart.hpp"
#include "ivem/mesh.hpp"

#include <cstdint>
#include <vector>

namespace ivem {

/// Counterclockwise polygonal approximation of a chart domain.
///  - QuarterDisk: the origin followed by n_boundary_nodes points uniformly
///    spaced on the unit arc from (1,0) to (0,1).
///  - UnitDisk: n_boundary_nodes points uniformly spaced on the unit circle.
///  - UnitSquare: the four corners of [0,1]^2 with each side split into
///    max(1, n_boundary_nodes/4) segments.
std::vector<Vec2> domain_polygon(DomainKind domain, int n_boundary_nodes);

/// Quality-constrained Delaunay triangulation of the domain polygon.
/// The level-0 area target is |Ω|/30 and each level divides it by 4;
/// refinement also enforces a 20 degree minimum angle. New points land in
/// the interior or on existing boundary segments, never off the polyline.
PolyMesh generate_triangulation(DomainKind domain, int level, int n_boundary_nodes = 8);

struct VoronoiOptions {
  int lloyd_iterations = 100;
  /// Short edges subtending less than collapse_tolerance * 2π/n_v at a
  /// cell centroid are collapsed after relaxation; 0 disables.
  double collapse_tolerance = 0.1;
};

/// Centroidal Voronoi partition of the domain polygon with n_cells cells.
/// Seeds are drawn uniformly (mt19937_64 with the given seed, rejection
/// sampling) and moved to their clipped cell centroids by Lloyd iterations.
PolyMesh generate_voronoi_polymesh(DomainKind domain, Index n_cells, int n_boundary_nodes,
                                   std::uint64_t seed, const VoronoiOptions& options = {});

inline PolyMesh generate_voronoi_polymesh(DomainKind domain, Index n_cells,
                                          int n_boundary_nodes, std::uint64_t seed,
                                          int lloyd_iterations) {
  return generate_voronoi_polymesh(domain, n_cells, n_boundary_nodes, seed,
                                   VoronoiOptions{lloyd_iterations, 0.1});
}

}  // namespace ivem
