#include "ivem/mesh.hpp"

#include "ivem/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace ivem {

namespace {

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross2(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  const auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
}

}  // namespace

PolygonGeometry polygon_geometry(std::span<const Vec2> v) {
  PolygonGeometry g;
  const std::size_t n = v.size();
  if (n < 3) return g;
  // Shift to the first vertex to limit cancellation.
  const Vec2 o = v[0];
  double a2 = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = v[i] - o, q = v[(i + 1) % n] - o;
    const double w = cross2(p, q);
    a2 += w;
    c += w * (p + q);
  }
  g.area = 0.5 * a2;
  g.centroid = (a2 != 0.0) ? Vec2(o + c / (3.0 * a2)) : o;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) g.diameter = std::max(g.diameter, (v[i] - v[j]).norm());
  }
  return g;
}

bool is_simple_polygon(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

PolyMesh::PolyMesh(std::vector<Vec2> vertices, std::vector<std::vector<Index>> cells,
                   std::optional<std::vector<Index>> boundary_vertices)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const Index nv = n_vertices();
  std::vector<bool> used(nv, false);

  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    if (cell.size() < 3) {
      throw TopologyError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    }
    for (Index i : cell) {
      if (i < 0 || i >= nv) {
        throw TopologyError("cell " + std::to_string(c) + " references vertex " + std::to_string(i) +
                            " out of range");
      }
      used[i] = true;
    }
    auto sorted = cell;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw TopologyError("cell " + std::to_string(c) + " repeats a vertex");
    }
    auto pts = cell_vertices(static_cast<Index>(c));
    if (!is_simple_polygon(pts)) {
      throw TopologyError("cell " + std::to_string(c) + " is not a simple polygon");
    }
    const double area = polygon_geometry(pts).area;
    if (area == 0.0) throw TopologyError("cell " + std::to_string(c) + " has zero area");
    if (area < 0.0) {
      std::reverse(cell.begin(), cell.end());
      warnings_.push_back("cell " + std::to_string(c) + " was clockwise and has been reoriented");
    }
  }
  for (Index i = 0; i < nv; ++i) {
    if (!used[i]) throw TopologyError("vertex " + std::to_string(i) + " is not used by any cell");
  }

  std::unordered_map<std::uint64_t, Index> edge_id;
  edge_id.reserve(cells_.size() * 4);
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& cell = cells_[c];
    cell_edges_[c].resize(cell.size());
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const Index a = cell[i], b = cell[(i + 1) % cell.size()];
      const Index lo = std::min(a, b), hi = std::max(a, b);
      const std::uint64_t key = static_cast<std::uint64_t>(lo) * static_cast<std::uint64_t>(nv) +
                                static_cast<std::uint64_t>(hi);
      auto [it, inserted] = edge_id.try_emplace(key, static_cast<Index>(edges_.size()));
      if (inserted) {
        MeshEdge e;
        e.v = {lo, hi};
        edges_.push_back(e);
      }
      MeshEdge& e = edges_[it->second];
      const Index ci = static_cast<Index>(c);
      if (inserted) {
        e.left = ci;
      } else if (e.right == kNoCell) {
        e.right = ci;
      } else {
        throw TopologyError("edge (" + std::to_string(lo) + ", " + std::to_string(hi) +
                            ") is shared by more than two cells");
      }
      cell_edges_[c][i] = it->second;
    }
  }

  // Orientation consistency: the two cells of an interior edge traverse it
  // in opposite directions. Normalize so that `left` is the forward cell.
  std::vector<int> forward_count(edges_.size(), 0);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (std::size_t i = 0; i < cells_[c].size(); ++i) {
      if (cell_edge_forward(static_cast<Index>(c), i)) ++forward_count[cell_edges_[c][i]];
    }
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    MeshEdge& edge = edges_[e];
    if (edge.right == kNoCell) continue;
    if (forward_count[e] != 1) {
      throw TopologyError("cells sharing edge (" + std::to_string(edge.v[0]) + ", " +
                          std::to_string(edge.v[1]) + ") have inconsistent orientation");
    }
    // Find which of the two cells is forward.
    const auto& lc = cells_[edge.left];
    bool left_forward = false;
    for (std::size_t i = 0; i < lc.size(); ++i) {
      if (cell_edges_[edge.left][i] == static_cast<Index>(e)) left_forward = cell_edge_forward(edge.left, i);
    }
    if (!left_forward) std::swap(edge.left, edge.right);
  }

  boundary_vertex_.assign(nv, false);
  if (boundary_vertices) {
    for (Index i : *boundary_vertices) {
      if (i < 0 || i >= nv) throw TopologyError("boundary vertex index out of range");
      boundary_vertex_[i] = true;
    }
  } else {
    for (const auto& e : edges_) {
      if (e.on_boundary()) boundary_vertex_[e.v[0]] = boundary_vertex_[e.v[1]] = true;
    }
  }

  for (Index c = 0; c < n_cells(); ++c) h_ = std::max(h_, cell_geometry(c).diameter);
}

bool PolyMesh::cell_edge_forward(Index c, std::size_t i) const {
  const auto& cell = cells_[c];
  return cell[i] < cell[(i + 1) % cell.size()];
}

std::vector<Vec2> PolyMesh::cell_vertices(Index c) const {
  std::vector<Vec2> pts;
  pts.reserve(cells_[c].size());
  for (Index i : cells_[c]) pts.push_back(vertices_[i]);
  return pts;
}

PolygonGeometry PolyMesh::cell_geometry(Index c) const { return polygon_geometry(cell_vertices(c)); }

double PolyMesh::total_area() const {
  double a = 0.0;
  for (Index c = 0; c < n_cells(); ++c) a += cell_geometry(c).area;
  return a;
}

std::uint64_t PolyMesh::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& v : vertices_) {
    fnv_mix(h, &v.x(), sizeof(double));
    fnv_mix(h, &v.y(), sizeof(double));
  }
  for (const auto& cell : cells_) {
    const std::uint64_t n = cell.size();
    fnv_mix(h, &n, sizeof(n));
    for (Index i : cell) fnv_mix(h, &i, sizeof(i));
  }
  return h;
}

PolygonGeometry cell_geometry(const PolyMesh& mesh, Index cell) {
  if (cell < 0 || cell >= mesh.n_cells()) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  }
  return mesh.cell_geometry(cell);
}

PolyMesh parse_mesh_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mesh JSON: ") + e.what());
  }
  std::vector<Vec2> vertices;
  std::vector<std::vector<Index>> cells;
  std::optional<std::vector<Index>> boundary;
  try {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("cells")) {
      throw ParseError("mesh JSON must be an object with \"vertices\" and \"cells\"");
    }
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 2) throw ParseError("each vertex must be [x, y]");
      vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    for (const auto& c : j.at("cells")) cells.push_back(c.get<std::vector<Index>>());
    if (j.contains("boundary_vertices")) boundary = j.at("boundary_vertices").get<std::vector<Index>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mesh JSON: ") + e.what());
  }
  return PolyMesh(std::move(vertices), std::move(cells), std::move(boundary));
}

PolyMesh import_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mesh_json(ss.str());
}

std::string mesh_to_json(const PolyMesh& mesh) {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) verts.push_back({v.x(), v.y()});
  j["cells"] = mesh.cells();
  std::vector<Index> boundary;
  for (Index i = 0; i < mesh.n_vertices(); ++i) {
    if (mesh.boundary_vertex_flags()[i]) boundary.push_back(i);
  }
  j["boundary_vertices"] = boundary;
  return j.dump();
}

void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write mesh file " + path.string());
  out << mesh_to_json(mesh) << '\n';
}

bool RegularityReport::all_star_shaped() const {
  return std::all_of(star_shaped_flags.begin(), star_shaped_flags.end(), [](bool b) { return b; });
}

RegularityReport regularity_report(const PolyMesh& mesh) {
  RegularityReport r;
  r.rho_estimate = std::numeric_limits<double>::infinity();
  r.min_edge_over_hP = std::numeric_limits<double>::infinity();
  r.edge_ratio = 1.0;
  r.star_shaped_flags.resize(mesh.n_cells());
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto pts = mesh.cell_vertices(c);
    const auto geo = polygon_geometry(pts);
    // Signed distance from the centroid to every edge line: all positive
    // means the centroid sees the whole boundary, and the smallest one is
    // the radius of the largest centered disk inside the kernel.
    double inradius = std::numeric_limits<double>::infinity();
    double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 e = pts[(i + 1) % pts.size()] - pts[i];
      const double len = e.norm();
      emin = std::min(emin, len);
      emax = std::max(emax, len);
      inradius = std::min(inradius, cross2(e, geo.centroid - pts[i]) / len);
    }
    r.star_shaped_flags[c] = inradius > 0.0;
    r.rho_estimate = std::min(r.rho_estimate, inradius / geo.diameter);
    r.edge_ratio = std::max(r.edge_ratio, emax / emin);
    r.min_edge_over_hP = std::min(r.min_edge_over_hP, emin / geo.diameter);
  }
  return r;
}

}  // namespace ivem
