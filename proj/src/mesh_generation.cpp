#include "ivem/mesh_generation.hpp"

#include "ivem/delaunay.hpp"
#include "ivem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

namespace ivem {

namespace {

constexpr double kPi = std::numbers::pi;

double min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  const auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::abs(cross2(u, v)), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

bool inside_convex(std::span<const Vec2> poly, const Vec2& p, double margin) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (cross2(b - a, p - a) <= margin * (b - a).norm()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Delaunay refinement

struct Refiner {
  Triangulation tri;
  std::vector<std::pair<Index, Index>> segments;
  double max_area;
  double min_angle_rad;

  Refiner(std::span<const Vec2> poly, double max_area_, double min_angle_deg)
      : tri(Triangulation::convex_polygon(poly)),
        max_area(max_area_),
        min_angle_rad(min_angle_deg * kPi / 180.0) {
    const Index n = static_cast<Index>(poly.size());
    for (Index i = 0; i < n; ++i) segments.emplace_back(i, (i + 1) % n);
  }

  bool encroached_by(std::size_t s, const Vec2& p) const {
    const auto [a, b] = segments[s];
    return (tri.point(a) - p).dot(tri.point(b) - p) < 0.0;
  }

  bool apex_encroaches(std::size_t s) const {
    const auto [a, b] = segments[s];
    const auto [t, i] = tri.find_edge(a, b);
    if (t < 0) throw GenerationError("boundary segment lost during refinement");
    return encroached_by(s, tri.point(tri.tri_vertex(t, i)));
  }

  void split(std::size_t s, std::vector<std::size_t>& work) {
    const auto [a, b] = segments[s];
    const auto [t, i] = tri.find_edge(a, b);
    const Vec2 mid = 0.5 * (tri.point(a) + tri.point(b));
    const Index v = tri.insert_on_boundary(mid, t, i);
    segments[s] = {a, v};
    segments.emplace_back(v, b);
    work.push_back(s);
    work.push_back(segments.size() - 1);
  }

  void drain(std::vector<std::size_t>& work) {
    while (!work.empty()) {
      const std::size_t s = work.back();
      work.pop_back();
      if (apex_encroaches(s)) split(s, work);
    }
  }

  bool bad(Index t) const {
    const Vec2& a = tri.point(tri.tri_vertex(t, 0));
    const Vec2& b = tri.point(tri.tri_vertex(t, 1));
    const Vec2& c = tri.point(tri.tri_vertex(t, 2));
    return 0.5 * cross2(b - a, c - a) > max_area || min_angle(a, b, c) < min_angle_rad;
  }

  void run(Index max_vertices) {
    std::vector<std::size_t> work;
    for (std::size_t s = 0; s < segments.size(); ++s) work.push_back(s);
    drain(work);
    for (bool changed = true; changed;) {
      changed = false;
      for (Index t = 0; t < tri.n_triangle_slots(); ++t) {
        if (!tri.alive(t) || !bad(t)) continue;
        const Vec2 c = tri.circumcenter(t);
        for (std::size_t s = 0, n = segments.size(); s < n; ++s) {
          if (encroached_by(s, c)) work.push_back(s);
        }
        if (!work.empty()) {
          // Split every segment the circumcenter would encroach instead.
          std::vector<std::size_t> hit;
          hit.swap(work);
          for (std::size_t s : hit) split(s, work);
        } else if (tri.locate(c) >= 0) {
          tri.insert(c);
        } else {
          throw GenerationError("circumcenter outside the domain without encroachment");
        }
        drain(work);
        changed = true;
        if (tri.n_vertices() > max_vertices) {
          throw GenerationError("triangulation refinement exceeded the vertex budget");
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Voronoi helpers

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t n = 1u << 16;
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0 ? 1 : 0;
    const std::uint32_t ry = (y & s) > 0 ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

std::vector<std::size_t> spatial_order(const std::vector<Vec2>& pts) {
  Vec2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = 65535.0 / std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-300});
  std::vector<std::uint64_t> key(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    key[i] = hilbert_index(static_cast<std::uint32_t>((pts[i].x() - lo.x()) * scale),
                           static_cast<std::uint32_t>((pts[i].y() - lo.y()) * scale));
  }
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return order;
}

// Sutherland-Hodgman clip of a convex polygon against a convex polygon.
// Segment-line intersections are computed from lexicographically ordered
// endpoints so a shared Voronoi edge yields the same point in both cells.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, std::span<const Vec2> clip) {
  std::vector<Vec2> out = subject, in;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2& A = clip[i];
    const Vec2& B = clip[(i + 1) % clip.size()];
    const Vec2 dir = B - A;
    const auto side = [&](const Vec2& p) { return cross2(dir, p - A); };
    in.swap(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2& P = in[j];
      const Vec2& Q = in[(j + 1) % in.size()];
      const double sp = side(P), sq = side(Q);
      if (sp >= 0.0) out.push_back(P);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const bool swap = Q.x() < P.x() || (Q.x() == P.x() && Q.y() < P.y());
        const Vec2& U = swap ? Q : P;
        const Vec2& V = swap ? P : Q;
        const double su = swap ? sq : sp, sv = swap ? sp : sq;
        const double t = su / (su - sv);
        Vec2 X = U + t * (V - U);
        // Snap onto the clip line to keep boundary vertices collinear.
        const double len2 = dir.squaredNorm();
        X = A + dir * ((X - A).dot(dir) / len2);
        out.push_back(X);
      }
    }
  }
  return out;
}

struct ClippedCells {
  std::vector<std::vector<Vec2>> cells;
};

ClippedCells clipped_voronoi(const std::vector<Vec2>& seeds, std::span<const Vec2> domain) {
  const auto order = spatial_order(seeds);
  std::vector<Vec2> sorted(seeds.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = seeds[order[i]];
  const Triangulation tri = Triangulation::delaunay(sorted);
  if (tri.n_vertices() != static_cast<Index>(seeds.size())) {
    throw GenerationError("coincident Voronoi seeds");
  }
  std::vector<Vec2> centers(tri.n_triangle_slots());
  std::vector<char> have(tri.n_triangle_slots(), 0);
  ClippedCells out;
  out.cells.resize(seeds.size());
  std::vector<Vec2> ring;
  for (std::size_t i = 0; i < order.size(); ++i) {
    ring.clear();
    for (Index t : tri.vertex_ring(static_cast<Index>(i))) {
      if (!have[t]) {
        centers[t] = tri.circumcenter(t);
        have[t] = 1;
      }
      ring.push_back(centers[t]);
    }
    out.cells[order[i]] = clip_convex(ring, domain);
  }
  return out;
}

// Global vertex merge on a uniform hash grid with tolerance tol.
class PointMerger {
 public:
  explicit PointMerger(double tol) : tol_(tol) {}

  Index add(const Vec2& p) {
    const auto kx = static_cast<std::int64_t>(std::floor(p.x() / tol_));
    const auto ky = static_cast<std::int64_t>(std::floor(p.y() / tol_));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid_.find(key(kx + dx, ky + dy));
        if (it == grid_.end()) continue;
        for (Index v : it->second) {
          if ((points_[v] - p).norm() <= tol_) return v;
        }
      }
    }
    const Index v = static_cast<Index>(points_.size());
    points_.push_back(p);
    grid_[key(kx, ky)].push_back(v);
    return v;
  }

  std::vector<Vec2>& points() { return points_; }

 private:
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(y);
  }

  double tol_;
  std::vector<Vec2> points_;
  std::unordered_map<std::uint64_t, std::vector<Index>> grid_;
};

enum class VertexKind { Interior, OnSegment, DomainNode };

struct VertexTag {
  VertexKind kind = VertexKind::Interior;
  int segment = -1;
};

bool star_about_centroid(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return false;
  const auto geo = polygon_geometry(poly);
  if (!(geo.area > 0.0)) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (cross2(poly[i] - geo.centroid, poly[(i + 1) % poly.size()] - geo.centroid) <= 0.0) {
      return false;
    }
  }
  return true;
}

// Collapses short edges in a conforming polygon partition. Domain nodes
// never move; vertices on a boundary segment only slide along it.
void collapse_short_edges(std::vector<Vec2>& pts, std::vector<std::vector<Index>>& cells,
                          std::vector<VertexTag>& tags, double tolerance) {
  const Index nv = static_cast<Index>(pts.size());
  std::vector<std::vector<Index>> vcells(nv);
  for (Index c = 0; c < static_cast<Index>(cells.size()); ++c) {
    for (Index v : cells[c]) vcells[v].push_back(c);
  }
  const auto polygon_of = [&](const std::vector<Index>& cell) {
    std::vector<Vec2> p;
    p.reserve(cell.size());
    for (Index v : cell) p.push_back(pts[v]);
    return p;
  };
  const auto ratio = [&](Index c, Index a, Index b) {
    const Vec2 ctr = polygon_geometry(polygon_of(cells[c])).centroid;
    const Vec2 u = pts[a] - ctr, w = pts[b] - ctr;
    const double beta = std::atan2(std::abs(cross2(u, w)), u.dot(w));
    return beta / (2.0 * kPi / static_cast<double>(cells[c].size()));
  };

  struct Candidate {
    double r;
    Index a, b;
  };
  std::vector<Candidate> cand;
  for (Index c = 0; c < static_cast<Index>(cells.size()); ++c) {
    const auto& cell = cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const Index a = cell[i], b = cell[(i + 1) % cell.size()];
      const double r = ratio(c, a, b);
      if (r < tolerance) cand.push_back({r, std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    if (x.r != y.r) return x.r < y.r;
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  std::vector<char> removed(nv, 0);
  for (const auto& e : cand) {
    if (removed[e.a] || removed[e.b]) continue;
    // The edge must still exist and still be short.
    std::vector<Index> shared;
    for (Index c : vcells[e.a]) {
      if (std::find(vcells[e.b].begin(), vcells[e.b].end(), c) != vcells[e.b].end()) {
        shared.push_back(c);
      }
    }
    if (shared.empty()) continue;
    bool still_short = false;
    for (Index c : shared) still_short = still_short || ratio(c, e.a, e.b) < tolerance;
    if (!still_short) continue;

    const VertexTag ta = tags[e.a], tb = tags[e.b];
    Index keep = e.a, drop = e.b;
    Vec2 target;
    if (ta.kind == VertexKind::DomainNode && tb.kind == VertexKind::DomainNode) continue;
    if (ta.kind == VertexKind::DomainNode) {
      target = pts[e.a];
    } else if (tb.kind == VertexKind::DomainNode) {
      keep = e.b;
      drop = e.a;
      target = pts[e.b];
    } else if (ta.kind == VertexKind::OnSegment && tb.kind == VertexKind::OnSegment) {
      if (ta.segment != tb.segment) continue;
      target = 0.5 * (pts[e.a] + pts[e.b]);
    } else if (ta.kind == VertexKind::OnSegment) {
      target = pts[e.a];
    } else if (tb.kind == VertexKind::OnSegment) {
      keep = e.b;
      drop = e.a;
      target = pts[e.b];
    } else {
      target = 0.5 * (pts[e.a] + pts[e.b]);
    }

    // Tentatively rebuild every affected cell.
    std::vector<Index> affected = vcells[keep];
    for (Index c : vcells[drop]) {
      if (std::find(affected.begin(), affected.end(), c) == affected.end()) affected.push_back(c);
    }
    std::vector<std::vector<Index>> rebuilt;
    bool ok = true;
    const Vec2 saved = pts[keep];
    pts[keep] = target;
    for (Index c : affected) {
      std::vector<Index> cell;
      for (Index v : cells[c]) {
        const Index w = v == drop ? keep : v;
        if (cell.empty() || cell.back() != w) cell.push_back(w);
      }
      while (cell.size() > 1 && cell.front() == cell.back()) cell.pop_back();
      if (cell.size() < 3 || !star_about_centroid(polygon_of(cell))) {
        ok = false;
        break;
      }
      rebuilt.push_back(std::move(cell));
    }
    if (!ok) {
      pts[keep] = saved;
      continue;
    }
    for (std::size_t i = 0; i < affected.size(); ++i) cells[affected[i]] = std::move(rebuilt[i]);
    for (Index c : vcells[drop]) {
      if (std::find(vcells[keep].begin(), vcells[keep].end(), c) == vcells[keep].end()) {
        vcells[keep].push_back(c);
      }
    }
    vcells[drop].clear();
    removed[drop] = 1;
  }

  // Compact.
  std::vector<Index> remap(nv, -1);
  std::vector<Vec2> kept_pts;
  std::vector<VertexTag> kept_tags;
  for (Index v = 0; v < nv; ++v) {
    if (removed[v] || vcells[v].empty()) continue;
    remap[v] = static_cast<Index>(kept_pts.size());
    kept_pts.push_back(pts[v]);
    kept_tags.push_back(tags[v]);
  }
  for (auto& cell : cells) {
    for (auto& v : cell) v = remap[v];
  }
  pts = std::move(kept_pts);
  tags = std::move(kept_tags);
}

double polygon_area(std::span<const Vec2> poly) { return polygon_geometry(poly).area; }

void check_partition_area(const PolyMesh& mesh, std::span<const Vec2> domain) {
  const double expect = polygon_area(domain);
  const double got = mesh.total_area();
  if (std::abs(got - expect) > 1e-10 * expect) {
    throw GenerationError("cell areas sum to " + std::to_string(got) + ", domain area is " +
                          std::to_string(expect));
  }
}

}  // namespace

std::vector<Vec2> domain_polygon(DomainKind domain, int n) {
  if (n < 4) throw GenerationError("at least 4 boundary nodes are required");
  std::vector<Vec2> poly;
  switch (domain) {
    case DomainKind::QuarterDisk:
      poly.emplace_back(0.0, 0.0);
      for (int i = 0; i < n; ++i) {
        const double th = 0.5 * kPi * i / (n - 1);
        poly.emplace_back(std::cos(th), std::sin(th));
      }
      poly[1] = Vec2(1.0, 0.0);
      poly[n] = Vec2(0.0, 1.0);
      break;
    case DomainKind::UnitDisk:
      for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        poly.emplace_back(std::cos(th), std::sin(th));
      }
      break;
    case DomainKind::UnitSquare: {
      const int m = std::max(1, n / 4);
      const Vec2 corners[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      for (int s = 0; s < 4; ++s) {
        for (int j = 0; j < m; ++j) {
          const double t = static_cast<double>(j) / m;
          poly.push_back((1.0 - t) * corners[s] + t * corners[(s + 1) % 4]);
        }
      }
      break;
    }
  }
  return poly;
}

PolyMesh generate_triangulation(DomainKind domain, int level, int n_boundary_nodes) {
  if (level < 0 || level > 6) throw GenerationError("triangulation level must be in [0, 6]");
  const auto poly = domain_polygon(domain, n_boundary_nodes);
  const double area = polygon_area(poly);
  const double max_area = area / 30.0 / std::pow(4.0, level);
  const Index budget = static_cast<Index>(200.0 * area / max_area) + 1000;

  for (double angle : {20.0, 25.0}) {
    Refiner ref(poly, max_area, angle);
    ref.run(budget);
    const auto tris = ref.tri.triangles();
    double worst = kPi;
    std::vector<std::vector<Index>> cells;
    cells.reserve(tris.size());
    for (const auto& t : tris) {
      worst = std::min(worst, min_angle(ref.tri.point(t[0]), ref.tri.point(t[1]),
                                        ref.tri.point(t[2])));
      cells.push_back({t[0], t[1], t[2]});
    }
    if (worst < 15.0 * kPi / 180.0) continue;
    std::vector<Vec2> verts(ref.tri.n_vertices());
    for (Index v = 0; v < ref.tri.n_vertices(); ++v) verts[v] = ref.tri.point(v);
    PolyMesh mesh(std::move(verts), std::move(cells));
    check_partition_area(mesh, poly);
    return mesh;
  }
  throw GenerationError("triangulation has an angle below 15 degrees after retry");
}

PolyMesh generate_voronoi_polymesh(DomainKind domain, Index n_cells, int n_boundary_nodes,
                                   std::uint64_t seed, const VoronoiOptions& options) {
  if (n_cells < 4) throw GenerationError("a Voronoi mesh needs at least 4 cells");
  if (options.lloyd_iterations < 0) throw GenerationError("negative Lloyd iteration count");
  const auto poly = domain_polygon(domain, n_boundary_nodes);
  Vec2 lo = poly[0], hi = poly[0];
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double L = (hi - lo).maxCoeff();

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  std::vector<Vec2> seeds;
  seeds.reserve(n_cells);
  while (static_cast<Index>(seeds.size()) < n_cells) {
    const Vec2 p(ux(gen), uy(gen));
    if (inside_convex(poly, p, 1e-9 * L)) seeds.push_back(p);
  }

  ClippedCells vor;
  for (int it = 0;; ++it) {
    vor = clipped_voronoi(seeds, poly);
    if (it == options.lloyd_iterations) break;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (vor.cells[i].size() < 3) throw GenerationError("empty Voronoi cell during Lloyd");
      seeds[i] = polygon_geometry(vor.cells[i]).centroid;
    }
  }

  const double tol = 1e-10 * L;
  PointMerger merger(tol);
  for (const auto& p : poly) merger.add(p);
  std::vector<std::vector<Index>> cells(seeds.size());
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    auto& cell = cells[c];
    for (const auto& p : vor.cells[c]) {
      const Index v = merger.add(p);
      if (cell.empty() || cell.back() != v) cell.push_back(v);
    }
    while (cell.size() > 1 && cell.front() == cell.back()) cell.pop_back();
    if (cell.size() < 3) {
      throw GenerationError("degenerate Voronoi cell " + std::to_string(c));
    }
  }
  auto& pts = merger.points();

  std::vector<VertexTag> tags(pts.size());
  const int nd = static_cast<int>(poly.size());
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (static_cast<int>(v) < nd) {
      tags[v].kind = VertexKind::DomainNode;
      continue;
    }
    for (int s = 0; s < nd; ++s) {
      const Vec2& a = poly[s];
      const Vec2& b = poly[(s + 1) % nd];
      if (std::abs(cross2(b - a, pts[v] - a)) <= 1e-9 * L * (b - a).norm()) {
        tags[v] = {VertexKind::OnSegment, s};
        break;
      }
    }
  }

  // A zero tolerance still compacts unused vertices.
  collapse_short_edges(pts, cells, tags, std::max(0.0, options.collapse_tolerance));

  std::vector<Index> boundary;
  for (std::size_t v = 0; v < tags.size(); ++v) {
    if (tags[v].kind != VertexKind::Interior) boundary.push_back(static_cast<Index>(v));
  }
  PolyMesh mesh(std::move(pts), std::move(cells), std::move(boundary));
  check_partition_area(mesh, poly);
  return mesh;
}

}  // namespace ivem
