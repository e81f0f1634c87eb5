#include "ivem/delaunay.hpp"

#include "ivem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ivem {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double acx = (long double)a.x() - c.x(), bcx = (long double)b.x() - c.x();
  const long double acy = (long double)a.y() - c.y(), bcy = (long double)b.y() - c.y();
  return static_cast<double>(acx * bcy - acy * bcx);
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const long double adx = (long double)a.x() - d.x(), ady = (long double)a.y() - d.y();
  const long double bdx = (long double)b.x() - d.x(), bdy = (long double)b.y() - d.y();
  const long double cdx = (long double)c.x() - d.x(), cdy = (long double)c.y() - d.y();
  const long double alift = adx * adx + ady * ady;
  const long double blift = bdx * bdx + bdy * bdy;
  const long double clift = cdx * cdx + cdy * cdy;
  return static_cast<double>(alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                             clift * (adx * bdy - bdx * ady));
}

Triangulation Triangulation::delaunay(std::span<const Vec2> points) {
  Triangulation tri;
  Vec2 lo = Vec2::Constant(0.0), hi = Vec2::Constant(1.0);
  if (!points.empty()) {
    lo = hi = points[0];
    for (const auto& p : points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  const Vec2 c = 0.5 * (lo + hi);
  const double extent = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  // Far enough that missing hull edges only affect Voronoi features well
  // outside any bounded chart domain.
  const double R = 1e4 * extent;
  const double s3 = std::sqrt(3.0);
  tri.points_.reserve(points.size() + 3);
  tri.points_.push_back(c + Vec2(-s3 * R, -R));
  tri.points_.push_back(c + Vec2(s3 * R, -R));
  tri.points_.push_back(c + Vec2(0.0, 2.0 * R));
  tri.vertex_tri_.assign(3, 0);
  tri.tris_.reserve(2 * points.size() + 8);
  const Index t0 = tri.new_triangle(0, 1, 2);
  tri.tris_[t0].n = {-1, -1, -1};
  for (const auto& p : points) {
    if (tri.insert(p) < 0) throw GenerationError("point outside the super triangle");
  }
  return tri;
}

Triangulation Triangulation::convex_polygon(std::span<const Vec2> polygon) {
  Triangulation tri = delaunay(polygon);
  for (Index t = 0; t < tri.n_triangle_slots(); ++t) {
    auto& T = tri.tris_[t];
    if (!T.alive) continue;
    if (T.v[0] < 3 || T.v[1] < 3 || T.v[2] < 3) {
      T.alive = false;
      tri.free_.push_back(t);
    }
  }
  for (auto& T : tri.tris_) {
    if (!T.alive) continue;
    for (auto& nb : T.n) {
      if (nb >= 0 && !tri.tris_[nb].alive) nb = -1;
    }
  }
  for (auto& T : tri.tris_) {
    if (!T.alive) continue;
    for (Index iv : T.v) tri.vertex_tri_[iv] = &T - tri.tris_.data();
  }
  tri.constrained_ = true;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Index a = static_cast<Index>(i), b = static_cast<Index>((i + 1) % polygon.size());
    if (tri.find_edge(a, b).first < 0) {
      throw GenerationError("polygon edge missing from its triangulation; polygon not strictly convex?");
    }
  }
  for (Index t = 0; t < tri.n_triangle_slots(); ++t) {
    if (tri.tris_[t].alive) {
      tri.last_ = t;
      break;
    }
  }
  return tri;
}

Index Triangulation::add_point(const Vec2& p) {
  points_.push_back(p);
  vertex_tri_.push_back(-1);
  return static_cast<Index>(points_.size()) - 1;
}

Index Triangulation::new_triangle(Index a, Index b, Index c) {
  Index t;
  if (!free_.empty()) {
    t = free_.back();
    free_.pop_back();
  } else {
    t = static_cast<Index>(tris_.size());
    tris_.emplace_back();
    mark_.push_back(0);
  }
  auto& T = tris_[t];
  T.v = {a, b, c};
  T.n = {-1, -1, -1};
  T.alive = true;
  return t;
}

bool Triangulation::in_circle(Index t, const Vec2& p) const {
  const auto& T = tris_[t];
  return incircle(ipoint(T.v[0]), ipoint(T.v[1]), ipoint(T.v[2]), p) > 0.0;
}

Index Triangulation::locate(const Vec2& p) const {
  Index t = last_;
  if (t < 0 || t >= n_triangle_slots() || !tris_[t].alive) {
    t = -1;
    for (Index s = 0; s < n_triangle_slots(); ++s) {
      if (tris_[s].alive) {
        t = s;
        break;
      }
    }
    if (t < 0) return -1;
  }
  const Index max_steps = 4 * n_triangle_slots() + 16;
  int rot = 0;
  for (Index step = 0; step < max_steps; ++step) {
    const auto& T = tris_[t];
    bool moved = false;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + rot) % 3;
      if (orient2d(ipoint(T.v[(i + 1) % 3]), ipoint(T.v[(i + 2) % 3]), p) < 0.0) {
        if (T.n[i] < 0) return -1;
        t = T.n[i];
        moved = true;
        break;
      }
    }
    if (!moved) {
      last_ = t;
      return t;
    }
    rot = (rot + 1) % 3;
  }
  // Walk failed to converge (degenerate input); fall back to a scan.
  for (Index s = 0; s < n_triangle_slots(); ++s) {
    const auto& T = tris_[s];
    if (!T.alive) continue;
    bool inside = true;
    for (int i = 0; i < 3 && inside; ++i) {
      inside = orient2d(ipoint(T.v[(i + 1) % 3]), ipoint(T.v[(i + 2) % 3]), p) >= 0.0;
    }
    if (inside) {
      last_ = s;
      return s;
    }
  }
  return -1;
}

Index Triangulation::insert(const Vec2& p) {
  const Index t = locate(p);
  if (t < 0) return -1;
  for (Index iv : tris_[t].v) {
    if (ipoint(iv) == p) return iv - 3;
  }
  const Index vp = add_point(p);
  insert_with_cavity(vp, t, -1, -1);
  return vp - 3;
}

Index Triangulation::insert_on_boundary(const Vec2& p, Index tri, int edge) {
  if (!constrained_ || tri < 0 || !tris_[tri].alive || tris_[tri].n[edge] != -1) {
    throw GenerationError("insert_on_boundary needs a live boundary edge");
  }
  const Index vp = add_point(p);
  insert_with_cavity(vp, tri, tri, edge);
  return vp - 3;
}

Index Triangulation::insert_with_cavity(Index vp, Index start, Index split_tri, int split_edge) {
  const Vec2 p = ipoint(vp);
  if (++epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    epoch_ = 1;
  }
  std::vector<Index> cavity{start};
  mark_[start] = epoch_;
  for (std::size_t k = 0; k < cavity.size(); ++k) {
    const auto& T = tris_[cavity[k]];
    for (Index nb : T.n) {
      if (nb >= 0 && mark_[nb] != epoch_ && in_circle(nb, p)) {
        mark_[nb] = epoch_;
        cavity.push_back(nb);
      }
    }
  }

  struct BoundaryEdge {
    Index a, b, outer;
  };
  std::vector<BoundaryEdge> rim;
  for (;;) {
    rim.clear();
    Index grow = -1;
    for (Index t : cavity) {
      const auto& T = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const Index nb = T.n[i];
        if (nb >= 0 && mark_[nb] == epoch_) continue;
        if (t == split_tri && i == split_edge) continue;
        const Index a = T.v[(i + 1) % 3], b = T.v[(i + 2) % 3];
        if (orient2d(ipoint(a), ipoint(b), p) <= 0.0) {
          if (nb < 0) throw GenerationError("cavity is not star-shaped at a boundary edge");
          grow = nb;
          break;
        }
        rim.push_back({a, b, nb});
      }
      if (grow >= 0) break;
    }
    if (grow < 0) break;
    mark_[grow] = epoch_;
    cavity.push_back(grow);
  }

  for (Index t : cavity) {
    tris_[t].alive = false;
    free_.push_back(t);
  }

  std::vector<Index> made;
  made.reserve(rim.size());
  for (const auto& e : rim) {
    const Index t = new_triangle(vp, e.a, e.b);
    tris_[t].n[0] = e.outer;
    if (e.outer >= 0) {
      auto& O = tris_[e.outer];
      for (int j = 0; j < 3; ++j) {
        if (O.v[(j + 1) % 3] == e.b && O.v[(j + 2) % 3] == e.a) O.n[j] = t;
      }
    }
    made.push_back(t);
  }
  // Link the fan: triangle (p, a, b) meets (p, b, c) across (p, b) and
  // (p, z, a) across (p, a).
  for (std::size_t i = 0; i < made.size(); ++i) {
    auto& T = tris_[made[i]];
    for (std::size_t j = 0; j < made.size(); ++j) {
      if (i == j) continue;
      const auto& U = tris_[made[j]];
      if (U.v[1] == T.v[2]) T.n[1] = made[j];
      if (U.v[2] == T.v[1]) T.n[2] = made[j];
    }
    for (Index iv : T.v) vertex_tri_[iv] = made[i];
  }
  if (!made.empty()) last_ = made.front();
  return vp;
}

std::vector<std::array<Index, 3>> Triangulation::triangles() const {
  std::vector<std::array<Index, 3>> out;
  for (const auto& T : tris_) {
    if (!T.alive || T.v[0] < 3 || T.v[1] < 3 || T.v[2] < 3) continue;
    out.push_back({T.v[0] - 3, T.v[1] - 3, T.v[2] - 3});
  }
  return out;
}

std::vector<Index> Triangulation::vertex_ring(Index v) const {
  const Index iv = internal(v);
  const Index t0 = vertex_tri_[iv];
  std::vector<Index> ring;
  if (t0 < 0 || !tris_[t0].alive) return ring;
  const auto slot = [&](Index t) {
    const auto& T = tris_[t];
    return T.v[0] == iv ? 0 : (T.v[1] == iv ? 1 : 2);
  };
  // Rewind clockwise to a boundary edge, if there is one.
  Index start = t0;
  for (Index t = t0;;) {
    const Index prev = tris_[t].n[(slot(t) + 2) % 3];
    if (prev < 0) {
      start = t;
      break;
    }
    if (prev == t0) {
      start = t0;
      break;
    }
    t = prev;
  }
  for (Index t = start;;) {
    ring.push_back(t);
    const Index next = tris_[t].n[(slot(t) + 1) % 3];
    if (next < 0 || next == start) break;
    t = next;
  }
  return ring;
}

std::pair<Index, int> Triangulation::find_edge(Index a, Index b) const {
  const Index ia = internal(a), ib = internal(b);
  for (Index t : vertex_ring(a)) {
    const auto& T = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const Index x = T.v[(i + 1) % 3], y = T.v[(i + 2) % 3];
      if ((x == ia && y == ib) || (x == ib && y == ia)) return {t, i};
    }
  }
  return {-1, -1};
}

Vec2 Triangulation::circumcenter(Index t) const {
  const auto& T = tris_[t];
  const Vec2 a = ipoint(T.v[0]);
  const Vec2 b = ipoint(T.v[1]) - a, c = ipoint(T.v[2]) - a;
  const double d = 2.0 * cross2(b, c);
  const double b2 = b.squaredNorm(), c2 = c.squaredNorm();
  return a + Vec2(c.y() * b2 - b.y() * c2, b.x() * c2 - c.x() * b2) / d;
}

}  // namespace ivem
