#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace ivem {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Index = std::int64_t;

inline constexpr Index kNoCell = -1;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace ivem
