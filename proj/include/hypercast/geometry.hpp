// Copyright 2026 The Hypercast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYPERCAST_GEOMETRY_HPP_
#define HYPERCAST_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <cmath>

namespace hypercast
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Counterclockwise rotation matrix for angle theta (radians).
inline Mat2 rotation_matrix(double theta)
{
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a)
{
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Positions are quantized to 2^-20 m (< 1 um) when scenes are produced.
// On this grid, sums and differences with grid-aligned offsets below ~2^30 m
// are exact in IEEE754, which makes translated scenes feature-identical bit
// for bit instead of only approximately.
inline double snap_to_grid(double x)
{
  constexpr double kGrid = 1048576.0;  // 2^20
  return std::round(x * kGrid) / kGrid;
}

inline Vec2 snap_to_grid(const Vec2 & p)
{
  return Vec2(snap_to_grid(p.x()), snap_to_grid(p.y()));
}

}  // namespace hypercast

#endif  // HYPERCAST_GEOMETRY_HPP_
