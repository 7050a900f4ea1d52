#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "radialdlt/core.hpp"

namespace radialdlt {

using Triangle = std::array<std::uint32_t, 3>;

/// Object model in meters.
class TriangleMesh {
 public:
  TriangleMesh() = default;

  /// Validates indices and computes the diameter. Meshes with at most
  /// kExactDiameterLimit vertices get an exact O(n^2) diameter; larger ones use
  /// the convex hull vertices (exact) or, if the hull itself is too large, a
  /// strided subset of them.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  static constexpr size_t kExactDiameterLimit = 5000;

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  double diameter() const { return diameter_; }

  Vec3 aabb_min() const { return aabb_min_; }
  Vec3 aabb_max() const { return aabb_max_; }

  /// Largest distance from the object origin to a vertex.
  double bounding_radius() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  double diameter_ = 0.0;
  Vec3 aabb_min_ = Vec3::Zero();
  Vec3 aabb_max_ = Vec3::Zero();
};

double brute_force_diameter(const std::vector<Vec3>& points);

// ASCII OBJ subset: `v x y z` and triangular `f a b c` lines with 1-based
// indices. Blank lines and `#` comments are skipped; anything else is a
// kFormatError naming the line.
TriangleMesh parse_obj(std::istream& in);

// ASCII PLY with `element vertex` (x, y, z float/double properties; other
// scalar properties are ignored) and `element face` (3-index lists).
TriangleMesh parse_ply(std::istream& in);

/// Dispatches on the extension (.obj / .ply). Throws kIoError when the file
/// cannot be opened.
TriangleMesh load_mesh(const std::filesystem::path& path);

void write_obj(std::ostream& out, const TriangleMesh& mesh);
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Procedural meshes.

/// Axis-aligned box centered at the origin, each face split into
/// `segments` x `segments` quads. Vertex count is 6*s^2 + 2.
TriangleMesh make_box_mesh(const Vec3& extents, int segments = 1);

/// UV sphere centered at the origin with poles on the z axis.
TriangleMesh make_uv_sphere(double radius, int rings, int sectors);

/// Regular tetrahedron with the given edge length, centroid at the origin.
TriangleMesh make_tetrahedron(double edge);

/// Star-shaped, deliberately asymmetric closed surface ("blob") around the
/// origin. Mean radius `radius`; shape varies with `seed`.
TriangleMesh make_blob_mesh(double radius, int rings, int sectors,
                            std::uint64_t seed);

/// Area-weighted deterministic surface samples.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, size_t count,
                                 std::uint64_t seed);

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidPose& pose);

}  // namespace radialdlt
