#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/mesh.hpp"

namespace radialdlt {

using KeypointPair = std::array<int, 2>;

/// Ordered object-frame keypoints (meters) plus the symmetric pairing used for
/// channel ordering.
struct KeypointSet {
  std::vector<Vec3> points;
  /// Symmetric partners; empty for asymmetric objects.
  std::vector<KeypointPair> pairs;
  /// Offset used to generate the set, when it came from an oriented box.
  std::optional<double> offset_d;
  /// Object symmetries (identity-only unless declared).
  SymmetrySet symmetries;

  size_t size() const { return points.size(); }

  /// Throws kTooFewKeypoints for N_k < 4 and kInvalidArgument for malformed
  /// pairs (index out of range, self-pair, index used twice).
  void validate() const;
};

/// Oriented bounding box. Corners follow the Open3D GetBoxPoints layout:
///
///   q0 = c - x - y - z   q4 = c + x + y + z
///   q1 = c + x - y - z   q5 = c - x + y + z
///   q2 = c - x + y - z   q6 = c + x - y + z
///   q3 = c - x - y + z   q7 = c + x + y - z
///
/// where x, y, z are the half-extent vectors along the box axes. The z axis is
/// the "vertical" axis: the generated keypoint pairs swap under a half-turn
/// about it.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns x, y, z; right-handed, unit length
  Vec3 extents = Vec3::Zero();   // full side lengths along x, y, z

  std::array<Vec3, 8> corners() const;
  double volume() const { return extents.prod(); }
  bool contains(const Vec3& p, double tol) const;
};

/// Quadrilaterals F1..F4 of the keypoint generation procedure, as corner
/// indices. F1/F2 and F3/F4 produce the two symmetric keypoint pairs.
inline constexpr std::array<std::array<int, 4>, 4> kKeypointFaces{{
    {0, 1, 5, 4},
    {2, 3, 7, 6},
    {0, 2, 6, 4},
    {1, 3, 7, 5},
}};

/// Builds a box from an arbitrary orthonormal frame and relabels its axes:
/// z becomes the axis most aligned with the object z axis, x the remaining
/// axis most aligned with object x (both with non-negative dot), y = z × x.
OrientedBox make_oriented_box(const Vec3& center, const Mat3& axes,
                              const Vec3& extents);

/// Approximate minimum-volume enclosing box.
///
/// Candidates come from every convex-hull face normal (with a rotating-calipers
/// minimum-area rectangle in the orthogonal plane), the principal axes, the
/// object axes and a fixed set of pseudo-random orientations; the best few are
/// polished by a pattern search over small rotations. Exact for box-shaped
/// meshes. Extents are taken over all mesh vertices, so every vertex is inside.
/// Throws kDegenerateMesh for coplanar or collinear vertices.
OrientedBox compute_obb(const TriangleMesh& mesh);

/// Default keypoint offset: 0.2 x the largest box side.
double default_keypoint_offset(const OrientedBox& box);

/// Four keypoints k_i = f_i + d * n_i where f_i is the mean of the corners of
/// F_i and n_i the normalized cross product of its edges (q1 - q0) x (q3 - q0).
/// Pairing {(0,1), (2,3)}. Throws kInvalidArgument for d <= 0.
KeypointSet symmetric_keypoints(const OrientedBox& box, double d);

/// Farthest point sampling over the mesh vertices, seeded with the vertex
/// farthest from the vertex centroid. The fourth point is instead the vertex
/// farthest from the plane of the first three, so the set always spans a
/// tetrahedron. No pairing. Throws kDegenerateMesh for a flat mesh.
KeypointSet farthest_point_keypoints(const TriangleMesh& mesh, int count);

/// Largest |det[k_b - k_a, k_c - k_a, k_d - k_a]| over all 4-subsets
/// (cubic input units). Zero when all keypoints are coplanar.
double coplanarity_measure(std::span<const Vec3> points);

inline constexpr double kCoplanarityThreshold = 1e-9;

/// Camera-proximity channel order for symmetric keypoints. Output slot s holds
/// the original keypoint index whose radial map goes to channel s. Within each
/// pair the keypoint nearer to the camera origin takes the lower slot; exact
/// ties (within 1e-12 m) keep the original order. Unpaired keypoints stay put.
///
/// Throws kInvalidArgument when the set has no pairs and kUnsupportedSymmetry
/// when its declared symmetries are not a single half-turn.
std::vector<int> order_channels(const KeypointSet& kps, const RigidPose& pose);

/// Throws kUnsupportedSymmetry unless `sym` is identity-only or identity plus
/// one half-turn.
void check_half_turn_symmetry(const SymmetrySet& sym);

}  // namespace radialdlt
