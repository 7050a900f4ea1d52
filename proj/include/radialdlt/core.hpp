#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "radialdlt/error.hpp"

namespace radialdlt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Decimeters per meter. Radial maps live in decimeters, meshes and poses in
/// meters; only the oracle and dlt modules cross this boundary.
inline constexpr double kDecimetersPerMeter = 10.0;

inline constexpr double kRotationTolerance = 1e-9;

/// Rigid transform [R|t] mapping object-frame points into the camera frame.
class RigidPose {
 public:
  RigidPose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws kInvalidPose unless R^T R = I and det(R) = +1 within 1e-9.
  RigidPose(const Mat3& rotation, const Vec3& translation);

  static RigidPose identity() { return {}; }

  /// Projects an almost-rotation onto SO(3) before validating. Intended for
  /// poses read from text files with limited precision.
  static RigidPose from_approximate(const Mat3& rotation,
                                    const Vec3& translation,
                                    double max_deviation = 1e-6);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidPose inverse() const;

  /// (a * b)(p) = a(b(p)).
  friend RigidPose operator*(const RigidPose& a, const RigidPose& b);

 private:
  struct Unchecked {};
  RigidPose(const Mat3& r, const Vec3& t, Unchecked)
      : rotation_(r), translation_(t) {}

  Mat3 rotation_;
  Vec3 translation_;
};

bool is_rotation(const Mat3& r, double tol = kRotationTolerance);

Vec3 transform_point(const RigidPose& pose, const Vec3& p);

/// Geodesic angle (radians) between two rotations.
double rotation_angle_between(const Mat3& a, const Mat3& b);

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole camera. Pixel (u, v) has its center at integer coordinates, so the
/// ray of pixel (col, row) passes through ((col - cx) / fx, (row - cy) / fy, 1).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws kInvalidArgument when fx, fy <= 0 or the principal point lies
  /// outside the image.
  void validate() const;

  /// Intrinsics of the LINEMOD Kinect (640x480).
  static CameraIntrinsics linemod();
};

PixelCoord project(const CameraIntrinsics& intr, const Vec3& p_cam);

/// Camera-frame point at pixel (u, v) whose z equals `depth`.
Vec3 back_project(const CameraIntrinsics& intr, double u, double v,
                  double depth);

/// Row-major H x W boolean mask.
class SegMask {
 public:
  SegMask() = default;
  SegMask(int width, int height)
      : width_(width), height_(height),
        bits_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty_shape() const { return bits_.empty(); }

  bool at(int u, int v) const { return bits_[index(u, v)] != 0; }
  void set(int u, int v, bool on) { bits_[index(u, v)] = on ? 1 : 0; }
  bool at_index(size_t i) const { return bits_[i] != 0; }
  void set_index(size_t i, bool on) { bits_[i] = on ? 1 : 0; }

  size_t index(int u, int v) const {
    return static_cast<size_t>(v) * width_ + u;
  }
  size_t size() const { return bits_.size(); }
  size_t count() const;

  bool same_shape(const SegMask& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }
  friend bool operator==(const SegMask&, const SegMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Discrete rotational symmetries of an object. Element 0 is always identity.
class SymmetrySet {
 public:
  SymmetrySet() : rotations_{Mat3::Identity()} {}

  /// Prepends identity when missing. Throws kInvalidPose for non-rotations.
  explicit SymmetrySet(const std::vector<Mat3>& rotations);

  static SymmetrySet identity_only() { return {}; }

  /// Identity plus the half-turn about `axis` (through the object origin).
  static SymmetrySet half_turn(const Vec3& axis);

  const std::vector<Mat3>& rotations() const { return rotations_; }
  size_t size() const { return rotations_.size(); }

  RigidPose as_pose(size_t i) const {
    return RigidPose(rotations_[i], Vec3::Zero());
  }

 private:
  std::vector<Mat3> rotations_;
};

/// Axis-angle vector (axis * angle, radians) of a rotation.
Vec3 rotation_to_axis_angle(const Mat3& r);

}  // namespace radialdlt
