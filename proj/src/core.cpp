#include "radialdlt/core.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace radialdlt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidPose: return "InvalidPose";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDegenerateMesh: return "DegenerateMesh";
    case ErrorCode::kUnsupportedSymmetry: return "UnsupportedSymmetry";
    case ErrorCode::kObjectBehindCamera: return "ObjectBehindCamera";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNegativeSigma: return "NegativeSigma";
    case ErrorCode::kTooFewKeypoints: return "TooFewKeypoints";
    case ErrorCode::kCoplanarKeypoints: return "CoplanarKeypoints";
    case ErrorCode::kDegenerateScale: return "DegenerateScale";
    case ErrorCode::kInconsistentSolution: return "InconsistentSolution";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kInsufficientCorrespondences:
      return "InsufficientCorrespondences";
    case ErrorCode::kNoConsensus: return "NoConsensus";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyEstimate: return "EmptyEstimate";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptySymmetrySet: return "EmptySymmetrySet";
    case ErrorCode::kAlignmentError: return "AlignmentError";
  }
  return "Unknown";
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation)) {
    std::ostringstream os;
    os << "rotation is not orthonormal with det +1:\n" << rotation;
    throw Error(ErrorCode::kInvalidPose, os.str());
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::kInvalidPose, "translation is not finite");
  }
}

RigidPose RigidPose::from_approximate(const Mat3& rotation,
                                      const Vec3& translation,
                                      double max_deviation) {
  if (!is_rotation(rotation, max_deviation)) {
    return RigidPose(rotation, translation);  // throws with the details
  }
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 projected = svd.matrixU() * svd.matrixV().transpose();
  return RigidPose(projected, translation);
}

RigidPose RigidPose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidPose(rt, -(rt * translation_), Unchecked{});
}

RigidPose operator*(const RigidPose& a, const RigidPose& b) {
  return RigidPose(a.rotation_ * b.rotation_,
                   a.rotation_ * b.translation_ + a.translation_,
                   RigidPose::Unchecked{});
}

Vec3 transform_point(const RigidPose& pose, const Vec3& p) {
  return pose.apply(p);
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  // Quaternion route keeps full precision near zero, unlike acos of the trace.
  const Eigen::Quaterniond q(Mat3(a.transpose() * b));
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

Vec3 rotation_to_axis_angle(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error(ErrorCode::kInvalidArgument,
                "principal point outside the image");
  }
}

CameraIntrinsics CameraIntrinsics::linemod() {
  return {572.4114, 573.57043, 325.2611, 242.04899, 640, 480};
}

PixelCoord project(const CameraIntrinsics& intr, const Vec3& p_cam) {
  if (!(p_cam.z() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDepth,
                "cannot project a point with z <= 0");
  }
  return {intr.fx * p_cam.x() / p_cam.z() + intr.cx,
          intr.fy * p_cam.y() / p_cam.z() + intr.cy};
}

Vec3 back_project(const CameraIntrinsics& intr, double u, double v,
                  double depth) {
  return {(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth,
          depth};
}

size_t SegMask::count() const {
  return static_cast<size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

SymmetrySet::SymmetrySet(const std::vector<Mat3>& rotations) {
  for (const Mat3& r : rotations) {
    if (!is_rotation(r)) {
      throw Error(ErrorCode::kInvalidPose, "symmetry is not a rotation");
    }
  }
  const auto is_identity = [](const Mat3& r) {
    return (r - Mat3::Identity()).cwiseAbs().maxCoeff() <= kRotationTolerance;
  };
  rotations_.push_back(Mat3::Identity());
  for (const Mat3& r : rotations) {
    if (!is_identity(r)) rotations_.push_back(r);
  }
}

SymmetrySet SymmetrySet::half_turn(const Vec3& axis) {
  const Mat3 r = Eigen::AngleAxisd(M_PI, axis.normalized()).toRotationMatrix();
  return SymmetrySet({r});
}

}  // namespace radialdlt
