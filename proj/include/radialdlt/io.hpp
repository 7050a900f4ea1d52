#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/surface.hpp"

namespace radialdlt {

// RMAP1: "RMAP1\n", u32 width, u32 height, u32 channels (little-endian), then
// H*W*C float32 values row-major, then H*W mask bytes (0/1).
void write_rmap(std::ostream& out, const ChannelMap& map);
ChannelMap read_rmap(std::istream& in);
void save_rmap(const std::filesystem::path& path, const ChannelMap& map);
ChannelMap load_rmap(const std::filesystem::path& path);

/// One-channel map of a depth image (mask = depth > 0) and back.
ChannelMap depth_to_map(const DepthImage& depth);
DepthImage map_to_depth(const ChannelMap& map);
/// Three-channel map of object points and back.
ChannelMap points_to_map(const PointImage& pts);
PointImage map_to_points(const ChannelMap& map);

// Keypoint JSON: {"points": [[x,y,z],...], "pairs": [[a,b],...],
// "units": "m", "offset_d": d|null, "symmetries": [[[3x3]],...]}.
std::string keypoints_to_json(const KeypointSet& kps);
KeypointSet keypoints_from_json(const std::string& text);
void save_keypoints(const std::filesystem::path& path, const KeypointSet& kps);
KeypointSet load_keypoints(const std::filesystem::path& path);

// Pose JSON: {"rotation": [[3x3]], "translation_m": [x,y,z]}. A pose list is
// a JSON array of such objects.
std::string pose_to_json(const RigidPose& pose);
RigidPose pose_from_json(const std::string& text);
void save_pose(const std::filesystem::path& path, const RigidPose& pose);
RigidPose load_pose(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path,
                const std::vector<RigidPose>& poses);
/// Accepts a single pose object or an array of them.
std::vector<RigidPose> load_poses(const std::filesystem::path& path);

// Intrinsics JSON: {"fx","fy","cx","cy","width","height"}.
std::string intrinsics_to_json(const CameraIntrinsics& intr);
CameraIntrinsics intrinsics_from_json(const std::string& text);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

// Surface estimates. CSV columns: u,v,x_obj,y_obj,z_obj,x_cam,y_cam,z_cam,
// residual (meters, 17 significant digits). Binary: "SURF1\n", u32 header
// length, JSON header {"count","units","fields"}, then per record i32 u,
// i32 v and 7 float64.
void write_surface_csv(std::ostream& out, const SurfaceEstimate& est);
SurfaceEstimate read_surface_csv(std::istream& in);
void write_surface_bin(std::ostream& out, const SurfaceEstimate& est);
SurfaceEstimate read_surface_bin(std::istream& in);
/// Dispatches on extension: ".csv" or ".bin".
void save_surface(const std::filesystem::path& path, const SurfaceEstimate& est);
SurfaceEstimate load_surface(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace radialdlt
