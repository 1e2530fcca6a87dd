#pragma once

// Camera geometry shared by every stage.
//
// Conventions: right-handed world frame, cameras look down +Z, image u grows
// to the right (+X) and v grows downward (+Y). A camera's rotation R maps
// world directions into the camera frame, so a pixel's viewing ray in the
// world is R^T K^-1 (u, v, 1). Positive yaw turns the optical axis from +Z
// toward +X, positive pitch turns it toward -Y (up).

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <stdexcept>

namespace pano {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Intrinsics {
    double focal = 1.0;
    double principal_x = 0.0;
    double principal_y = 0.0;
    int width = 1;
    int height = 1;

    /// Throws std::invalid_argument unless focal > 0 and the size is positive.
    void validate() const;
    Mat3 matrix() const;
    Mat3 inverse_matrix() const;
    /// Horizontal field of view in radians.
    double horizontal_fov() const;
};

/// A proper rotation matrix (orthonormal, det = +1).
class Rotation {
public:
    static constexpr double kTolerance = 1e-9;

    Rotation() : m_(Mat3::Identity()) {}

    /// Validates orthonormality and determinant within kTolerance.
    explicit Rotation(const Mat3 &m);

    /// Projects an arbitrary matrix onto the closest rotation (SVD).
    static Rotation nearest(const Mat3 &m);
    static Rotation identity() { return Rotation(); }

    const Mat3 &matrix() const { return m_; }
    Rotation inverse() const;
    Rotation operator*(const Rotation &rhs) const;
    Vec3 operator*(const Vec3 &v) const { return m_ * v; }

private:
    struct Unchecked {};
    Rotation(const Mat3 &m, Unchecked) : m_(m) {}

    Mat3 m_;
};

/// Rodrigues' formula; the zero vector maps to the identity.
Rotation rotation_from_angle_axis(const Vec3 &angle_axis);

/// Inverse of rotation_from_angle_axis with angle in [0, pi]. At angle pi the
/// axis sign is canonicalized so its first nonzero component is positive.
Vec3 rotation_to_angle_axis(const Rotation &r);

/// Unit quaternion (w, x, y, z); normalized before conversion.
Rotation rotation_from_quaternion(double w, double x, double y, double z);

/// World-to-camera rotation of a camera whose optical axis is turned by yaw
/// then pitch, with roll about its own optical axis. Angles in radians.
Rotation rotation_from_yaw_pitch_roll(double yaw, double pitch, double roll = 0.0);

/// Angle between two rotations, radians.
double rotation_angle_between(const Rotation &a, const Rotation &b);

struct Camera {
    Intrinsics intrinsics;
    Rotation rotation;
    /// Carried for completeness; the rotation-only stitching model ignores it.
    Vec3 translation = Vec3::Zero();

    /// Optical axis in world coordinates.
    Vec3 optical_axis() const;
};

/// H = K_j R_j R_i^T K_i^-1, normalized so H(2,2) = 1 (or by the
/// largest-magnitude entry when |H(2,2)| < 1e-12).
Mat3 homography_between(const Camera &from, const Camera &to);

/// Scale-normalizes a homography with the rule used by homography_between.
Mat3 normalize_homography(const Mat3 &h);

/// Unit viewing ray in world coordinates. Valid for any pixel, inside the
/// image or not.
Vec3 pixel_to_ray(const Camera &cam, const Vec2 &pixel);

/// Pixel hit by a world direction; nullopt when the direction is behind the
/// camera (camera-frame z <= 1e-9).
std::optional<Vec2> ray_to_pixel(const Camera &cam, const Vec3 &ray);

/// Thrown when a resize would change the pixel aspect ratio.
class AnisotropicScaleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scales focal and principal point to a new resolution. Throws
/// AnisotropicScaleError when the horizontal and vertical factors differ by
/// more than 1%.
Intrinsics rescale_intrinsics(const Intrinsics &k, int new_width, int new_height);

/// 3x3 skew-symmetric cross-product matrix.
Mat3 skew(const Vec3 &v);

/// Right Jacobian of SO(3) at the given angle-axis vector.
Mat3 so3_right_jacobian(const Vec3 &angle_axis);

}  // namespace pano
