#include "pano/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace pano {

void Intrinsics::validate() const {
    if (!(focal > 0.0) || !std::isfinite(focal)) {
        throw std::invalid_argument("intrinsics: focal must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("intrinsics: width and height must be positive");
    }
    if (!std::isfinite(principal_x) || !std::isfinite(principal_y)) {
        throw std::invalid_argument("intrinsics: principal point must be finite");
    }
}

Mat3 Intrinsics::matrix() const {
    Mat3 k;
    k << focal, 0.0, principal_x, 0.0, focal, principal_y, 0.0, 0.0, 1.0;
    return k;
}

Mat3 Intrinsics::inverse_matrix() const {
    Mat3 k;
    k << 1.0 / focal, 0.0, -principal_x / focal, 0.0, 1.0 / focal, -principal_y / focal, 0.0, 0.0, 1.0;
    return k;
}

double Intrinsics::horizontal_fov() const { return 2.0 * std::atan(0.5 * width / focal); }

Rotation::Rotation(const Mat3 &m) : m_(m) {
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = m.determinant();
    if (!(ortho <= kTolerance) || !(std::abs(det - 1.0) <= kTolerance)) {
        std::ostringstream msg;
        msg << "not a rotation matrix (orthogonality error " << ortho << ", det " << det << ")";
        throw std::invalid_argument(msg.str());
    }
}

Rotation Rotation::nearest(const Mat3 &m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    return Rotation(svd.matrixU() * d * svd.matrixV().transpose(), Unchecked{});
}

Rotation Rotation::inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation Rotation::operator*(const Rotation &rhs) const { return Rotation(m_ * rhs.m_, Unchecked{}); }

Mat3 skew(const Vec3 &v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return s;
}

Rotation rotation_from_angle_axis(const Vec3 &angle_axis) {
    const double theta2 = angle_axis.squaredNorm();
    const Mat3 k = skew(angle_axis);
    if (theta2 < 1e-16) {
        // Second-order Taylor expansion keeps the result orthonormal to ~1e-24.
        return Rotation::nearest(Mat3::Identity() + k + 0.5 * k * k);
    }
    const double theta = std::sqrt(theta2);
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / theta2;
    return Rotation::nearest(Mat3::Identity() + a * k + b * k * k);
}

Vec3 rotation_to_angle_axis(const Rotation &r) {
    const Mat3 &m = r.matrix();
    const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    const double s = 0.5 * w.norm();                       // sin(theta)
    const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);  // cos(theta)
    const double theta = std::atan2(s, c);

    if (s < 1e-7 && c > 0.0) {
        // Near identity: theta / sin(theta) ~ 1 + theta^2 / 6.
        return 0.5 * (1.0 + theta * theta / 6.0) * w;
    }
    if (c > -0.9) {
        return theta / (2.0 * s) * w;
    }

    // Near pi: recover the axis from the symmetric part R + R^T = 2cI + 2(1-c)nn^T
    // using the column with the largest diagonal contribution.
    const Mat3 sym = 0.5 * (m + m.transpose()) - c * Mat3::Identity();
    int k = 0;
    sym.diagonal().maxCoeff(&k);
    Vec3 axis = sym.col(k);
    axis.normalize();
    if (s > 1e-12) {
        // Antisymmetric part still carries a usable sign.
        if (axis.dot(w) < 0.0) axis = -axis;
        return theta * axis;
    }
    for (int i = 0; i < 3; ++i) {
        if (std::abs(axis[i]) > 1e-12) {
            if (axis[i] < 0.0) axis = -axis;
            break;
        }
    }
    return theta * axis;
}

Rotation rotation_from_quaternion(double w, double x, double y, double z) {
    Eigen::Quaterniond q(w, x, y, z);
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("quaternion has zero or non-finite norm");
    q.coeffs() /= n;
    return Rotation::nearest(q.toRotationMatrix());
}

Rotation rotation_from_yaw_pitch_roll(double yaw, double pitch, double roll) {
    // Camera-to-world: yaw about +Y (Z toward X), pitch about +X with
    // positive pitch lifting the axis toward -Y, roll about the optical axis.
    const Eigen::AngleAxisd ry(yaw, Vec3::UnitY());
    const Eigen::AngleAxisd rx(pitch, Vec3::UnitX());
    const Eigen::AngleAxisd rz(roll, Vec3::UnitZ());
    const Mat3 cam_to_world = (ry * rx * rz).toRotationMatrix();
    return Rotation::nearest(cam_to_world.transpose());
}

double rotation_angle_between(const Rotation &a, const Rotation &b) {
    return rotation_to_angle_axis(a.inverse() * b).norm();
}

Vec3 Camera::optical_axis() const { return rotation.matrix().transpose() * Vec3::UnitZ(); }

Mat3 normalize_homography(const Mat3 &h) {
    if (std::abs(h(2, 2)) >= 1e-12) return h / h(2, 2);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    h.cwiseAbs().maxCoeff(&r, &c);
    return h / h(r, c);
}

Mat3 homography_between(const Camera &from, const Camera &to) {
    const Mat3 h = to.intrinsics.matrix() * to.rotation.matrix() * from.rotation.matrix().transpose() *
                   from.intrinsics.inverse_matrix();
    return normalize_homography(h);
}

Vec3 pixel_to_ray(const Camera &cam, const Vec2 &pixel) {
    const Vec3 local = cam.intrinsics.inverse_matrix() * Vec3(pixel.x(), pixel.y(), 1.0);
    return cam.rotation.matrix().transpose() * local.normalized();
}

std::optional<Vec2> ray_to_pixel(const Camera &cam, const Vec3 &ray) {
    constexpr double kMinDepth = 1e-9;
    const Vec3 local = cam.rotation.matrix() * ray;
    if (local.z() <= kMinDepth) return std::nullopt;
    const Intrinsics &k = cam.intrinsics;
    return Vec2(k.focal * local.x() / local.z() + k.principal_x, k.focal * local.y() / local.z() + k.principal_y);
}

Intrinsics rescale_intrinsics(const Intrinsics &k, int new_width, int new_height) {
    k.validate();
    if (new_width <= 0 || new_height <= 0) {
        throw std::invalid_argument("rescale_intrinsics: new dimensions must be positive");
    }
    const double sx = static_cast<double>(new_width) / k.width;
    const double sy = static_cast<double>(new_height) / k.height;
    if (std::abs(sx - sy) > 0.01 * std::max(sx, sy)) {
        std::ostringstream msg;
        msg << "rescale_intrinsics: anisotropic resize " << k.width << "x" << k.height << " -> " << new_width << "x"
            << new_height;
        throw AnisotropicScaleError(msg.str());
    }
    Intrinsics out = k;
    out.focal = k.focal * sx;
    out.principal_x = k.principal_x * sx;
    out.principal_y = k.principal_y * sy;
    out.width = new_width;
    out.height = new_height;
    return out;
}

Mat3 so3_right_jacobian(const Vec3 &angle_axis) {
    const double theta2 = angle_axis.squaredNorm();
    const Mat3 k = skew(angle_axis);
    if (theta2 < 1e-10) {
        return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
    }
    const double theta = std::sqrt(theta2);
    return Mat3::Identity() - (1.0 - std::cos(theta)) / theta2 * k + (theta - std::sin(theta)) / (theta2 * theta) * k * k;
}

}  // namespace pano
