#pragma once

// Rotation-only bundle adjustment over 2D-2D point matches. Each match
// (x_i, x_j) contributes the residual x_j - project(H_ij * x_i) with
// H_ij = K_j R_j R_i^T K_i^-1, and Levenberg-Marquardt refines focal length,
// principal point and rotation of every camera. Camera 0's rotation is the
// gauge and stays fixed.

#include "pano/geometry.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pano {

struct MatchFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DisconnectedGraphError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PointPair {
    Vec2 from;  ///< pixel in camera i
    Vec2 to;    ///< pixel in camera j
};

struct PairMatches {
    int i = 0;
    int j = 0;
    std::vector<PointPair> points;
};

struct MatchSet {
    std::vector<PairMatches> pairs;

    /// Appends to the pair (i, j), creating it on first use.
    void add(int i, int j, const Vec2 &from, const Vec2 &to);
    std::size_t point_count() const;
    /// Throws std::invalid_argument on out-of-range indices, i == j or empty pairs.
    void validate(int camera_count) const;
};

/// Reads lines of the form "match i j x_i y_i x_j y_j". Blank lines and
/// lines starting with '#' are skipped. Throws MatchFormatError naming the
/// offending line.
MatchSet parse_matches(std::istream &in);
MatchSet load_matches(const std::string &path);
void write_matches(std::ostream &out, const MatchSet &matches);

/// True when every camera is reachable from camera 0 through matched pairs.
bool match_graph_connected(int camera_count, const MatchSet &matches);

/// Residual magnitude used per coordinate when a reprojection is at infinity.
inline constexpr double kCappedResidual = 1e6;

/// H_ij applied to x_i; nullopt when the homogeneous scale is below 1e-12.
std::optional<Vec2> reproject(const Vec2 &x_i, const Camera &cam_i, const Camera &cam_j);

struct BundleOptions {
    /// All cameras share one focal length (initialized from camera 0).
    bool shared_focal = true;
    /// Principal points stay where they are.
    bool fixed_principal = true;
    bool huber = false;
    double huber_scale = 2.0;
    double initial_lambda = 1e-3;
    int max_iterations = 100;
    double min_relative_decrease = 1e-9;
    double min_step = 1e-12;
    double min_focal = 1e-3;
};

/// Positions of the free parameters inside the stacked vector.
class ParamLayout {
public:
    ParamLayout(int camera_count, const BundleOptions &options);

    int size() const { return size_; }
    int camera_count() const { return cameras_; }
    int focal_index(int cam) const;
    /// -1 when principal points are fixed.
    int principal_index(int cam) const;
    /// -1 for camera 0.
    int rotation_index(int cam) const;

private:
    int cameras_ = 0;
    bool shared_focal_ = true;
    bool fixed_principal_ = true;
    int size_ = 0;
    std::vector<int> focal_;
    std::vector<int> principal_;
    std::vector<int> rotation_;
};

class BundleProblem {
public:
    /// Throws DisconnectedGraphError when the match graph is not connected,
    /// std::invalid_argument for malformed matches.
    BundleProblem(std::vector<Camera> cameras, MatchSet matches, BundleOptions options = {});

    const ParamLayout &layout() const { return layout_; }
    const MatchSet &matches() const { return matches_; }
    const BundleOptions &options() const { return options_; }
    int residual_count() const { return static_cast<int>(2 * matches_.point_count()); }

    Eigen::VectorXd pack() const;
    std::vector<Camera> unpack(const Eigen::VectorXd &params) const;

    /// Stacked x_j - reproject(x_i). Reprojections at infinity yield
    /// kCappedResidual per coordinate and are counted in `capped`.
    Eigen::VectorXd residuals(const Eigen::VectorXd &params, int *capped = nullptr) const;
    /// Analytic d(residuals)/d(params).
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd &params) const;
    /// Sum of squared residuals, or the Huber cost when enabled.
    double cost(const Eigen::VectorXd &params) const;

private:
    std::vector<Camera> base_;
    MatchSet matches_;
    BundleOptions options_;
    ParamLayout layout_;
    std::vector<std::size_t> offsets_;  // first point index of each pair
};

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Solves (J^T J + lambda I) dc = J^T r with a sparse LDL^T factorization.
/// The caller applies c <- c - dc. Throws FactorizationError on failure.
Eigen::VectorXd lm_step(const Eigen::SparseMatrix<double> &jacobian, const Eigen::VectorXd &residuals,
                        double lambda);

enum class StopReason { RelativeDecrease, SmallStep, MaxIterations, ZeroCost, DampingLimit };
std::string stop_reason_name(StopReason reason);

struct SolveReport {
    double initial_cost = 0.0;
    double final_cost = 0.0;
    double initial_rms = 0.0;
    double final_rms = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
    std::vector<double> lambda_history;
    /// Cost before the first step and after every accepted step.
    std::vector<double> cost_history;
    StopReason reason = StopReason::MaxIterations;
};

struct BundleResult {
    std::vector<Camera> cameras;
    SolveReport report;
};

/// Levenberg-Marquardt: lambda starts at options.initial_lambda, is divided
/// by 10 after an accepted step and multiplied by 10 after a rejected one.
/// Never throws for lack of convergence; the best parameters are returned.
BundleResult optimize(const BundleProblem &problem);
BundleResult optimize(const std::vector<Camera> &cameras, const MatchSet &matches, const BundleOptions &options = {});

/// Root-mean-square reprojection error in pixels over all matches.
double rms_reprojection_error(const std::vector<Camera> &cameras, const MatchSet &matches);

}  // namespace pano
