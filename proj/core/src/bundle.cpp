#include "pano/bundle.hpp"

#include "pano/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pano {

void MatchSet::add(int i, int j, const Vec2 &from, const Vec2 &to) {
    for (auto &p : pairs) {
        if (p.i == i && p.j == j) {
            p.points.push_back({from, to});
            return;
        }
    }
    pairs.push_back(PairMatches{i, j, {{from, to}}});
}

std::size_t MatchSet::point_count() const {
    std::size_t n = 0;
    for (const auto &p : pairs) n += p.points.size();
    return n;
}

void MatchSet::validate(int camera_count) const {
    for (const auto &p : pairs) {
        if (p.i < 0 || p.j < 0 || p.i >= camera_count || p.j >= camera_count) {
            throw std::invalid_argument("match references camera index out of range: " + std::to_string(p.i) + " " +
                                        std::to_string(p.j));
        }
        if (p.i == p.j) throw std::invalid_argument("match pairs a camera with itself: " + std::to_string(p.i));
        if (p.points.empty()) throw std::invalid_argument("match pair without points");
    }
}

MatchSet parse_matches(std::istream &in) {
    MatchSet set;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        int i = 0;
        int j = 0;
        double xi = 0, yi = 0, xj = 0, yj = 0;
        ss >> tag;
        if (tag != "match" || !(ss >> i >> j >> xi >> yi >> xj >> yj)) {
            throw MatchFormatError("match file line " + std::to_string(lineno) + ": expected 'match i j x_i y_i x_j y_j'");
        }
        std::string extra;
        if (ss >> extra) throw MatchFormatError("match file line " + std::to_string(lineno) + ": trailing fields");
        if (!std::isfinite(xi) || !std::isfinite(yi) || !std::isfinite(xj) || !std::isfinite(yj)) {
            throw MatchFormatError("match file line " + std::to_string(lineno) + ": non-finite coordinate");
        }
        set.add(i, j, Vec2(xi, yi), Vec2(xj, yj));
    }
    return set;
}

MatchSet load_matches(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw MatchFormatError("cannot open match file '" + path + "'");
    return parse_matches(in);
}

void write_matches(std::ostream &out, const MatchSet &matches) {
    out << std::setprecision(17);
    for (const auto &p : matches.pairs) {
        for (const auto &pt : p.points) {
            out << "match " << p.i << ' ' << p.j << ' ' << pt.from.x() << ' ' << pt.from.y() << ' ' << pt.to.x() << ' '
                << pt.to.y() << '\n';
        }
    }
}

bool match_graph_connected(int camera_count, const MatchSet &matches) {
    if (camera_count <= 1) return true;
    std::vector<int> parent(static_cast<std::size_t>(camera_count));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto &p : matches.pairs) {
        if (p.i < 0 || p.j < 0 || p.i >= camera_count || p.j >= camera_count || p.points.empty()) continue;
        parent[find(p.i)] = find(p.j);
    }
    const int root = find(0);
    for (int c = 1; c < camera_count; ++c) {
        if (find(c) != root) return false;
    }
    return true;
}

std::optional<Vec2> reproject(const Vec2 &x_i, const Camera &cam_i, const Camera &cam_j) {
    const Mat3 h = cam_j.intrinsics.matrix() * cam_j.rotation.matrix() * cam_i.rotation.matrix().transpose() *
                   cam_i.intrinsics.inverse_matrix();
    const Vec3 p = h * Vec3(x_i.x(), x_i.y(), 1.0);
    if (std::abs(p.z()) < 1e-12) return std::nullopt;
    return Vec2(p.x() / p.z(), p.y() / p.z());
}

// ---------------------------------------------------------------------------

ParamLayout::ParamLayout(int camera_count, const BundleOptions &options)
    : cameras_(camera_count), shared_focal_(options.shared_focal), fixed_principal_(options.fixed_principal) {
    if (camera_count < 1) throw std::invalid_argument("bundle adjustment needs at least one camera");
    focal_.assign(static_cast<std::size_t>(camera_count), -1);
    principal_.assign(static_cast<std::size_t>(camera_count), -1);
    rotation_.assign(static_cast<std::size_t>(camera_count), -1);
    int next = 0;
    if (shared_focal_) {
        std::fill(focal_.begin(), focal_.end(), next++);
    }
    for (int c = 0; c < camera_count; ++c) {
        if (!shared_focal_) focal_[c] = next++;
        if (!fixed_principal_) {
            principal_[c] = next;
            next += 2;
        }
        if (c > 0) {
            rotation_[c] = next;
            next += 3;
        }
    }
    size_ = next;
}

int ParamLayout::focal_index(int cam) const { return focal_.at(static_cast<std::size_t>(cam)); }
int ParamLayout::principal_index(int cam) const { return principal_.at(static_cast<std::size_t>(cam)); }
int ParamLayout::rotation_index(int cam) const { return rotation_.at(static_cast<std::size_t>(cam)); }

BundleProblem::BundleProblem(std::vector<Camera> cameras, MatchSet matches, BundleOptions options)
    : base_(std::move(cameras)), matches_(std::move(matches)), options_(options),
      layout_(static_cast<int>(base_.size()), options_) {
    matches_.validate(static_cast<int>(base_.size()));
    if (!match_graph_connected(static_cast<int>(base_.size()), matches_)) {
        throw DisconnectedGraphError("camera match graph is not connected");
    }
    std::size_t off = 0;
    for (const auto &p : matches_.pairs) {
        offsets_.push_back(off);
        off += p.points.size();
    }
}

Eigen::VectorXd BundleProblem::pack() const {
    Eigen::VectorXd c(layout_.size());
    for (int k = 0; k < layout_.camera_count(); ++k) {
        const Camera &cam = base_[k];
        // Shared focal takes camera 0's value.
        if (!options_.shared_focal || k == 0) c(layout_.focal_index(k)) = cam.intrinsics.focal;
        if (layout_.principal_index(k) >= 0) {
            c(layout_.principal_index(k)) = cam.intrinsics.principal_x;
            c(layout_.principal_index(k) + 1) = cam.intrinsics.principal_y;
        }
        if (layout_.rotation_index(k) >= 0) c.segment<3>(layout_.rotation_index(k)) = rotation_to_angle_axis(cam.rotation);
    }
    return c;
}

std::vector<Camera> BundleProblem::unpack(const Eigen::VectorXd &c) const {
    std::vector<Camera> out = base_;
    for (int k = 0; k < layout_.camera_count(); ++k) {
        Camera &cam = out[k];
        cam.intrinsics.focal = c(layout_.focal_index(k));
        if (layout_.principal_index(k) >= 0) {
            cam.intrinsics.principal_x = c(layout_.principal_index(k));
            cam.intrinsics.principal_y = c(layout_.principal_index(k) + 1);
        }
        if (layout_.rotation_index(k) >= 0) {
            cam.rotation = rotation_from_angle_axis(c.segment<3>(layout_.rotation_index(k)));
        }
    }
    return out;
}

Eigen::VectorXd BundleProblem::residuals(const Eigen::VectorXd &params, int *capped) const {
    const std::vector<Camera> cams = unpack(params);
    Eigen::VectorXd r(residual_count());
    std::vector<int> capped_per_pair(matches_.pairs.size(), 0);
    parallel_for(0, static_cast<int>(matches_.pairs.size()), [&](int pi) {
        const PairMatches &pm = matches_.pairs[pi];
        for (std::size_t k = 0; k < pm.points.size(); ++k) {
            const std::size_t row = 2 * (offsets_[pi] + k);
            const auto p = reproject(pm.points[k].from, cams[pm.i], cams[pm.j]);
            if (p) {
                r.segment<2>(static_cast<Eigen::Index>(row)) = pm.points[k].to - *p;
            } else {
                r.segment<2>(static_cast<Eigen::Index>(row)).setConstant(kCappedResidual);
                ++capped_per_pair[pi];
            }
        }
    });
    if (capped) *capped = std::accumulate(capped_per_pair.begin(), capped_per_pair.end(), 0);
    return r;
}

Eigen::SparseMatrix<double> BundleProblem::jacobian(const Eigen::VectorXd &params) const {
    using Triplet = Eigen::Triplet<double>;
    const std::vector<Camera> cams = unpack(params);
    std::vector<Mat3> jr(cams.size());
    for (std::size_t k = 0; k < cams.size(); ++k) {
        if (layout_.rotation_index(static_cast<int>(k)) >= 0) {
            jr[k] = so3_right_jacobian(params.segment<3>(layout_.rotation_index(static_cast<int>(k))));
        }
    }

    std::vector<std::vector<Triplet>> per_pair(matches_.pairs.size());
    parallel_for(0, static_cast<int>(matches_.pairs.size()), [&](int pi) {
        const PairMatches &pm = matches_.pairs[pi];
        const Camera &ci = cams[pm.i];
        const Camera &cj = cams[pm.j];
        const Mat3 ri = ci.rotation.matrix();
        const Mat3 rj = cj.rotation.matrix();
        const Mat3 rji = rj * ri.transpose();
        const double fi = ci.intrinsics.focal;
        const double fj = cj.intrinsics.focal;
        auto &trip = per_pair[pi];

        for (std::size_t k = 0; k < pm.points.size(); ++k) {
            const int row = static_cast<int>(2 * (offsets_[pi] + k));
            const Vec2 &x = pm.points[k].from;
            const Vec3 v((x.x() - ci.intrinsics.principal_x) / fi, (x.y() - ci.intrinsics.principal_y) / fi, 1.0);
            const Vec3 w = ri.transpose() * v;
            const Vec3 y = rj * w;
            if (std::abs(y.z()) < 1e-12) continue;  // capped residual, zero derivative

            Eigen::Matrix<double, 2, 3> dp_dy;
            dp_dy << fj / y.z(), 0.0, -fj * y.x() / (y.z() * y.z()), 0.0, fj / y.z(), -fj * y.y() / (y.z() * y.z());
            const Eigen::Matrix<double, 2, 3> dp_dv = dp_dy * rji;

            // Residual = x_j - p, so every derivative is negated.
            std::map<int, Vec2> cols;
            auto add = [&](int col, const Vec2 &dp) {
                if (col < 0) return;
                auto [it, inserted] = cols.try_emplace(col, Vec2::Zero());
                it->second -= dp;
            };
            add(layout_.focal_index(pm.j), Vec2(y.x() / y.z(), y.y() / y.z()));
            add(layout_.focal_index(pm.i), dp_dv * Vec3(-v.x() / fi, -v.y() / fi, 0.0));
            if (layout_.principal_index(pm.j) >= 0) {
                add(layout_.principal_index(pm.j), Vec2(1.0, 0.0));
                add(layout_.principal_index(pm.j) + 1, Vec2(0.0, 1.0));
            }
            if (layout_.principal_index(pm.i) >= 0) {
                add(layout_.principal_index(pm.i), dp_dv.col(0) * (-1.0 / fi));
                add(layout_.principal_index(pm.i) + 1, dp_dv.col(1) * (-1.0 / fi));
            }
            if (layout_.rotation_index(pm.j) >= 0) {
                const Eigen::Matrix<double, 2, 3> d = dp_dy * (-rj * skew(w) * jr[pm.j]);
                for (int a = 0; a < 3; ++a) add(layout_.rotation_index(pm.j) + a, d.col(a));
            }
            if (layout_.rotation_index(pm.i) >= 0) {
                const Eigen::Matrix<double, 2, 3> d = dp_dy * (rj * skew(w) * jr[pm.i]);
                for (int a = 0; a < 3; ++a) add(layout_.rotation_index(pm.i) + a, d.col(a));
            }
            for (const auto &[col, val] : cols) {
                trip.emplace_back(row, col, val.x());
                trip.emplace_back(row + 1, col, val.y());
            }
        }
    });

    std::vector<Triplet> all;
    for (const auto &t : per_pair) all.insert(all.end(), t.begin(), t.end());
    Eigen::SparseMatrix<double> j(residual_count(), layout_.size());
    j.setFromTriplets(all.begin(), all.end());
    return j;
}

namespace {

// Per-point IRLS weights for the Huber loss; all ones without it.
Eigen::VectorXd huber_row_weights(const Eigen::VectorXd &r, const BundleOptions &options) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(r.size());
    if (!options.huber) return w;
    for (Eigen::Index k = 0; k + 1 < r.size(); k += 2) {
        const double e = std::hypot(r(k), r(k + 1));
        if (e > options.huber_scale) w(k) = w(k + 1) = std::sqrt(options.huber_scale / e);
    }
    return w;
}

double cost_of(const Eigen::VectorXd &r, const BundleOptions &options) {
    if (!options.huber) return r.squaredNorm();
    double c = 0.0;
    const double d = options.huber_scale;
    for (Eigen::Index k = 0; k + 1 < r.size(); k += 2) {
        const double e = std::hypot(r(k), r(k + 1));
        c += e <= d ? e * e : 2.0 * d * e - d * d;
    }
    return c;
}

double rms_of(const Eigen::VectorXd &r) {
    if (r.size() == 0) return 0.0;
    return std::sqrt(r.squaredNorm() / (0.5 * static_cast<double>(r.size())));
}

}  // namespace

double BundleProblem::cost(const Eigen::VectorXd &params) const { return cost_of(residuals(params), options_); }

Eigen::VectorXd lm_step(const Eigen::SparseMatrix<double> &jacobian, const Eigen::VectorXd &residuals,
                        double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("damping must be >= 0");
    if (jacobian.rows() != residuals.size()) throw std::invalid_argument("lm_step: shape mismatch");
    Eigen::SparseMatrix<double> normal = jacobian.transpose() * jacobian;
    if (lambda > 0.0) {
        Eigen::SparseMatrix<double> damping(normal.rows(), normal.cols());
        damping.setIdentity();
        normal += lambda * damping;
    }
    const Eigen::VectorXd rhs = jacobian.transpose() * residuals;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(normal);
    if (solver.info() != Eigen::Success) throw FactorizationError("normal equations could not be factorized");
    Eigen::VectorXd step = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !step.allFinite()) {
        throw FactorizationError("normal equations could not be solved");
    }
    return step;
}

std::string stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::RelativeDecrease: return "relative_decrease";
        case StopReason::SmallStep: return "small_step";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::ZeroCost: return "zero_cost";
        case StopReason::DampingLimit: return "damping_limit";
    }
    return "unknown";
}

BundleResult optimize(const BundleProblem &problem) {
    const BundleOptions &opt = problem.options();
    Eigen::VectorXd c = problem.pack();
    Eigen::VectorXd r = problem.residuals(c);
    double cost = cost_of(r, opt);

    SolveReport rep;
    rep.initial_cost = cost;
    rep.initial_rms = rms_of(r);
    rep.cost_history.push_back(cost);
    double lambda = opt.initial_lambda;
    constexpr double kMaxLambda = 1e16;

    std::vector<int> focal_slots;
    for (int k = 0; k < problem.layout().camera_count(); ++k) focal_slots.push_back(problem.layout().focal_index(k));
    std::sort(focal_slots.begin(), focal_slots.end());
    focal_slots.erase(std::unique(focal_slots.begin(), focal_slots.end()), focal_slots.end());

    bool stopped = false;
    while (rep.iterations < opt.max_iterations) {
        if (cost == 0.0) {
            rep.reason = StopReason::ZeroCost;
            stopped = true;
            break;
        }
        ++rep.iterations;
        rep.lambda_history.push_back(lambda);

        Eigen::SparseMatrix<double> j = problem.jacobian(c);
        Eigen::VectorXd rw = r;
        if (opt.huber) {
            const Eigen::VectorXd w = huber_row_weights(r, opt);
            rw = r.cwiseProduct(w);
            j = w.asDiagonal() * j;
        }
        Eigen::VectorXd step;
        try {
            step = lm_step(j, rw, lambda);
        } catch (const FactorizationError &) {
            lambda *= 10.0;
            if (lambda > kMaxLambda) {
                rep.reason = StopReason::DampingLimit;
                stopped = true;
                break;
            }
            continue;
        }
        if (step.norm() < opt.min_step) {
            rep.reason = StopReason::SmallStep;
            stopped = true;
            break;
        }

        Eigen::VectorXd trial = c - step;
        for (int s : focal_slots) trial(s) = std::max(trial(s), opt.min_focal);
        const Eigen::VectorXd r_trial = problem.residuals(trial);
        const double trial_cost = cost_of(r_trial, opt);

        if (trial_cost < cost) {
            const double rel = (cost - trial_cost) / cost;
            c = trial;
            r = r_trial;
            cost = trial_cost;
            ++rep.accepted_steps;
            rep.cost_history.push_back(cost);
            lambda = std::max(lambda / 10.0, 1e-300);
            if (rel < opt.min_relative_decrease) {
                rep.reason = StopReason::RelativeDecrease;
                stopped = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > kMaxLambda) {
                rep.reason = StopReason::DampingLimit;
                stopped = true;
                break;
            }
        }
    }
    if (!stopped) rep.reason = cost == 0.0 ? StopReason::ZeroCost : StopReason::MaxIterations;

    rep.final_cost = cost;
    rep.final_rms = rms_of(r);
    return BundleResult{problem.unpack(c), rep};
}

BundleResult optimize(const std::vector<Camera> &cameras, const MatchSet &matches, const BundleOptions &options) {
    return optimize(BundleProblem(cameras, matches, options));
}

double rms_reprojection_error(const std::vector<Camera> &cameras, const MatchSet &matches) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &p : matches.pairs) {
        for (const auto &pt : p.points) {
            const auto q = reproject(pt.from, cameras.at(static_cast<std::size_t>(p.i)),
                                     cameras.at(static_cast<std::size_t>(p.j)));
            const Vec2 e = q ? Vec2(pt.to - *q) : Vec2(kCappedResidual, kCappedResidual);
            sum += e.squaredNorm();
            ++n;
        }
    }
    return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

}  // namespace pano
