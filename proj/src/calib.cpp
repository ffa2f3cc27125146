#include "drishti/calib.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "drishti/error.hpp"
#include "levenberg.hpp"
#include "text_util.hpp"

namespace drishti::calib {

namespace {

constexpr double kMinDepth = 1e-9;

Mat3 rotvec_to_matrix(const Vec3& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Vec3 matrix_to_rotvec(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

// Projection of a camera-frame point plus d(u,v)/d(X,Y,Z) and d(u,v)/d(fx,fy,cx,cy).
struct Projection {
  Vec2 uv;
  Eigen::Matrix<double, 2, 3> d_point;
  Eigen::Matrix<double, 2, 4> d_intr;
};

Projection project_camera_point(const CameraIntrinsics& k, const Vec3& pc) {
  const double iz = 1.0 / pc.z();
  const double xn = pc.x() * iz, yn = pc.y() * iz;
  Projection p;
  p.uv = Vec2(k.fx * xn + k.cx, k.fy * yn + k.cy);
  p.d_point << k.fx * iz, 0.0, -k.fx * xn * iz, 0.0, k.fy * iz, -k.fy * yn * iz;
  p.d_intr << xn, 0.0, 1.0, 0.0, 0.0, yn, 0.0, 1.0;
  return p;
}

Pose perturb(const Pose& pose, const Eigen::Ref<const Eigen::VectorXd>& delta6) {
  const Mat3 r = rotvec_to_matrix(Vec3(delta6.head<3>())) * pose.rotation_matrix();
  return Pose{matrix_to_rotvec(r), pose.translation + Vec3(delta6.tail<3>())};
}

void perturb_intrinsics(CameraIntrinsics& k, const Eigen::Ref<const Eigen::VectorXd>& d4) {
  k.fx += d4(0);
  k.fy += d4(1);
  k.cx += d4(2);
  k.cy += d4(3);
}

std::vector<Vec2> to_vec2(std::span<const io::Corner> corners) {
  std::vector<Vec2> out;
  out.reserve(corners.size());
  for (const auto& c : corners) out.emplace_back(c.u, c.v);
  return out;
}

std::vector<Vec2> board_plane_points(const io::BoardModel& board) {
  std::vector<Vec2> out;
  for (const auto& p : board_points(board)) out.emplace_back(p.x(), p.y());
  return out;
}

// Hartley normalization: centroid to origin, mean distance sqrt(2).
Mat3 normalizing_transform(std::span<const Vec2> pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  const double s = dist > 0.0 ? std::numbers::sqrt2 / dist : 1.0;
  Mat3 t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

bool collinear(std::span<const Vec2> pts, const Mat3& norm) {
  Eigen::MatrixXd centered(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 q = norm * pts[i].homogeneous();
    centered.col(static_cast<Eigen::Index>(i)) = q.head<2>();
  }
  const Vec2 mean = centered.rowwise().mean();
  centered.colwise() -= mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto sv = svd.singularValues();
  return sv(1) <= 1e-9 * std::max(sv(0), 1e-300);
}

struct ViewPair {
  std::uint32_t id;
  const io::ViewObservation* left;
  const io::ViewObservation* right;
};

void require_single_camera(const io::CornerObservationSet& obs) {
  std::set<std::uint32_t> ids;
  for (const auto& v : obs.views) {
    if (!ids.insert(v.view_id).second)
      throw Error(Errc::ViewMismatch, fmt::format("view {} appears for more than one camera", v.view_id));
    if (v.corners.size() != obs.board.corner_count())
      throw Error(Errc::IncompleteView, fmt::format("view {} has {} corners", v.view_id, v.corners.size()));
  }
}

CoverageBuckets aggregate_coverage(const std::vector<const io::ViewObservation*>& views, const std::vector<Pose>& poses,
                                   ImageSize size) {
  CoverageBuckets total;
  for (std::size_t i = 0; i < views.size(); ++i) total |= classify_coverage(views[i]->corners, poses[i], size);
  return total;
}

detail::LevenbergOptions to_lm(const SolverOptions& o) {
  detail::LevenbergOptions lm;
  lm.initial_lambda = o.initial_lambda;
  lm.lambda_up = o.lambda_up;
  lm.lambda_down = o.lambda_down;
  lm.relative_tolerance = o.relative_tolerance;
  lm.max_iterations = o.max_iterations;
  return lm;
}

bool pose_finite(const Pose& p) { return p.rotation.allFinite() && p.translation.allFinite(); }

}  // namespace

// ---------------------------------------------------------------------------

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

CameraIntrinsics CameraIntrinsics::from_physical(double focal_mm, double pixel_size_mm, double cx, double cy) {
  const double f_px = focal_mm / pixel_size_mm;
  return CameraIntrinsics{f_px, f_px, cx, cy, pixel_size_mm};
}

Mat3 Pose::rotation_matrix() const { return rotvec_to_matrix(rotation); }

Pose Pose::from_matrix(const Mat3& r, const Vec3& t) { return Pose{matrix_to_rotvec(r), t}; }

CoverageBuckets& CoverageBuckets::operator|=(const CoverageBuckets& o) {
  x_left |= o.x_left;
  x_right |= o.x_right;
  y_top |= o.y_top;
  y_bottom |= o.y_bottom;
  skew |= o.skew;
  size_fill |= o.size_fill;
  size_far |= o.size_far;
  overall_tilt |= o.overall_tilt;
  return *this;
}

std::vector<std::pair<std::string, bool>> CoverageBuckets::entries() const {
  return {{"x_left", x_left}, {"x_right", x_right},     {"y_top", y_top},       {"y_bottom", y_bottom},
          {"skew", skew},     {"size_fill", size_fill}, {"size_far", size_far}, {"overall_tilt", overall_tilt}};
}

std::vector<std::string> CoverageBuckets::unfilled() const {
  std::vector<std::string> out;
  for (const auto& [name, value] : entries())
    if (!value) out.push_back(name);
  return out;
}

std::vector<Vec3> board_points(const io::BoardModel& board) {
  std::vector<Vec3> pts;
  pts.reserve(board.corner_count());
  for (std::uint32_t r = 0; r < board.rows; ++r)
    for (std::uint32_t c = 0; c < board.cols; ++c) pts.emplace_back(c * board.square_size, r * board.square_size, 0.0);
  return pts;
}

Vec2 project_point(const CameraIntrinsics& intr, const Pose& pose, const Vec3& point) {
  const Vec3 pc = pose.apply(point);
  if (!(pc.z() > 0.0)) throw Error(Errc::BehindCamera, fmt::format("camera-frame depth {}", pc.z()));
  return Vec2(intr.fx * pc.x() / pc.z() + intr.cx, intr.fy * pc.y() / pc.z() + intr.cy);
}

io::CornerObservationSet generate_synthetic_observations(const CameraIntrinsics& intr, const std::optional<StereoRig>& rig,
                                                         std::span<const Pose> poses, const io::BoardModel& board,
                                                         double noise_sigma_px, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma_px > 0.0 ? noise_sigma_px : 1.0);
  const auto sample = [&] { return noise_sigma_px > 0.0 ? noise(rng) : 0.0; };

  const auto pts = board_points(board);
  io::CornerObservationSet set;
  set.board = board;
  const CameraIntrinsics& left_k = rig ? rig->left : intr;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    io::ViewObservation left{static_cast<std::uint32_t>(i), io::CameraSide::Left, {}};
    for (const auto& p : pts) {
      const Vec2 uv = project_point(left_k, poses[i], p);
      const double du = sample();
      const double dv = sample();
      left.corners.push_back({uv.x() + du, uv.y() + dv});
    }
    set.views.push_back(std::move(left));
    if (rig) {
      const Mat3 rrel = rotvec_to_matrix(rig->relative_rotation);
      const Pose right_pose = Pose::from_matrix(rrel * poses[i].rotation_matrix(),
                                                rrel * poses[i].translation + rig->baseline_vector);
      io::ViewObservation right{static_cast<std::uint32_t>(i), io::CameraSide::Right, {}};
      for (const auto& p : pts) {
        const Vec2 uv = project_point(rig->right, right_pose, p);
        const double du = sample();
        const double dv = sample();
        right.corners.push_back({uv.x() + du, uv.y() + dv});
      }
      set.views.push_back(std::move(right));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------

Mat3 estimate_homography(std::span<const Vec2> board_pts, std::span<const Vec2> img_pts) {
  if (board_pts.size() != img_pts.size())
    throw Error(Errc::DegenerateConfiguration, "point lists differ in length");
  if (board_pts.size() < 4) throw Error(Errc::DegenerateConfiguration, "need at least 4 correspondences");
  for (std::size_t i = 0; i < board_pts.size(); ++i)
    if (!board_pts[i].allFinite() || !img_pts[i].allFinite())
      throw Error(Errc::DegenerateConfiguration, "non-finite coordinate");

  const Mat3 tb = normalizing_transform(board_pts);
  const Mat3 ti = normalizing_transform(img_pts);
  if (collinear(board_pts, tb) || collinear(img_pts, ti))
    throw Error(Errc::DegenerateConfiguration, "points are collinear");

  const auto n = static_cast<Eigen::Index>(board_pts.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 b = tb * board_pts[static_cast<std::size_t>(i)].homogeneous();
    const Vec3 m = ti * img_pts[static_cast<std::size_t>(i)].homogeneous();
    const double x = b.x(), y = b.y(), u = m.x(), v = m.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (sv(7) <= 1e-12 * sv(0)) throw Error(Errc::DegenerateConfiguration, "rank-deficient DLT system");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Mat3 hm = ti.inverse() * hn * tb;
  if (std::abs(hm(2, 2)) < 1e-300) throw Error(Errc::DegenerateConfiguration, "homography maps origin to infinity");
  return hm / hm(2, 2);
}

CameraIntrinsics init_intrinsics(std::span<const Mat3> homographies, double pixel_size_mm) {
  if (homographies.size() < 3)
    throw Error(Errc::TooFewViews, fmt::format("need >= 3 homographies, got {}", homographies.size()));

  // Normalize image coordinates so the conic system is well scaled.
  Vec2 mean = Vec2::Zero();
  for (const auto& h : homographies) mean += h.col(2).hnormalized();
  mean /= static_cast<double>(homographies.size());
  const double s = 1.0 / std::max(mean.norm(), 1.0);
  Mat3 t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;

  const auto v_row = [](const Mat3& h, int i, int j) {
    Eigen::Matrix<double, 1, 6> v;
    v << h(0, i) * h(0, j), h(0, i) * h(1, j) + h(1, i) * h(0, j), h(1, i) * h(1, j),
        h(2, i) * h(0, j) + h(0, i) * h(2, j), h(2, i) * h(1, j) + h(1, i) * h(2, j), h(2, i) * h(2, j);
    return v;
  };

  const auto n = static_cast<Eigen::Index>(homographies.size());
  Eigen::MatrixXd v(2 * n, 6);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Mat3 h = t * homographies[static_cast<std::size_t>(k)];
    Eigen::Matrix<double, 1, 6> r0 = v_row(h, 0, 1);
    Eigen::Matrix<double, 1, 6> r1 = v_row(h, 0, 0) - v_row(h, 1, 1);
    if (r0.norm() > 0) r0 /= r0.norm();
    if (r1.norm() > 0) r1 /= r1.norm();
    v.row(2 * k) = r0;
    v.row(2 * k + 1) = r1;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  const double condition = sv(4) > 0 ? sv(0) / sv(4) : std::numeric_limits<double>::infinity();
  if (!(condition < 1e8)) throw Error(Errc::IllConditioned, fmt::format("conic system condition {:.3g}", condition));

  Eigen::VectorXd b = svd.matrixV().col(5);
  if (b(0) < 0) b = -b;
  const double b11 = b(0), b12 = b(1), b22 = b(2), b13 = b(3), b23 = b(4), b33 = b(5);
  const double den = b11 * b22 - b12 * b12;
  if (!(b11 > 0) || !(den > 0)) throw Error(Errc::IllConditioned, "absolute conic is not positive definite");
  const double v0 = (b12 * b13 - b11 * b23) / den;
  const double lambda = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11;
  if (!(lambda / b11 > 0)) throw Error(Errc::IllConditioned, "negative conic scale");
  const double alpha = std::sqrt(lambda / b11);
  const double beta = std::sqrt(lambda * b11 / den);
  const double gamma = -b12 * alpha * alpha * beta / lambda;
  const double u0 = gamma * v0 / beta - b13 * alpha * alpha / lambda;

  // Undo the normalization: K = T^-1 K'.
  CameraIntrinsics k;
  k.fx = alpha / s;
  k.fy = beta / s;
  k.cx = u0 / s + mean.x();
  k.cy = v0 / s + mean.y();
  k.pixel_size_mm = pixel_size_mm;
  if (!(k.fx > 0) || !(k.fy > 0) || !std::isfinite(k.cx) || !std::isfinite(k.cy))
    throw Error(Errc::IllConditioned, "non-finite intrinsics");
  return k;
}

Pose pose_from_homography(const CameraIntrinsics& intr, const Mat3& homography) {
  const Mat3 a = intr.matrix().inverse() * homography;
  const double scale = 2.0 / (a.col(0).norm() + a.col(1).norm());
  Vec3 r1 = scale * a.col(0);
  Vec3 r2 = scale * a.col(1);
  Vec3 t = scale * a.col(2);
  if (t.z() < 0) {
    r1 = -r1;
    r2 = -r2;
    t = -t;
  }
  Mat3 r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  return Pose::from_matrix(nearest_rotation(r), t);
}

// ---------------------------------------------------------------------------

namespace {

struct MonoState {
  CameraIntrinsics k;
  std::vector<Pose> poses;
};

}  // namespace

CalibrationReport refine_calibration(const io::CornerObservationSet& obs, const CameraIntrinsics& init,
                                     const SolverOptions& options) {
  require_single_camera(obs);
  if (obs.views.empty()) throw Error(Errc::TooFewViews, "no views");

  const auto board2d = board_plane_points(obs.board);
  const auto board3d = board_points(obs.board);
  const std::size_t npts = board3d.size();

  MonoState state{init, {}};
  std::vector<const io::ViewObservation*> views;
  std::vector<std::vector<Vec2>> observed;
  for (const auto& view : obs.views) {
    views.push_back(&view);
    observed.push_back(to_vec2(view.corners));
    state.poses.push_back(pose_from_homography(init, estimate_homography(board2d, observed.back())));
  }
  const std::size_t nviews = views.size();
  const auto nparams = static_cast<Eigen::Index>(4 + 6 * nviews);
  const auto nres = static_cast<Eigen::Index>(2 * npts * nviews);

  detail::LeastSquaresProblem<MonoState> problem;
  problem.evaluate = [&](const MonoState& s, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(nres);
    if (jac) jac->setZero(nres, nparams);
    for (std::size_t v = 0; v < nviews; ++v) {
      const Mat3 rot = s.poses[v].rotation_matrix();
      const Vec3& t = s.poses[v].translation;
      const auto col = static_cast<Eigen::Index>(4 + 6 * v);
      for (std::size_t i = 0; i < npts; ++i) {
        const Vec3 rx = rot * board3d[i];
        const Vec3 pc = rx + t;
        if (!(pc.z() > kMinDepth)) return false;
        const Projection p = project_camera_point(s.k, pc);
        const auto row = static_cast<Eigen::Index>(2 * (v * npts + i));
        r.segment<2>(row) = p.uv - observed[v][i];
        if (jac) {
          jac->block<2, 4>(row, 0) = p.d_intr;
          jac->block<2, 3>(row, col) = -p.d_point * skew(rx);
          jac->block<2, 3>(row, col + 3) = p.d_point;
        }
      }
    }
    return true;
  };
  problem.retract = [nviews](const MonoState& s, const Eigen::VectorXd& d) {
    MonoState out = s;
    perturb_intrinsics(out.k, d.head<4>());
    for (std::size_t v = 0; v < nviews; ++v) out.poses[v] = perturb(s.poses[v], d.segment<6>(static_cast<Eigen::Index>(4 + 6 * v)));
    return out;
  };

  const auto result = detail::levenberg(state, problem, to_lm(options));
  if (!result.feasible_start) throw Error(Errc::BehindCamera, "initialization places corners behind the camera");
  if (!result.converged)
    throw Error(Errc::NonConvergence, fmt::format("no convergence in {} iterations", options.max_iterations));
  for (const auto& p : state.poses)
    if (!pose_finite(p)) throw Error(Errc::DivergedPose, "non-finite pose");
  if (!(state.k.fx > 0) || !(state.k.fy > 0)) throw Error(Errc::DivergedPose, "focal length collapsed");

  CalibrationReport report;
  report.intrinsics = state.k;
  report.intrinsics.pixel_size_mm = init.pixel_size_mm;
  for (const auto* v : views) report.view_ids.push_back(v->view_id);
  report.poses = state.poses;
  report.rms_px = std::sqrt(result.residuals.squaredNorm() / static_cast<double>(npts * nviews));
  report.coverage = aggregate_coverage(views, report.poses, options.image_size);
  report.cost_history = result.cost_history;
  report.iterations = result.iterations;
  return report;
}

CalibrationReport calibrate_camera(const io::CornerObservationSet& obs, double pixel_size_mm, const SolverOptions& options) {
  require_single_camera(obs);
  const auto board2d = board_plane_points(obs.board);
  std::vector<Mat3> hs;
  for (const auto& view : obs.views) hs.push_back(estimate_homography(board2d, to_vec2(view.corners)));
  return refine_calibration(obs, init_intrinsics(hs, pixel_size_mm), options);
}

// ---------------------------------------------------------------------------

namespace {

struct StereoState {
  CameraIntrinsics left;
  CameraIntrinsics right;
  Pose relative;
  std::vector<Pose> poses;
};

}  // namespace

StereoCalibration calibrate_stereo(const io::CornerObservationSet& left_obs, const io::CornerObservationSet& right_obs,
                                   const CameraIntrinsics& left_intr, const CameraIntrinsics& right_intr,
                                   const SolverOptions& options) {
  if (!(left_obs.board == right_obs.board)) throw Error(Errc::ViewMismatch, "boards differ between cameras");
  require_single_camera(left_obs);
  require_single_camera(right_obs);

  std::map<std::uint32_t, const io::ViewObservation*> right_by_id;
  for (const auto& v : right_obs.views) right_by_id[v.view_id] = &v;
  if (right_by_id.size() != left_obs.views.size())
    throw Error(Errc::ViewMismatch, fmt::format("{} left views vs {} right views", left_obs.views.size(), right_by_id.size()));
  std::vector<ViewPair> pairs;
  for (const auto& v : left_obs.views) {
    const auto it = right_by_id.find(v.view_id);
    if (it == right_by_id.end()) throw Error(Errc::ViewMismatch, fmt::format("view {} missing on the right", v.view_id));
    pairs.push_back({v.view_id, &v, it->second});
  }
  if (pairs.empty()) throw Error(Errc::TooFewViews, "no views");

  const auto board2d = board_plane_points(left_obs.board);
  const auto board3d = board_points(left_obs.board);
  const std::size_t npts = board3d.size();
  const std::size_t nviews = pairs.size();

  StereoState state{left_intr, right_intr, {}, {}};
  std::vector<std::vector<Vec2>> obs_left, obs_right;
  Mat3 rot_sum = Mat3::Zero();
  Vec3 t_sum = Vec3::Zero();
  for (const auto& pair : pairs) {
    obs_left.push_back(to_vec2(pair.left->corners));
    obs_right.push_back(to_vec2(pair.right->corners));
    const Pose pl = pose_from_homography(left_intr, estimate_homography(board2d, obs_left.back()));
    const Pose pr = pose_from_homography(right_intr, estimate_homography(board2d, obs_right.back()));
    const Mat3 rrel = pr.rotation_matrix() * pl.rotation_matrix().transpose();
    rot_sum += rrel;
    t_sum += pr.translation - rrel * pl.translation;
    state.poses.push_back(pl);
  }
  state.relative = Pose::from_matrix(nearest_rotation(rot_sum), t_sum / static_cast<double>(nviews));
  if (state.relative.translation.norm() < 1e-6)
    throw Error(Errc::DegenerateBaseline, fmt::format("initial baseline {} m", state.relative.translation.norm()));

  const auto nparams = static_cast<Eigen::Index>(14 + 6 * nviews);
  const auto nres = static_cast<Eigen::Index>(4 * npts * nviews);

  detail::LeastSquaresProblem<StereoState> problem;
  problem.evaluate = [&](const StereoState& s, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(nres);
    if (jac) jac->setZero(nres, nparams);
    const Mat3 rrel = s.relative.rotation_matrix();
    const Vec3& trel = s.relative.translation;
    for (std::size_t v = 0; v < nviews; ++v) {
      const Mat3 rot = s.poses[v].rotation_matrix();
      const Vec3& t = s.poses[v].translation;
      const auto col = static_cast<Eigen::Index>(14 + 6 * v);
      for (std::size_t i = 0; i < npts; ++i) {
        const Vec3 rx = rot * board3d[i];
        const Vec3 pl = rx + t;
        const Vec3 rpl = rrel * pl;
        const Vec3 pr = rpl + trel;
        if (!(pl.z() > kMinDepth) || !(pr.z() > kMinDepth)) return false;
        const Projection projl = project_camera_point(s.left, pl);
        const Projection projr = project_camera_point(s.right, pr);
        const auto row_l = static_cast<Eigen::Index>(4 * (v * npts + i));
        const auto row_r = row_l + 2;
        r.segment<2>(row_l) = projl.uv - obs_left[v][i];
        r.segment<2>(row_r) = projr.uv - obs_right[v][i];
        if (jac) {
          jac->block<2, 4>(row_l, 0) = projl.d_intr;
          jac->block<2, 3>(row_l, col) = -projl.d_point * skew(rx);
          jac->block<2, 3>(row_l, col + 3) = projl.d_point;

          jac->block<2, 4>(row_r, 4) = projr.d_intr;
          jac->block<2, 3>(row_r, 8) = -projr.d_point * skew(rpl);
          jac->block<2, 3>(row_r, 11) = projr.d_point;
          const Eigen::Matrix<double, 2, 3> dr = projr.d_point * rrel;
          jac->block<2, 3>(row_r, col) = -dr * skew(rx);
          jac->block<2, 3>(row_r, col + 3) = dr;
        }
      }
    }
    return true;
  };
  problem.retract = [nviews](const StereoState& s, const Eigen::VectorXd& d) {
    StereoState out = s;
    perturb_intrinsics(out.left, d.segment<4>(0));
    perturb_intrinsics(out.right, d.segment<4>(4));
    out.relative = perturb(s.relative, d.segment<6>(8));
    for (std::size_t v = 0; v < nviews; ++v) out.poses[v] = perturb(s.poses[v], d.segment<6>(static_cast<Eigen::Index>(14 + 6 * v)));
    return out;
  };

  const auto result = detail::levenberg(state, problem, to_lm(options));
  if (!result.feasible_start) throw Error(Errc::BehindCamera, "initialization places corners behind a camera");
  if (!result.converged)
    throw Error(Errc::NonConvergence, fmt::format("no convergence in {} iterations", options.max_iterations));
  if (!pose_finite(state.relative)) throw Error(Errc::DivergedPose, "non-finite relative pose");
  for (const auto& p : state.poses)
    if (!pose_finite(p)) throw Error(Errc::DivergedPose, "non-finite pose");
  if (state.relative.translation.norm() < 1e-6) throw Error(Errc::DegenerateBaseline, "refined baseline collapsed");

  StereoCalibration out;
  out.rig.left = state.left;
  out.rig.right = state.right;
  out.rig.left.pixel_size_mm = left_intr.pixel_size_mm;
  out.rig.right.pixel_size_mm = right_intr.pixel_size_mm;
  out.rig.relative_rotation = state.relative.rotation;
  out.rig.baseline_vector = state.relative.translation;
  for (const auto& p : pairs) out.view_ids.push_back(p.id);
  out.left_poses = state.poses;
  out.rms_px = std::sqrt(result.residuals.squaredNorm() / static_cast<double>(2 * npts * nviews));
  std::vector<const io::ViewObservation*> lviews;
  for (const auto& p : pairs) lviews.push_back(p.left);
  out.coverage = aggregate_coverage(lviews, out.left_poses, options.image_size);
  out.cost_history = result.cost_history;
  out.iterations = result.iterations;
  return out;
}

// ---------------------------------------------------------------------------

CoverageBuckets classify_coverage(std::span<const io::Corner> view_corners, const Pose& pose, ImageSize image_size) {
  CoverageBuckets b;
  if (view_corners.empty()) return b;
  double su = 0, sv = 0;
  double umin = view_corners[0].u, umax = umin, vmin = view_corners[0].v, vmax = vmin;
  for (const auto& c : view_corners) {
    su += c.u;
    sv += c.v;
    umin = std::min(umin, c.u);
    umax = std::max(umax, c.u);
    vmin = std::min(vmin, c.v);
    vmax = std::max(vmax, c.v);
  }
  const double n = static_cast<double>(view_corners.size());
  const double w = image_size.width, h = image_size.height;
  const double cu = su / n, cv = sv / n;
  b.x_left = cu < 0.2 * w;
  b.x_right = cu > 0.8 * w;
  b.y_top = cv < 0.2 * h;
  b.y_bottom = cv > 0.8 * h;

  const Vec3 normal = pose.rotation_matrix().col(2);
  const double deg = 180.0 / std::numbers::pi;
  const double nz = std::abs(normal.z());
  b.skew = std::acos(std::clamp(nz, 0.0, 1.0)) * deg > 15.0;
  const double tilt_about_x = std::atan2(std::abs(normal.y()), nz) * deg;
  const double tilt_about_y = std::atan2(std::abs(normal.x()), nz) * deg;
  b.overall_tilt = tilt_about_x > 10.0 || tilt_about_y > 10.0;

  const double fill = std::hypot(umax - umin, vmax - vmin) / std::hypot(w, h);
  b.size_fill = fill >= 0.7;
  b.size_far = fill < 0.25;
  return b;
}

Rectification rectify_pair(const StereoRig& rig) {
  if (!(rig.baseline() > 1e-12) || !rig.baseline_vector.allFinite())
    throw Error(Errc::DegenerateBaseline, fmt::format("baseline {} m", rig.baseline()));
  const Mat3 half = rotvec_to_matrix(0.5 * rig.relative_rotation);
  // X_r = H H X_l + t  =>  H^T X_r = H X_l + H^T t: both frames become parallel.
  const Vec3 t = half.transpose() * rig.baseline_vector;
  const Vec3 e = t.normalized();
  const Vec3 target(e.x() < 0 ? -1.0 : 1.0, 0.0, 0.0);
  const Mat3 align = Eigen::Quaterniond::FromTwoVectors(e, target).toRotationMatrix();

  Rectification rect;
  rect.left_rotation = align * half;
  rect.right_rotation = align * half.transpose();
  const double f = 0.25 * (rig.left.fx + rig.left.fy + rig.right.fx + rig.right.fy);
  CameraIntrinsics k{f, f, 0.5 * (rig.left.cx + rig.right.cx), 0.5 * (rig.left.cy + rig.right.cy), rig.left.pixel_size_mm};
  rect.left = k;
  rect.right = k;
  rect.right.pixel_size_mm = rig.right.pixel_size_mm;
  return rect;
}

StereoRig rectified_rig(const StereoRig& rig, const Rectification& rect) {
  StereoRig out;
  out.left = rect.left;
  out.right = rect.right;
  out.relative_rotation = Vec3::Zero();
  out.baseline_vector = rect.right_rotation * rig.baseline_vector;
  return out;
}

GrayImage rectify_image(const GrayImage& src, const CameraIntrinsics& src_intr, const Mat3& rotation,
                        const CameraIntrinsics& dst_intr) {
  GrayImage out(src.width, src.height, 0);
  const Mat3 back = src_intr.matrix() * rotation.transpose() * dst_intr.matrix().inverse();
  for (std::uint32_t y = 0; y < out.height; ++y) {
    for (std::uint32_t x = 0; x < out.width; ++x) {
      const Vec3 p = back * Vec3(x, y, 1.0);
      if (!(p.z() > 0)) continue;
      const double u = p.x() / p.z(), v = p.y() / p.z();
      if (!(u >= 0.0) || !(v >= 0.0) || u > src.width - 1.0 || v > src.height - 1.0) continue;
      const auto x0 = static_cast<std::uint32_t>(u), y0 = static_cast<std::uint32_t>(v);
      const std::uint32_t x1 = std::min(x0 + 1, src.width - 1), y1 = std::min(y0 + 1, src.height - 1);
      const double ax = u - x0, ay = v - y0;
      const double top = (1 - ax) * src.at(x0, y0) + ax * src.at(x1, y0);
      const double bottom = (1 - ax) * src.at(x0, y1) + ax * src.at(x1, y1);
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp((1 - ay) * top + ay * bottom, 0.0, 255.0)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void append_intrinsics(std::string& out, std::string_view prefix, const CameraIntrinsics& k) {
  out += fmt::format("param,{}fx,{}\n", prefix, k.fx);
  out += fmt::format("param,{}fy,{}\n", prefix, k.fy);
  out += fmt::format("param,{}cx,{}\n", prefix, k.cx);
  out += fmt::format("param,{}cy,{}\n", prefix, k.cy);
  out += fmt::format("param,{}pixel_size_mm,{}\n", prefix, k.pixel_size_mm);
  out += fmt::format("param,{}focal_mm,{}\n", prefix, k.focal_mm());
}

void append_pose(std::string& out, std::string_view prefix, const Pose& p) {
  static constexpr const char* kNames[6] = {"rx", "ry", "rz", "tx", "ty", "tz"};
  for (int i = 0; i < 3; ++i) out += fmt::format("param,{}{},{}\n", prefix, kNames[i], p.rotation(i));
  for (int i = 0; i < 3; ++i) out += fmt::format("param,{}{},{}\n", prefix, kNames[3 + i], p.translation(i));
}

void append_tail(std::string& out, double rms, const CoverageBuckets& coverage) {
  out += fmt::format("rms_px,{}\n", rms);
  for (const auto& [name, value] : coverage.entries()) out += fmt::format("coverage,{},{}\n", name, value);
}

std::map<std::string, double, std::less<>> read_params(std::string_view text) {
  std::map<std::string, double, std::less<>> params;
  for (const auto& line : text::data_lines(text)) {
    if (line.fields.empty()) continue;
    if (line.fields[0] == "param") {
      if (line.fields.size() != 3) throw Error(Errc::MalformedLine, "expected param,<name>,<value>", line.number);
      params[std::string(line.fields[1])] = text::parse_double(line.fields[2], line.number);
    } else if (line.fields[0] == "rms_px" || line.fields[0] == "coverage") {
      continue;
    } else {
      throw Error(Errc::MalformedLine, "unknown record '" + std::string(line.fields[0]) + "'", line.number);
    }
  }
  return params;
}

double need(const std::map<std::string, double, std::less<>>& params, const std::string& name) {
  const auto it = params.find(name);
  if (it == params.end()) throw Error(Errc::MalformedLine, "missing param " + name);
  return it->second;
}

CameraIntrinsics intrinsics_from(const std::map<std::string, double, std::less<>>& params, const std::string& prefix) {
  CameraIntrinsics k{need(params, prefix + "fx"), need(params, prefix + "fy"), need(params, prefix + "cx"),
                     need(params, prefix + "cy"), need(params, prefix + "pixel_size_mm")};
  if (!(k.fx > 0) || !(k.fy > 0) || !(k.pixel_size_mm > 0))
    throw Error(Errc::MalformedLine, "intrinsics need positive fx, fy, pixel_size_mm");
  return k;
}

}  // namespace

std::string format_report(const CalibrationReport& report) {
  std::string out;
  append_intrinsics(out, "", report.intrinsics);
  for (std::size_t i = 0; i < report.poses.size(); ++i)
    append_pose(out, fmt::format("view.{}.", report.view_ids[i]), report.poses[i]);
  append_tail(out, report.rms_px, report.coverage);
  return out;
}

std::string format_report(const StereoCalibration& c) {
  std::string out;
  append_intrinsics(out, "left.", c.rig.left);
  append_intrinsics(out, "right.", c.rig.right);
  append_pose(out, "rig.", Pose{c.rig.relative_rotation, c.rig.baseline_vector});
  out += fmt::format("param,rig.baseline_m,{}\n", c.rig.baseline());
  for (std::size_t i = 0; i < c.left_poses.size(); ++i) append_pose(out, fmt::format("view.{}.", c.view_ids[i]), c.left_poses[i]);
  append_tail(out, c.rms_px, c.coverage);
  return out;
}

CameraIntrinsics parse_intrinsics(std::string_view report_text) { return intrinsics_from(read_params(report_text), ""); }

StereoRig parse_stereo_rig(std::string_view report_text) {
  const auto params = read_params(report_text);
  StereoRig rig;
  rig.left = intrinsics_from(params, "left.");
  rig.right = intrinsics_from(params, "right.");
  rig.relative_rotation = Vec3(need(params, "rig.rx"), need(params, "rig.ry"), need(params, "rig.rz"));
  rig.baseline_vector = Vec3(need(params, "rig.tx"), need(params, "rig.ty"), need(params, "rig.tz"));
  if (!(rig.baseline() > 0)) throw Error(Errc::DegenerateBaseline, "rig baseline must be positive");
  return rig;
}

}  // namespace drishti::calib
