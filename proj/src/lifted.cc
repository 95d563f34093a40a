// Copyright 2026 The ilcrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ilcrace/lifted.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "csv.hpp"
#include "ilcrace/error.hpp"

namespace ilcrace {

ContinuousModel continuous_matrices(double speed, const VehicleParams& params) {
  if (!(speed > 0.0)) throw ValidationError("continuous_matrices: U_x must be > 0");
  const double m = params.mass;
  const double iz = params.yaw_inertia;
  const double a = params.cg_to_front;
  const double b = params.cg_to_rear;
  const double cf = params.front_stiffness;
  const double cr = params.rear_stiffness;
  const double kp = params.lanekeeping_gain;
  const double xla = params.lookahead;
  const double u = speed;

  ContinuousModel model;
  model.A << 0.0, u, 0.0, u,
             0.0, 0.0, 1.0, 0.0,
             -a * kp * cf / iz, -a * kp * xla * cf / iz,
             -(a * a * cf + b * b * cr) / (u * iz), (b * cr - a * cf) / iz,
             -kp * cf / (m * u), -kp * xla * cf / (m * u),
             (b * cr - a * cf) / (m * u * u) - 1.0, -(cf + cr) / (m * u);
  model.B << 0.0, 0.0, a * cf / iz, cf / (m * u);
  model.C << 1.0, 0.0, 0.0, 0.0;
  model.disturbance_per_curvature << 0.0, -u, 0.0, 0.0;
  return model;
}

DiscreteModel discretize(const Eigen::Matrix4d& A_c, const Eigen::Vector4d& B_c,
                         const Eigen::Vector4d& d_start,
                         const Eigen::Vector4d& d_end, double sample_time) {
  if (!(sample_time > 0.0)) throw ValidationError("discretize: T_s must be > 0");
  // Augmented state [x, u, 1, tau] with tau' = 1, so that the disturbance
  // d_start + (d_end - d_start) tau / T_s is generated inside the exponential.
  Eigen::Matrix<double, 7, 7> M = Eigen::Matrix<double, 7, 7>::Zero();
  M.topLeftCorner<4, 4>() = A_c;
  M.block<4, 1>(0, 4) = B_c;
  M.block<4, 1>(0, 5) = d_start;
  M.block<4, 1>(0, 6) = (d_end - d_start) / sample_time;
  M(6, 5) = 1.0;
  const Eigen::Matrix<double, 7, 7> E = (M * sample_time).exp();

  DiscreteModel out;
  out.A = E.topLeftCorner<4, 4>();
  out.B = E.block<4, 1>(0, 4);
  out.d = E.block<4, 1>(0, 5);
  return out;
}

DiscreteModel discretize(const Eigen::Matrix4d& A_c, const Eigen::Vector4d& B_c,
                         const Eigen::Vector4d& d_c, double sample_time) {
  return discretize(A_c, B_c, d_c, d_c, sample_time);
}

LtvModel build_ltv(const TimeGrid& grid, const TrackProfile& track,
                   const VehicleParams& params) {
  params.validate();
  const std::size_t n = grid.samples;
  LtvModel model;
  model.sample_time = grid.sample_time;
  model.A.reserve(n);
  model.B.reserve(n);
  model.d.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const ContinuousModel now = continuous_matrices(grid.speeds[k], params);
    const ContinuousModel next = continuous_matrices(grid.speeds[k + 1], params);
    const Eigen::Vector4d d_start =
        track.curvature_at(grid.distances[k]) * now.disturbance_per_curvature;
    const Eigen::Vector4d d_end =
        track.curvature_at(grid.distances[k + 1]) * next.disturbance_per_curvature;
    const DiscreteModel step =
        discretize(now.A, now.B, d_start, d_end, grid.sample_time);
    model.A.push_back(step.A);
    model.B.push_back(step.B);
    model.d.push_back(step.d);
  }
  return model;
}

Eigen::VectorXd rollout(const LtvModel& model, const Eigen::VectorXd& inputs) {
  const std::size_t n = model.samples();
  if (static_cast<std::size_t>(inputs.size()) != n) {
    throw ValidationError("rollout: input length does not match N");
  }
  Eigen::VectorXd e(n);
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    x = model.A[k] * x + model.B[k] * inputs(k) + model.d[k];
    e(k) = model.C * x;
  }
  return e;
}

LiftedSystem build_lifted(const LtvModel& model, const TimeGrid& grid) {
  const std::size_t n = model.samples();
  LiftedSystem lifted;
  lifted.grid = grid;
  lifted.P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::Vector4d x = model.B[k];
    lifted.P(k, k) = model.C * x;
    for (std::size_t l = k + 1; l < n; ++l) {
      x = model.A[l] * x;
      lifted.P(l, k) = model.C * x;
    }
  }
  lifted.d = rollout(model, Eigen::VectorXd::Zero(n));
  return lifted;
}

LiftedSystem build_lifted(const TimeGrid& grid, const TrackProfile& track,
                          const VehicleParams& params) {
  return build_lifted(build_ltv(grid, track, params), grid);
}

LiftedSystem build_constant_speed_lifted(double speed, std::size_t samples,
                                         double sample_time,
                                         const VehicleParams& params) {
  if (samples == 0) throw ValidationError("constant-speed lifted: N must be >= 1");
  // Road long enough that the grid never reaches the end before N samples.
  const double length = speed * sample_time * (static_cast<double>(samples) + 2.0);
  const LoadedTrack road = constant_speed_track(length, speed);
  const TimeGrid full = build_time_grid(road.track, *road.speed, sample_time);
  const TimeGrid grid = truncate_grid(full, samples);
  return build_lifted(grid, road.track, params);
}

namespace {

double largest_singular_value(const Eigen::MatrixXd& M) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

ConvergenceAnalyzer::ConvergenceAnalyzer(const Eigen::MatrixXd& P,
                                         const Eigen::MatrixXd& Q) {
  const Eigen::Index n = P.rows();
  if (P.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw ValidationError("convergence factor: P and Q must be N x N");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(P(i, i)) >= kSingularDiagonal)) {
      throw SingularityError("lifted matrix is singular: |P(" + std::to_string(i) +
                             "," + std::to_string(i) + ")| < 1e-14");
    }
  }
  PQ_ = P.triangularView<Eigen::Lower>() * Q;
  if (Q.isIdentity(0.0)) {
    // P P^-1 is exactly I; skip the solve and its roundoff.
    PQPinv_ = Eigen::MatrixXd::Identity(n, n);
  } else {
    PQPinv_ =
        P.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(PQ_);
  }
}

double ConvergenceAnalyzer::gamma(const Eigen::MatrixXd& L) const {
  if (L.rows() != PQ_.rows() || L.cols() != PQ_.cols()) {
    throw ValidationError("convergence factor: L must be N x N");
  }
  return largest_singular_value(PQPinv_ - PQ_ * L);
}

double ConvergenceAnalyzer::gamma_pd(double kp, double kd) const {
  // L = (kp + kd) I - kd S with S the down-shift, so P Q L shifts columns.
  const Eigen::Index n = PQ_.cols();
  Eigen::MatrixXd M = PQPinv_ - (kp + kd) * PQ_;
  if (n > 1) M.leftCols(n - 1) += kd * PQ_.rightCols(n - 1);
  return largest_singular_value(M);
}

double convergence_factor(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                          const Eigen::MatrixXd& L) {
  return ConvergenceAnalyzer(P, Q).gamma(L);
}

ContractionReport error_contraction_bound(
    double gamma, std::span<const Eigen::VectorXd> errors,
    const Eigen::VectorXd& converged, double tolerance) {
  ContractionReport report;
  report.guaranteed = gamma < 1.0;
  report.holds = true;
  for (std::size_t j = 0; j + 1 < errors.size(); ++j) {
    const double before = (converged - errors[j]).norm();
    const double after = (converged - errors[j + 1]).norm();
    const double ratio = before > 0.0 ? after / before : (after > 0.0 ? INFINITY : 0.0);
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_iteration = j;
    }
    // Absolute slack keeps the check meaningful once both sides hit roundoff.
    const double slack = 1e-14 * (converged.norm() + 1.0);
    if (after > (gamma + tolerance) * before + slack) report.holds = false;
  }
  return report;
}

void export_lifted_csv(const std::filesystem::path& path,
                       const LiftedSystem& lifted) {
  std::ofstream out = csv::open_output(path);
  const Eigen::Index n = lifted.P.rows();
  out << "# N=" << n << " Ts=" << csv::format_double(lifted.grid.sample_time)
      << '\n';
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      out << csv::format_double(lifted.P(l, k)) << ',';
    }
    out << csv::format_double(lifted.d(l)) << '\n';
  }
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void export_matrix_csv(const std::filesystem::path& path,
                       const Eigen::MatrixXd& matrix, double sample_time) {
  std::ofstream out = csv::open_output(path);
  out << "# N=" << matrix.rows() << " Ts=" << csv::format_double(sample_time)
      << '\n';
  for (Eigen::Index l = 0; l < matrix.rows(); ++l) {
    for (Eigen::Index k = 0; k < matrix.cols(); ++k) {
      if (k != 0) out << ',';
      out << csv::format_double(matrix(l, k));
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

}  // namespace ilcrace
