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

#ifndef ILCRACE_LIFTED_HPP_
#define ILCRACE_LIFTED_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ilcrace/track.hpp"
#include "ilcrace/vehicle.hpp"

namespace ilcrace {

// Closed-loop (lookahead feedback included) lateral error dynamics with a
// linear tire, for the state x = [e, dPsi, r, beta].
struct ContinuousModel {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  Eigen::RowVector4d C;
  // d_c = curvature * disturbance_per_curvature = [0, -kappa U_x, 0, 0]^T
  Eigen::Vector4d disturbance_per_curvature;
};

struct DiscreteModel {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  Eigen::Vector4d d;
};

// Per-sample discrete matrices over a time grid.
struct LtvModel {
  double sample_time = 0.0;
  std::vector<Eigen::Matrix4d> A;
  std::vector<Eigen::Vector4d> B;
  std::vector<Eigen::Vector4d> d;
  Eigen::RowVector4d C = Eigen::RowVector4d(1.0, 0.0, 0.0, 0.0);

  std::size_t samples() const { return A.size(); }
};

// e = P delta + d. P(l, k) is the response of e(t_{l+1}) to delta(t_k).
struct LiftedSystem {
  Eigen::MatrixXd P;
  Eigen::VectorXd d;
  TimeGrid grid;

  std::size_t samples() const { return static_cast<std::size_t>(P.rows()); }
};

ContinuousModel continuous_matrices(double speed, const VehicleParams& params);

// Zero-order hold of the input over one sample with A_c frozen. The
// disturbance is taken to vary linearly from d_start to d_end across the
// sample; both integrals come from one augmented matrix exponential.
DiscreteModel discretize(const Eigen::Matrix4d& A_c, const Eigen::Vector4d& B_c,
                         const Eigen::Vector4d& d_start,
                         const Eigen::Vector4d& d_end, double sample_time);
DiscreteModel discretize(const Eigen::Matrix4d& A_c, const Eigen::Vector4d& B_c,
                         const Eigen::Vector4d& d_c, double sample_time);

LtvModel build_ltv(const TimeGrid& grid, const TrackProfile& track,
                   const VehicleParams& params);

// Time-domain recursion x(k+1) = A(k) x(k) + B(k) u(k) + d(k) from the zero
// state; returns e(t_1) .. e(t_N).
Eigen::VectorXd rollout(const LtvModel& model, const Eigen::VectorXd& inputs);

// Assembles P column by column with one forward propagation per column.
LiftedSystem build_lifted(const LtvModel& model, const TimeGrid& grid);
LiftedSystem build_lifted(const TimeGrid& grid, const TrackProfile& track,
                          const VehicleParams& params);

// Lifted model for constant speed on a straight road (Toeplitz P).
LiftedSystem build_constant_speed_lifted(double speed, std::size_t samples,
                                         double sample_time,
                                         const VehicleParams& params);

inline constexpr double kSingularDiagonal = 1e-14;

// gamma = sigma_max(P Q (I - L P) P^-1) for a fixed (P, Q) and any number of
// learning matrices. P^-1 is only ever applied by triangular solves.
class ConvergenceAnalyzer {
 public:
  // Throws SingularityError if some |P(i,i)| < kSingularDiagonal.
  ConvergenceAnalyzer(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q);

  double gamma(const Eigen::MatrixXd& L) const;

  // Same value for the PD learning matrix, in O(N^2) before the SVD.
  double gamma_pd(double kp, double kd) const;

 private:
  Eigen::MatrixXd PQ_;      // P Q
  Eigen::MatrixXd PQPinv_;  // P Q P^-1
};

double convergence_factor(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                          const Eigen::MatrixXd& L);

struct ContractionReport {
  bool guaranteed = false;  // gamma < 1
  bool holds = false;       // inequality satisfied at every iteration
  double worst_ratio = 0.0;  // max ||e_inf - e_{j+1}|| / ||e_inf - e_j||
  std::size_t worst_iteration = 0;
};

// Checks ||e_inf - e_{j+1}|| <= (gamma + tolerance) ||e_inf - e_j|| over a
// sequence of lap errors. When gamma >= 1 the report says "no guarantee"
// (guaranteed = false) rather than failing.
ContractionReport error_contraction_bound(
    double gamma, std::span<const Eigen::VectorXd> errors,
    const Eigen::VectorXd& converged, double tolerance = 1e-9);

// Row-major dump: header `# N=<n> Ts=<ts>`, then one row per output sample
// holding P(l, 0..N-1) followed by d(l).
void export_lifted_csv(const std::filesystem::path& path,
                       const LiftedSystem& lifted);

// Same header, N columns, for any square operator matrix.
void export_matrix_csv(const std::filesystem::path& path,
                       const Eigen::MatrixXd& matrix, double sample_time);

}  // namespace ilcrace

#endif  // ILCRACE_LIFTED_HPP_
