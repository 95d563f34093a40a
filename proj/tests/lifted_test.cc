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
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ilcrace/error.hpp"
#include "ilcrace/ilc.hpp"

namespace ilcrace {
namespace {

const VehicleParams kParams;

// Fixed-step RK4 of x' = A x + b(t) over [0, T] from x0.
template <typename Forcing>
Eigen::Vector4d integrate(const Eigen::Matrix4d& A, const Eigen::Vector4d& x0,
                          Forcing b, double T, int steps) {
  const double h = T / steps;
  Eigen::Vector4d x = x0;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Eigen::Vector4d k1 = A * x + b(t);
    const Eigen::Vector4d k2 = A * (x + 0.5 * h * k1) + b(t + 0.5 * h);
    const Eigen::Vector4d k3 = A * (x + 0.5 * h * k2) + b(t + 0.5 * h);
    const Eigen::Vector4d k4 = A * (x + h * k3) + b(t + h);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

Eigen::MatrixXd random_lower(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) P(i, j) = u(rng);
    P(i, i) = 0.5 + std::abs(u(rng));
  }
  return P;
}

TimeGrid synthetic_window(double accel, std::size_t n) {
  const TrackProfile track = synthetic_track();
  const SpeedProfile speed = generate_speed_profile(track, accel, 45.0);
  return truncate_grid(build_time_grid(track, speed, 0.1), n);
}

TEST(ContinuousMatricesTest, Structure) {
  const ContinuousModel m = continuous_matrices(20.0, kParams);
  EXPECT_EQ(m.A.row(0), Eigen::RowVector4d(0.0, 20.0, 0.0, 20.0));
  EXPECT_EQ(m.A.row(1), Eigen::RowVector4d(0.0, 0.0, 1.0, 0.0));
  EXPECT_DOUBLE_EQ(m.B(2), 1.04 * 160e3 / 2250.0);
  EXPECT_DOUBLE_EQ(m.B(3), 160e3 / (1500.0 * 20.0));
  EXPECT_EQ(m.B(0), 0.0);
  EXPECT_EQ(m.B(1), 0.0);
  EXPECT_EQ(m.C, Eigen::RowVector4d(1.0, 0.0, 0.0, 0.0));
  EXPECT_EQ(m.disturbance_per_curvature, Eigen::Vector4d(0.0, -20.0, 0.0, 0.0));
  EXPECT_THROW(continuous_matrices(0.0, kParams), ValidationError);
}

TEST(ContinuousMatricesTest, MatchesDerivativesWithLinearTire) {
  // The closed loop A_c x + B_c u + d_c equals the bicycle model with the
  // lookahead feedback and a linear tire.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (double speed : {10.0, 20.0, 40.0}) {
    const ContinuousModel m = continuous_matrices(speed, kParams);
    for (int trial = 0; trial < 10; ++trial) {
      const VehicleState x{u(rng), u(rng), u(rng), u(rng)};
      const double steer = u(rng), kappa = u(rng) * 0.1;
      const VehicleState rate = derivatives(
          x, steer + lookahead_feedback(x.lateral_error, x.heading_error, kParams),
          speed, kappa, kParams, TireModel::kLinear);
      const Eigen::Vector4d state(x.lateral_error, x.heading_error, x.yaw_rate, x.sideslip);
      const Eigen::Vector4d model =
          m.A * state + m.B * steer + kappa * m.disturbance_per_curvature;
      EXPECT_NEAR(model(0), rate.lateral_error, 1e-12);
      EXPECT_NEAR(model(1), rate.heading_error, 1e-12);
      EXPECT_NEAR(model(2), rate.yaw_rate, 1e-9);
      EXPECT_NEAR(model(3), rate.sideslip, 1e-12);
    }
  }
}

TEST(ContinuousMatricesTest, ClosedLoopIsStable) {
  for (double speed : {5.0, 20.0, 45.0}) {
    const Eigen::EigenSolver<Eigen::Matrix4d> eig(continuous_matrices(speed, kParams).A);
    for (int i = 0; i < 4; ++i) EXPECT_LT(eig.eigenvalues()(i).real(), 0.0) << speed;
  }
}

TEST(DiscretizeTest, ZeroDynamics) {
  const Eigen::Vector4d v(1.0, -2.0, 3.0, 0.5);
  const DiscreteModel d =
      discretize(Eigen::Matrix4d::Zero(), v, Eigen::Vector4d::Zero(), 0.1);
  EXPECT_TRUE(d.A.isApprox(Eigen::Matrix4d::Identity(), 1e-15));
  EXPECT_TRUE(d.B.isApprox(v * 0.1, 1e-15));
  EXPECT_TRUE(d.d.isZero(0.0));
}

TEST(DiscretizeTest, FirstOrderLimit) {
  const ContinuousModel m = continuous_matrices(20.0, kParams);
  double previous = 0.0;
  for (double ts : {1e-2, 1e-3, 1e-4}) {
    const DiscreteModel d = discretize(m.A, m.B, Eigen::Vector4d::Zero(), ts);
    const double err = ((d.A - Eigen::Matrix4d::Identity()) / ts - m.A).norm();
    EXPECT_LT(err, 10.0 * m.A.squaredNorm() * ts);
    if (previous > 0.0) EXPECT_NEAR(previous / err, 10.0, 1.0);
    previous = err;
  }
}

TEST(DiscretizeTest, MatchesFineIntegration) {
  const ContinuousModel m = continuous_matrices(23.0, kParams);
  const Eigen::Vector4d d0(0.0, -0.3, 0.0, 0.0);
  const Eigen::Vector4d d1(0.0, -0.1, 0.0, 0.0);
  const double ts = 0.1;
  const DiscreteModel d = discretize(m.A, m.B, d0, d1, ts);
  auto none = [](double) { return Eigen::Vector4d::Zero().eval(); };
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector4d col = integrate(m.A, Eigen::Vector4d::Unit(i), none, ts, 2000);
    EXPECT_TRUE(d.A.col(i).isApprox(col, 1e-10)) << i;
  }
  const Eigen::Vector4d b =
      integrate(m.A, Eigen::Vector4d::Zero(), [&](double) { return m.B; }, ts, 2000);
  EXPECT_TRUE(d.B.isApprox(b, 1e-10));
  const Eigen::Vector4d ramp = integrate(
      m.A, Eigen::Vector4d::Zero(),
      [&](double t) { return (d0 + (d1 - d0) * (t / ts)).eval(); }, ts, 2000);
  EXPECT_TRUE(d.d.isApprox(ramp, 1e-10));
}

TEST(DiscretizeTest, FirstMarkovParameterPositive) {
  const ContinuousModel m = continuous_matrices(20.0, kParams);
  const DiscreteModel d = discretize(m.A, m.B, Eigen::Vector4d::Zero(), 0.1);
  EXPECT_GT(m.C * d.B, 0.0);
  EXPECT_GT(m.C * d.B, kSingularDiagonal);
}

TEST(BuildLiftedTest, SingleSample) {
  const TimeGrid grid = synthetic_window(8.0, 1);
  const TrackProfile track = synthetic_track();
  const LiftedSystem lifted = build_lifted(grid, track, kParams);
  ASSERT_EQ(lifted.P.rows(), 1);
  const ContinuousModel m = continuous_matrices(grid.speeds[0], kParams);
  const DiscreteModel d = discretize(m.A, m.B, Eigen::Vector4d::Zero(), 0.1);
  EXPECT_DOUBLE_EQ(lifted.P(0, 0), m.C * d.B);
}

TEST(BuildLiftedTest, ConstantSpeedIsToeplitz) {
  const LiftedSystem lifted = build_constant_speed_lifted(20.0, 120, 0.1, kParams);
  const Eigen::MatrixXd& P = lifted.P;
  const double scale = P.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index l = 0; l < P.rows(); ++l) {
    for (Eigen::Index k = 0; k <= l; ++k) {
      worst = std::max(worst, std::abs(P(l, k) - P(l - k, 0)));
    }
  }
  EXPECT_LE(worst, 1e-12 * scale);
  // First column is C A^k B.
  const ContinuousModel m = continuous_matrices(20.0, kParams);
  const DiscreteModel d = discretize(m.A, m.B, Eigen::Vector4d::Zero(), 0.1);
  Eigen::Vector4d x = d.B;
  for (Eigen::Index k = 0; k < P.rows(); ++k) {
    EXPECT_NEAR(P(k, 0), m.C * x, 1e-14 * scale);
    x = d.A * x;
  }
  EXPECT_TRUE(lifted.d.isZero(0.0));
}

TEST(BuildLiftedTest, BruteForceProducts) {
  // Five samples from the slowest corner of the lap, where U_x varies most.
  const TrackProfile track = synthetic_track();
  const SpeedProfile speed = generate_speed_profile(track, 8.0, 45.0);
  const TimeGrid full = build_time_grid(track, speed, 0.1);
  const LtvModel model = build_ltv(full, track, kParams);
  const LiftedSystem whole = build_lifted(model, full);
  std::size_t start = 0;
  double best = 0.0;
  for (std::size_t k = 0; k + 5 < full.samples; ++k) {
    const double change = std::abs(full.speeds[k + 5] - full.speeds[k]);
    if (change > best) {
      best = change;
      start = k;
    }
  }
  ASSERT_GT(best, 1.0);
  for (int l = 0; l < 5; ++l) {
    for (int k = 0; k < 5; ++k) {
      const std::size_t gl = start + l, gk = start + k;
      double expected = 0.0;
      if (l >= k) {
        Eigen::Matrix4d product = Eigen::Matrix4d::Identity();
        for (std::size_t i = gk + 1; i <= gl; ++i) product = model.A[i] * product;
        expected = model.C * product * model.B[gk];
      }
      EXPECT_NEAR(whole.P(gl, gk), expected, 1e-13) << l << "," << k;
    }
  }
}

TEST(BuildLiftedTest, LowerTriangular) {
  const TimeGrid grid = synthetic_window(8.0, 150);
  const LiftedSystem lifted = build_lifted(grid, synthetic_track(), kParams);
  for (Eigen::Index l = 0; l < lifted.P.rows(); ++l) {
    for (Eigen::Index k = l + 1; k < lifted.P.cols(); ++k) EXPECT_EQ(lifted.P(l, k), 0.0);
    EXPECT_GT(lifted.P(l, l), kSingularDiagonal);
  }
}

TEST(BuildLiftedTest, MatchesTimeDomainRecursion) {
  const TrackProfile track = synthetic_track();
  const TimeGrid grid = synthetic_window(8.0, 400);
  const LtvModel model = build_ltv(grid, track, kParams);
  const LiftedSystem lifted = build_lifted(model, grid);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd delta(400);
    for (Eigen::Index k = 0; k < 400; ++k) delta(k) = noise(rng);
    const Eigen::VectorXd e = rollout(model, delta);
    const Eigen::VectorXd lifted_e = lifted.P * delta + lifted.d;
    EXPECT_LE((lifted_e - e).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + e.norm()));
  }
  EXPECT_THROW(rollout(model, Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST(ConvergenceFactorTest, Examples) {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXd P = random_lower(12, rng);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(12, 12);
  const Eigen::MatrixXd Pinv = P.triangularView<Eigen::Lower>().solve(I);
  EXPECT_NEAR(convergence_factor(P, I, Pinv), 0.0, 1e-12);
  EXPECT_NEAR(convergence_factor(P, I, Eigen::MatrixXd::Zero(12, 12)), 1.0, 1e-12);
  EXPECT_NEAR(convergence_factor(P, I, 0.5 * Pinv), 0.5, 1e-12);
}

TEST(ConvergenceFactorTest, MatchesDenseComputation) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int n : {1, 3, 8, 20}) {
    const Eigen::MatrixXd P = random_lower(n, rng);
    Eigen::MatrixXd Q(n, n), L(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Q(i, j) = (i == j ? 1.0 : 0.0) + u(rng);
        L(i, j) = u(rng);
      }
    }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd dense = P * Q * (I - L * P) * P.fullPivLu().inverse();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
    EXPECT_NEAR(convergence_factor(P, Q, L), svd.singularValues()(0),
                1e-9 * svd.singularValues()(0))
        << n;
  }
}

TEST(ConvergenceFactorTest, PdShortcutMatchesFullMatrix) {
  const LiftedSystem lifted = build_constant_speed_lifted(15.0, 60, 0.1, kParams);
  const Eigen::MatrixXd Q = zero_phase_filter(2.0, 0.1, 60);
  const ConvergenceAnalyzer analyzer(lifted.P, Q);
  for (double kp : {0.0, 0.05, 0.3}) {
    for (double kd : {0.0, 0.05, 0.4}) {
      const double full = analyzer.gamma(pd_learning_matrix(kp, kd, 60));
      EXPECT_NEAR(analyzer.gamma_pd(kp, kd), full, 1e-12 * full);
    }
  }
}

TEST(ConvergenceFactorTest, SingularDiagonalRejected) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4);
  P(2, 2) = 1e-15;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_THROW(convergence_factor(P, I, I), SingularityError);
  EXPECT_THROW(convergence_factor(Eigen::MatrixXd::Ones(3, 4), I, I), ValidationError);
}

TEST(ContractionTest, HalfGainRollout) {
  std::mt19937_64 rng(31);
  const int n = 5;
  const Eigen::MatrixXd P = random_lower(n, rng);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd L = 0.5 * P.triangularView<Eigen::Lower>().solve(I);
  const double gamma = convergence_factor(P, I, L);
  EXPECT_NEAR(gamma, 0.5, 1e-12);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd d(n), delta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) d(i) = g(rng);
  std::vector<Eigen::VectorXd> errors;
  for (int j = 0; j < 10; ++j) {
    errors.push_back(P * delta + d);
    delta = delta - L * errors.back();
  }
  // Fixed point: L P delta = -L d, so e = 0.
  const ContractionReport report =
      error_contraction_bound(gamma, errors, Eigen::VectorXd::Zero(n));
  EXPECT_TRUE(report.guaranteed);
  EXPECT_TRUE(report.holds);
  EXPECT_NEAR(report.worst_ratio, 0.5, 1e-9);
}

TEST(ContractionTest, NoGuaranteeAboveOne) {
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(3);
  const std::vector<Eigen::VectorXd> errors{e, e, e};
  const ContractionReport same = error_contraction_bound(0.5, errors, e);
  EXPECT_TRUE(same.holds);
  EXPECT_TRUE(same.guaranteed);
  const std::vector<Eigen::VectorXd> growing{e, 3.0 * e};
  const ContractionReport report =
      error_contraction_bound(1.2, growing, Eigen::VectorXd::Zero(3));
  EXPECT_FALSE(report.guaranteed);
  EXPECT_FALSE(report.holds);
  EXPECT_NEAR(report.worst_ratio, 3.0, 1e-12);
}

TEST(ExportLiftedTest, HeaderAndRows) {
  const LiftedSystem lifted = build_lifted(synthetic_window(8.0, 4), synthetic_track(), kParams);
  const auto path = std::filesystem::path(testing::TempDir()) / "lifted.csv";
  export_lifted_csv(path, lifted);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# N=4 Ts=0.1");
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      values.push_back(std::stod(line.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    ASSERT_EQ(values.size(), 5u);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(values[k], lifted.P(rows, k));
    EXPECT_EQ(values[4], lifted.d(rows));
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

}  // namespace
}  // namespace ilcrace
