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

#ifndef ILCRACE_ILC_HPP_
#define ILCRACE_ILC_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ilcrace/track.hpp"

namespace ilcrace {

struct PdDescriptor {
  double kp = 0.0;  // rad/m
  double kd = 0.0;  // rad/m
  std::optional<double> cutoff_hz;
};

// Either scalar * I or a full symmetric N x N matrix.
class Weight {
 public:
  Weight(double scalar = 0.0) : scalar_(scalar) {}  // NOLINT: implicit on purpose
  explicit Weight(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

  bool is_scalar() const { return !matrix_.has_value(); }
  double scalar() const { return scalar_; }
  const Eigen::MatrixXd& matrix() const { return *matrix_; }

  // W * M without forming W when scalar.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& M) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  // Adds W to the square matrix M in place.
  void add_to(Eigen::MatrixXd& M) const;

  void validate(std::size_t n, const char* name) const;

 private:
  double scalar_ = 0.0;
  std::optional<Eigen::MatrixXd> matrix_;
};

struct WeightSpec {
  Weight T = 1.0;
  Weight R = 1.0;
  Weight S = 100.0;

  void validate(std::size_t n) const;
};

struct QilcDescriptor {
  WeightSpec weights;
};

struct DeadbeatDescriptor {};

using LearnerDescriptor =
    std::variant<PdDescriptor, QilcDescriptor, DeadbeatDescriptor>;

struct LearningOperator {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd L;
  LearnerDescriptor descriptor;

  std::size_t samples() const { return static_cast<std::size_t>(Q.rows()); }
};

// Lower bidiagonal: (kp + kd) on the diagonal, -kd below it, so that
// delta - L e = delta - kp e(k) - kd (e(k) - e(k-1)) with e(-1) = 0.
Eigen::MatrixXd pd_learning_matrix(double kp, double kd, std::size_t n);

LearningOperator pd_operator(double kp, double kd, std::size_t n,
                             std::optional<double> cutoff_hz,
                             double sample_time);

// Second-order Butterworth low-pass, bilinear transform with prewarping.
struct Biquad {
  std::array<double, 3> b;
  std::array<double, 3> a;  // a[0] == 1
};
Biquad butterworth_lowpass(double cutoff_hz, double sample_time);

// Two-sided kernel h(m), m = 0..size-1, of the forward-backward filter.
std::vector<double> zero_phase_kernel(double cutoff_hz, double sample_time);

Eigen::MatrixXd zero_phase_filter(double cutoff_hz, double sample_time,
                                  std::size_t n);

LearningOperator qilc_operator(const Eigen::MatrixXd& P,
                               const WeightSpec& weights);

// Q = I, L = P^-1 by triangular solve.
LearningOperator deadbeat_operator(const Eigen::MatrixXd& P);

Eigen::VectorXd update_input(const LearningOperator& op,
                             const Eigen::VectorXd& delta_prev,
                             const Eigen::VectorXd& e_prev);

// Next-lap cost with d = e_prev - P delta_prev.
double qilc_cost(const Eigen::MatrixXd& P, const WeightSpec& weights,
                 const Eigen::VectorXd& delta_prev,
                 const Eigen::VectorXd& e_prev, const Eigen::VectorXd& delta);

struct OptimalityResidual {
  double absolute = 0.0;  // ||grad J||
  double relative = 0.0;  // divided by the sum of the gradient term norms
};

OptimalityResidual optimality_residual(const LearningOperator& op,
                                       const Eigen::MatrixXd& P,
                                       const WeightSpec& weights,
                                       const Eigen::VectorXd& delta_prev,
                                       const Eigen::VectorXd& e_prev);

struct LearnedInput {
  std::vector<double> distances;  // s(t_k)
  std::vector<double> delta;      // rad
};

void write_learned_input(const std::filesystem::path& path,
                         const TimeGrid& grid, const Eigen::VectorXd& delta);
LearnedInput read_learned_input(const std::filesystem::path& path);

}  // namespace ilcrace

#endif  // ILCRACE_ILC_HPP_
