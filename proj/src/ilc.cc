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

#include "ilcrace/ilc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csv.hpp"
#include "ilcrace/error.hpp"

namespace ilcrace {

Eigen::MatrixXd Weight::apply(const Eigen::MatrixXd& M) const {
  if (is_scalar()) return scalar_ * M;
  return *matrix_ * M;
}

Eigen::VectorXd Weight::apply(const Eigen::VectorXd& v) const {
  if (is_scalar()) return scalar_ * v;
  return *matrix_ * v;
}

void Weight::add_to(Eigen::MatrixXd& M) const {
  if (is_scalar()) {
    M.diagonal().array() += scalar_;
  } else {
    M += *matrix_;
  }
}

void Weight::validate(std::size_t n, const char* name) const {
  const std::string label(name);
  if (is_scalar()) {
    if (!std::isfinite(scalar_) || scalar_ < 0.0) {
      throw ValidationError("weight " + label + " must be a finite scalar >= 0");
    }
    return;
  }
  const Eigen::MatrixXd& W = *matrix_;
  if (static_cast<std::size_t>(W.rows()) != n ||
      static_cast<std::size_t>(W.cols()) != n) {
    throw ValidationError("weight " + label + " must be " + std::to_string(n) +
                          " x " + std::to_string(n));
  }
  if (!W.allFinite()) throw ValidationError("weight " + label + " is not finite");
  const double scale = W.cwiseAbs().maxCoeff();
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (scale + 1.0)) {
    throw ValidationError("weight " + label + " is not symmetric");
  }
}

void WeightSpec::validate(std::size_t n) const {
  T.validate(n, "T");
  R.validate(n, "R");
  S.validate(n, "S");
}

Eigen::MatrixXd pd_learning_matrix(double kp, double kd, std::size_t n) {
  if (n == 0) throw ValidationError("PD operator: N must be >= 1");
  if (!std::isfinite(kp) || !std::isfinite(kd)) {
    throw ValidationError("PD operator: gains must be finite");
  }
  const Eigen::Index size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(size, size);
  L.diagonal().setConstant(kp + kd);
  if (size > 1) L.diagonal(-1).setConstant(-kd);
  return L;
}

LearningOperator pd_operator(double kp, double kd, std::size_t n,
                             std::optional<double> cutoff_hz,
                             double sample_time) {
  if (!(sample_time > 0.0)) throw ValidationError("PD operator: T_s must be > 0");
  LearningOperator op;
  op.L = pd_learning_matrix(kp, kd, n);
  if (cutoff_hz) {
    op.Q = zero_phase_filter(*cutoff_hz, sample_time, n);
  } else {
    op.Q = Eigen::MatrixXd::Identity(op.L.rows(), op.L.cols());
  }
  op.descriptor = PdDescriptor{kp, kd, cutoff_hz};
  return op;
}

Biquad butterworth_lowpass(double cutoff_hz, double sample_time) {
  if (!(sample_time > 0.0)) throw ValidationError("filter: T_s must be > 0");
  const double nyquist = 0.5 / sample_time;
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < nyquist)) {
    throw ValidationError("filter: cutoff " + csv::format_double(cutoff_hz) +
                          " Hz must lie in (0, " + csv::format_double(nyquist) +
                          ") Hz");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz * sample_time);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  Biquad f;
  f.b = {k2 * norm, 2.0 * k2 * norm, k2 * norm};
  f.a = {1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - std::numbers::sqrt2 * k + k2) * norm};
  return f;
}

std::vector<double> zero_phase_kernel(double cutoff_hz, double sample_time) {
  const Biquad f = butterworth_lowpass(cutoff_hz, sample_time);
  // Causal impulse response, kept until the tail is below roundoff.
  std::vector<double> g;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < 1000000; ++i) {
    const double x = i == 0 ? 1.0 : 0.0;
    const double y = f.b[0] * x + f.b[1] * x1 + f.b[2] * x2 - f.a[1] * y1 - f.a[2] * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    g.push_back(y);
    peak = std::max(peak, std::abs(y));
    if (i > 2 && std::abs(y) < 1e-15 * peak && std::abs(y2) < 1e-15 * peak) break;
  }
  // Autocorrelation, normalized so the kernel sums to exactly one.
  const std::size_t c = g.size();
  std::vector<double> h(c, 0.0);
  for (std::size_t m = 0; m < c; ++m) {
    for (std::size_t i = 0; i + m < c; ++i) h[m] += g[i] * g[i + m];
  }
  double total = h[0];
  for (std::size_t m = 1; m < c; ++m) total += 2.0 * h[m];
  for (double& v : h) v /= total;
  while (h.size() > 1 && std::abs(h.back()) < 1e-15 * h[0]) h.pop_back();
  return h;
}

Eigen::MatrixXd zero_phase_filter(double cutoff_hz, double sample_time,
                                  std::size_t n) {
  if (n == 0) throw ValidationError("filter: N must be >= 1");
  const std::vector<double> h = zero_phase_kernel(cutoff_hz, sample_time);
  const long size = static_cast<long>(n);
  const long period = 2 * size;
  const long width = static_cast<long>(h.size()) - 1;
  // Half-sample symmetric extension: x(-1-k) = x(k), x(N+k) = x(N-1-k).
  auto mirror = [&](long k) {
    k %= period;
    if (k < 0) k += period;
    return k >= size ? period - 1 - k : k;
  };
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(size, size);
  for (long i = 0; i < size; ++i) {
    for (long m = -width; m <= width; ++m) {
      Q(i, mirror(i + m)) += h[static_cast<std::size_t>(std::abs(m))];
    }
  }
  // The fold is symmetric in exact arithmetic; remove summation-order noise.
  Q = 0.5 * (Q + Q.transpose()).eval();
  return Q;
}

namespace {

void check_square(const Eigen::MatrixXd& P) {
  if (P.rows() == 0 || P.rows() != P.cols()) {
    throw ValidationError("lifted matrix must be square and nonempty");
  }
}

}  // namespace

LearningOperator qilc_operator(const Eigen::MatrixXd& P,
                               const WeightSpec& weights) {
  check_square(P);
  const std::size_t n = static_cast<std::size_t>(P.rows());
  weights.validate(n);

  const Eigen::MatrixXd PtT = weights.T.apply(Eigen::MatrixXd(P.transpose()));
  // P^T T P; for scalar T this is t P^T P and symmetric by construction.
  Eigen::MatrixXd tracking;
  if (weights.T.is_scalar()) {
    tracking = Eigen::MatrixXd::Zero(P.rows(), P.cols());
    tracking.selfadjointView<Eigen::Lower>().rankUpdate(P.transpose(),
                                                        weights.T.scalar());
    tracking = tracking.selfadjointView<Eigen::Lower>();
  } else {
    tracking = PtT * P;
    tracking = 0.5 * (tracking + tracking.transpose()).eval();
  }

  Eigen::MatrixXd with_change = tracking;  // P^T T P + S
  weights.S.add_to(with_change);
  Eigen::MatrixXd full = with_change;  // P^T T P + R + S
  weights.R.add_to(full);

  const Eigen::LLT<Eigen::MatrixXd> full_llt(full);
  if (full_llt.info() != Eigen::Success) {
    throw FactorizationError("Q-ILC: P^T T P + R + S is not positive definite");
  }
  const Eigen::LLT<Eigen::MatrixXd> change_llt(with_change);
  if (change_llt.info() != Eigen::Success) {
    throw FactorizationError("Q-ILC: P^T T P + S is not positive definite");
  }

  LearningOperator op;
  op.Q = full_llt.solve(with_change);
  op.L = change_llt.solve(PtT);
  if (!op.Q.allFinite() || !op.L.allFinite()) {
    throw FactorizationError("Q-ILC: operator has non-finite entries");
  }
  op.descriptor = QilcDescriptor{weights};
  return op;
}

LearningOperator deadbeat_operator(const Eigen::MatrixXd& P) {
  check_square(P);
  const Eigen::Index n = P.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(P(i, i)) >= 1e-14)) {
      throw SingularityError("deadbeat: P(" + std::to_string(i) + "," +
                             std::to_string(i) + ") is zero");
    }
  }
  LearningOperator op;
  op.Q = Eigen::MatrixXd::Identity(n, n);
  op.L = P.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  op.descriptor = DeadbeatDescriptor{};
  return op;
}

Eigen::VectorXd update_input(const LearningOperator& op,
                             const Eigen::VectorXd& delta_prev,
                             const Eigen::VectorXd& e_prev) {
  const Eigen::Index n = op.Q.rows();
  if (delta_prev.size() != n || e_prev.size() != n || op.L.rows() != n) {
    throw ValidationError("update_input: expected length " + std::to_string(n) +
                          ", got delta " + std::to_string(delta_prev.size()) +
                          " and e " + std::to_string(e_prev.size()));
  }
  return op.Q * (delta_prev - op.L * e_prev);
}

double qilc_cost(const Eigen::MatrixXd& P, const WeightSpec& weights,
                 const Eigen::VectorXd& delta_prev,
                 const Eigen::VectorXd& e_prev, const Eigen::VectorXd& delta) {
  const Eigen::VectorXd d = e_prev - P * delta_prev;
  const Eigen::VectorXd e = P * delta + d;
  const Eigen::VectorXd change = delta - delta_prev;
  return e.dot(weights.T.apply(e)) + delta.dot(weights.R.apply(delta)) +
         change.dot(weights.S.apply(change));
}

OptimalityResidual optimality_residual(const LearningOperator& op,
                                       const Eigen::MatrixXd& P,
                                       const WeightSpec& weights,
                                       const Eigen::VectorXd& delta_prev,
                                       const Eigen::VectorXd& e_prev) {
  const Eigen::VectorXd delta = update_input(op, delta_prev, e_prev);
  const Eigen::VectorXd d = e_prev - P * delta_prev;
  // Half gradient: P^T T (P delta + d) + R delta + S (delta - delta_prev).
  const Eigen::VectorXd tracking = P.transpose() * weights.T.apply(Eigen::VectorXd(P * delta + d));
  const Eigen::VectorXd effort = weights.R.apply(delta);
  const Eigen::VectorXd change = weights.S.apply(Eigen::VectorXd(delta - delta_prev));
  OptimalityResidual out;
  out.absolute = (tracking + effort + change).norm();
  const double scale = tracking.norm() + effort.norm() + change.norm();
  out.relative = scale > 0.0 ? out.absolute / scale : 0.0;
  return out;
}

void write_learned_input(const std::filesystem::path& path,
                         const TimeGrid& grid, const Eigen::VectorXd& delta) {
  if (static_cast<std::size_t>(delta.size()) != grid.samples) {
    throw ValidationError("learned input length does not match the grid");
  }
  std::ofstream out = csv::open_output(path);
  out << "k,s_m,delta_L_rad\n";
  for (Eigen::Index k = 0; k < delta.size(); ++k) {
    out << k << ',' << csv::format_double(grid.distances[static_cast<std::size_t>(k)])
        << ',' << csv::format_double(delta(k)) << '\n';
  }
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

LearnedInput read_learned_input(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  const std::string where = path.string();
  if (lines.empty() || lines.front() != "k,s_m,delta_L_rad") {
    throw ParseError(where + ": expected header 'k,s_m,delta_L_rad'");
  }
  LearnedInput input;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string context = where + ":" + std::to_string(i + 1);
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 3) throw ParseError(context + ": expected 3 fields");
    const double k = csv::parse_double(fields[0], context);
    if (k != static_cast<double>(input.delta.size())) {
      throw ParseError(context + ": sample index out of sequence");
    }
    input.distances.push_back(csv::parse_double(fields[1], context));
    input.delta.push_back(csv::parse_double(fields[2], context));
  }
  if (input.delta.empty()) throw ParseError(where + ": no samples");
  return input;
}

}  // namespace ilcrace
