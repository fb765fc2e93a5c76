#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "parastab/transfer_function.hpp"

namespace parastab {

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  [[nodiscard]] int order() const { return static_cast<int>(A.rows()); }
  /// C (sI - A)^-1 B + D.
  [[nodiscard]] Complex response(Complex s) const;
};

/// Controllable canonical form. Throws DomainError for an improper tf.
StateSpace realize(const RationalTF& tf);

/// The interconnection x = C_s e, y = P x, z = C_p e, e = i - K (y + z) as
/// a linear system in the stacked state (plant, C_s, C_p), with the algebraic
/// loop through the direct feedthrough terms solved exactly. The open system
/// has both compensator inputs grounded and the plant driven by i directly.
struct SwitchedSystem {
  StateSpace plant, series, parallel;
  double K = 0.0;
  /// Open switches: d/dt state = A_open state + B_open i.
  Eigen::MatrixXd A_open;
  Eigen::VectorXd B_open;
  /// Closed switches.
  Eigen::MatrixXd A_closed;
  Eigen::VectorXd B_closed;
  /// e = E_state . state + E_input i once the switches are closed.
  Eigen::RowVectorXd E_state;
  double E_input = 0.0;

  [[nodiscard]] int order() const { return static_cast<int>(A_open.rows()); }
};

/// Throws SimulationError when 1 + K (D_p D_s + D_c) vanishes.
SwitchedSystem assemble(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p, double K);

struct SimulationOptions {
  double switch_time = 1.0;
  double horizon = 10.0;
  double step = 1e-3;
  /// Plant initial state; missing entries are zero.
  std::vector<double> plant_state;
  /// External input i(t); zero when empty.
  std::function<double(double)> input;
};

struct SignalPeaks {
  double i = 0.0, e = 0.0, x = 0.0, y = 0.0, z = 0.0;
};

struct SwitchedTrace {
  std::vector<double> t, i, e, x, y, z;
  double switch_time = 0.0;
  /// Index of the first sample with closed switches.
  std::size_t switch_index = 0;
  /// max |signal| over samples at or after the switch.
  SignalPeaks after_switch;
  Eigen::VectorXd final_state;
};

/// Fixed-step RK4 over [0, horizon]. Compensator states start at zero and
/// keep evolving with grounded inputs while the switches are open. Before
/// the switch e records the summing junction, which is not applied.
///
/// Throws SimulationError when the step exceeds 2.5 / max|eig| of either
/// system matrix or the algebraic loop is singular.
SwitchedTrace simulate_switched(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p, double K,
                                const SimulationOptions& options);

/// Header t,i,e,x,y,z and one row per sample, 9 significant digits.
void write_trace_csv(std::ostream& out, const SwitchedTrace& trace);

}  // namespace parastab
