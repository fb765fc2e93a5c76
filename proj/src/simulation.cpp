#include "parastab/simulation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "parastab/errors.hpp"

namespace parastab {

Complex StateSpace::response(Complex s) const {
  const int n = order();
  if (n == 0) return D;
  const Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
  const Eigen::VectorXcd v = M.partialPivLu().solve(B.cast<Complex>());
  return (C.cast<Complex>() * v)(0) + D;
}

StateSpace realize(const RationalTF& tf) {
  if (!tf.is_proper()) throw DomainError("realize: transfer function is improper");
  const Polynomial& den = tf.den();
  const int n = den.degree();
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::VectorXd::Zero(n);
  ss.C = Eigen::RowVectorXd::Zero(n);
  if (tf.is_zero()) return ss;
  // den is monic, so the feedthrough is the numerator coefficient of s^n.
  ss.D = tf.num().degree() == n ? tf.num()[static_cast<std::size_t>(n)] : 0.0;
  const Polynomial rest = tf.num() - den * ss.D;
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) ss.A(i, i + 1) = 1.0;
    ss.A(n - 1, i) = -den[static_cast<std::size_t>(i)];
    ss.C(i) = rest[static_cast<std::size_t>(i)];
  }
  if (n > 0) ss.B(n - 1) = 1.0;
  return ss;
}

SwitchedSystem assemble(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p, double K) {
  SwitchedSystem sys;
  sys.plant = realize(P);
  sys.series = realize(C_s);
  sys.parallel = realize(C_p);
  sys.K = K;
  const StateSpace& p = sys.plant;
  const StateSpace& s = sys.series;
  const StateSpace& c = sys.parallel;
  const int np = p.order(), ns = s.order(), nc = c.order(), n = np + ns + nc;

  const double loop = 1.0 + K * (p.D * s.D + c.D);
  if (std::abs(loop) < 1e-12 * (1.0 + std::abs(K * (p.D * s.D + c.D))))
    throw SimulationError("algebraic loop is singular: 1 + K (D_p D_s + D_c) = 0");

  sys.A_open = Eigen::MatrixXd::Zero(n, n);
  sys.A_open.block(0, 0, np, np) = p.A;
  sys.A_open.block(np, np, ns, ns) = s.A;
  sys.A_open.block(np + ns, np + ns, nc, nc) = c.A;
  sys.B_open = Eigen::VectorXd::Zero(n);
  sys.B_open.head(np) = p.B;

  sys.E_state = Eigen::RowVectorXd::Zero(n);
  sys.E_state.segment(0, np) = p.C;
  sys.E_state.segment(np, ns) = p.D * s.C;
  sys.E_state.segment(np + ns, nc) = c.C;
  sys.E_state *= -K / loop;
  sys.E_input = 1.0 / loop;

  // d/dt state = A0 state + G e, with x = C_s state_s + D_s e.
  Eigen::MatrixXd A0 = sys.A_open;
  A0.block(0, np, np, ns) = p.B * s.C;
  Eigen::VectorXd G = Eigen::VectorXd::Zero(n);
  G.head(np) = p.B * s.D;
  G.segment(np, ns) = s.B;
  G.segment(np + ns, nc) = c.B;
  sys.A_closed = A0 + G * sys.E_state;
  sys.B_closed = G * sys.E_input;
  return sys;
}

namespace {

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

SwitchedTrace simulate_switched(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p, double K,
                                const SimulationOptions& options) {
  const double h = options.step;
  if (!(h > 0.0) || !(options.horizon > 0.0)) throw DomainError("simulate_switched: step and horizon must be positive");
  const SwitchedSystem sys = assemble(P, C_s, C_p, K);
  const int np = sys.plant.order(), ns = sys.series.order(), n = sys.order();
  if (static_cast<int>(options.plant_state.size()) > np)
    throw DomainError("simulate_switched: plant state has more entries than the plant order " + std::to_string(np));

  for (const Eigen::MatrixXd* A : {&sys.A_open, &sys.A_closed}) {
    const double rho = spectral_radius(*A);
    if (h * rho > 2.5) {
      std::ostringstream msg;
      msg << "step " << h << " exceeds the RK4 guard 2.5 / " << rho << " = " << 2.5 / rho;
      throw SimulationError(msg.str());
    }
  }

  auto input = [&](double t) { return options.input ? options.input(t) : 0.0; };
  const auto steps = static_cast<std::size_t>(std::llround(options.horizon / h));
  const auto switch_index = static_cast<std::size_t>(std::max(0.0, std::ceil(options.switch_time / h - 1e-9)));

  Eigen::VectorXd state = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < options.plant_state.size(); ++j) state(static_cast<Eigen::Index>(j)) = options.plant_state[j];

  SwitchedTrace tr;
  tr.switch_time = static_cast<double>(switch_index) * h;
  tr.switch_index = switch_index;
  for (auto* v : {&tr.t, &tr.i, &tr.e, &tr.x, &tr.y, &tr.z}) v->reserve(steps + 1);

  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * h, in = input(t);
    const auto xs = state.segment(np, ns);
    const auto xc = state.tail(sys.parallel.order());
    double e, x, z;
    if (k < switch_index) {
      x = in;
      z = sys.parallel.C * xc;
    } else {
      e = sys.E_state * state + sys.E_input * in;
      x = sys.series.C * xs + sys.series.D * e;
      z = sys.parallel.C * xc + sys.parallel.D * e;
    }
    const double y = sys.plant.C * state.head(np) + sys.plant.D * x;
    if (k < switch_index) e = in - K * (y + z);
    tr.t.push_back(t);
    tr.i.push_back(in);
    tr.e.push_back(e);
    tr.x.push_back(x);
    tr.y.push_back(y);
    tr.z.push_back(z);
    if (k >= switch_index) {
      SignalPeaks& pk = tr.after_switch;
      pk.i = std::max(pk.i, std::abs(in));
      pk.e = std::max(pk.e, std::abs(e));
      pk.x = std::max(pk.x, std::abs(x));
      pk.y = std::max(pk.y, std::abs(y));
      pk.z = std::max(pk.z, std::abs(z));
    }
  };

  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    const bool closed = k >= switch_index;
    const Eigen::MatrixXd& A = closed ? sys.A_closed : sys.A_open;
    const Eigen::VectorXd& B = closed ? sys.B_closed : sys.B_open;
    const double t = static_cast<double>(k) * h;
    auto f = [&](const Eigen::VectorXd& s, double tt) -> Eigen::VectorXd { return A * s + B * input(tt); };
    const Eigen::VectorXd k1 = f(state, t);
    const Eigen::VectorXd k2 = f(state + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = f(state + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = f(state + h * k3, t + h);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(k + 1);
  }
  tr.final_state = state;
  return tr;
}

void write_trace_csv(std::ostream& out, const SwitchedTrace& trace) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "t,i,e,x,y,z\n" << std::setprecision(9);
  for (std::size_t k = 0; k < trace.t.size(); ++k)
    out << trace.t[k] << ',' << trace.i[k] << ',' << trace.e[k] << ',' << trace.x[k] << ',' << trace.y[k] << ','
        << trace.z[k] << '\n';
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace parastab
