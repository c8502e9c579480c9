#include "dqsim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dqsim::theory {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double square(double x) { return x * x; }

// Shared shape of every first-block minimum: max of the reciprocal-gap term
// and (2a ln a)^(1/omega), where a is the condition's exponential scale.
double tau1_from_scale(double gap, double a, double omega, const char* what) {
  if (!(gap > 0.0)) {
    std::ostringstream os;
    os << what << ": 1 - or kappa - ln(2+delta_slack) must be positive, got " << gap;
    throw std::domain_error(os.str());
  }
  if (!(a > 1.0)) {
    std::ostringstream os;
    os << what << ": log argument must exceed 1, got " << a;
    throw std::domain_error(os.str());
  }
  const double first = std::pow(1.0 / gap, 1.0 / omega);
  const double second = std::pow(2.0 * a * std::log(a), 1.0 / omega);
  return std::max(first, second);
}

}  // namespace

DerivedConstants derive_constants(double gamma, double r_max) {
  require(gamma > 0.0 && gamma < 1.0, "derive_constants: gamma must lie in (0,1)");
  require(r_max > 0.0, "derive_constants: r_max must be positive");
  DerivedConstants c;
  c.v_max = 2.0 * r_max / (1.0 - gamma);
  c.xi = (1.0 - gamma) / 4.0;
  c.sigma = (1.0 - gamma) / (2.0 * gamma);
  c.beta = (1.0 - gamma * (1.0 + c.sigma)) / 2.0;
  c.gamma_prime = (1.0 + gamma) / 2.0;
  c.gamma_dprime = gamma * (1.0 + c.sigma);
  return c;
}

double g_seq(long q, const DerivedConstants& c) {
  require(q >= 0, "g_seq: index must be nonnegative");
  return std::pow(1.0 - c.xi, static_cast<double>(q)) * c.v_max;
}

double d_seq(long k, const DerivedConstants& c) {
  require(k >= 0, "d_seq: index must be nonnegative");
  return std::pow(1.0 - c.beta, static_cast<double>(k)) * c.v_max / c.sigma;
}

BlockSchedule epoch_schedule(long tau_1, double step_coeff, double omega, int n_blocks) {
  require(tau_1 >= 1, "epoch_schedule: tau_1 must be >= 1");
  require(n_blocks >= 1, "epoch_schedule: n_blocks must be >= 1");
  require(step_coeff > 0.0, "epoch_schedule: step coefficient must be positive, the schedule must increase");
  require(omega > 0.0 && omega < 1.0, "epoch_schedule: omega must lie in (0,1)");
  BlockSchedule s;
  s.tau_1 = tau_1;
  s.step_coeff = step_coeff;
  s.omega = omega;
  s.boundaries.reserve(n_blocks + 1);
  s.boundaries.push_back(tau_1);
  for (int q = 0; q < n_blocks; ++q) {
    const double tau = static_cast<double>(s.boundaries.back());
    const long step = static_cast<long>(std::ceil(step_coeff * std::pow(tau, omega)));
    s.boundaries.push_back(s.boundaries.back() + std::max<long>(step, 1));
  }
  return s;
}

double step_coeff(const TheoryParams& p, bool sync) {
  const double l = sync ? 1.0 : static_cast<double>(p.covering_l);
  return 2.0 * p.c * l / p.kappa;
}

std::string bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::kSyncG: return "sync-g";
    case BoundKind::kSyncD: return "sync-d";
    case BoundKind::kAsyncG: return "async-g";
    case BoundKind::kAsyncD: return "async-d";
  }
  return "?";
}

double c_min(BoundKind kind, double kappa, double delta_slack, double tau_1,
             double omega, int covering_l) {
  require(tau_1 >= 1.0, "c_min: tau_1 must be >= 1");
  require(omega > 0.0 && omega < 1.0, "c_min: omega must lie in (0,1)");
  require(covering_l >= 1, "c_min: covering_l must be >= 1");
  const double lg = std::log(2.0 + delta_slack);
  const double x = std::pow(tau_1, -omega);
  const double l = static_cast<double>(covering_l);
  double num = 0.0, den = 0.0;
  const char* cond = nullptr;
  switch (kind) {
    case BoundKind::kSyncG:
      num = lg + x;
      den = 1.0 - lg - x;
      cond = "1 - ln(2+delta_slack) - 1/tau_1^omega";
      break;
    case BoundKind::kSyncD:
      num = kappa * (lg + x);
      den = 2.0 * (kappa - lg - x);
      cond = "kappa - ln(2+delta_slack) - 1/tau_1^omega";
      break;
    case BoundKind::kAsyncG:
      num = l * kappa * (lg + x);
      den = 2.0 * (kappa - lg - x);
      cond = "kappa - ln(2+delta_slack) - 1/tau_1^omega";
      break;
    case BoundKind::kAsyncD:
      // Unlike the synchronous variant there is no kappa factor in this
      // numerator; kept as stated.
      num = l * (lg + x);
      den = 2.0 * (kappa - lg - x);
      cond = "kappa - ln(2+delta_slack) - 1/tau_1^omega";
      break;
  }
  if (!(den > 0.0)) {
    std::ostringstream os;
    os << "c_min(" << bound_kind_name(kind) << "): tau_1=" << tau_1
       << " violates the condition " << cond << " > 0";
    throw std::domain_error(os.str());
  }
  return num / den;
}

double c_min_composed(const TheoryParams& p, double tau_1, bool sync) {
  if (sync) {
    return std::max(c_min(BoundKind::kSyncG, p.kappa, p.delta_slack, tau_1, p.omega, 1),
                    c_min(BoundKind::kSyncD, p.kappa, p.delta_slack, tau_1, p.omega, 1));
  }
  return std::max(
      c_min(BoundKind::kAsyncG, p.kappa, p.delta_slack, tau_1, p.omega, p.covering_l),
      c_min(BoundKind::kAsyncD, p.kappa, p.delta_slack, tau_1, p.omega, p.covering_l));
}

double tau1_min(BoundKind kind, const TheoryParams& p, const DerivedConstants& c) {
  const double lg = std::log(2.0 + p.delta_slack);
  const double ratio2 = square(p.delta_slack / (2.0 + p.delta_slack));
  const double v2 = square(c.v_max);
  const double e2 = square(p.epsilon);
  const double cl = p.c * (kind == BoundKind::kAsyncG || kind == BoundKind::kAsyncD
                               ? static_cast<double>(p.covering_l)
                               : 1.0);
  const double cc = cl * (cl + p.kappa);
  const double k2 = square(p.kappa);
  switch (kind) {
    case BoundKind::kSyncG:
      return tau1_from_scale(1.0 - lg,
                             64.0 * cc * v2 / (k2 * ratio2 * square(c.xi) * square(c.sigma) * e2),
                             p.omega, "tau1_min(sync-g)");
    case BoundKind::kSyncD:
      return tau1_from_scale(p.kappa - lg,
                             16.0 * cc * v2 / (k2 * ratio2 * square(c.beta) * e2),
                             p.omega, "tau1_min(sync-d)");
    case BoundKind::kAsyncG:
      return tau1_from_scale(p.kappa - lg,
                             64.0 * cc * v2 / (k2 * ratio2 * square(c.xi) * square(c.sigma) * e2),
                             p.omega, "tau1_min(async-g)");
    case BoundKind::kAsyncD:
      return tau1_from_scale(p.kappa - lg,
                             16.0 * cc * v2 / (k2 * ratio2 * square(c.beta) * e2),
                             p.omega, "tau1_min(async-d)");
  }
  throw std::logic_error("unreachable");
}

long m_star(double gamma, double epsilon, double v_max) {
  require(gamma > 0.0 && gamma < 1.0, "m_star: gamma must lie in (0,1)");
  require(epsilon > 0.0, "m_star: epsilon must be positive");
  const double d0 = 2.0 * gamma * v_max / (1.0 - gamma);
  if (epsilon >= d0) return 0;
  const double m = 4.0 / (1.0 - gamma) * std::log(d0 / epsilon);
  return static_cast<long>(std::ceil(m));
}

long max_valid_block(const DerivedConstants& c, double epsilon) {
  require(epsilon > 0.0, "max_valid_block: epsilon must be positive");
  long n = 0;
  while (d_seq(n + 1, c) >= epsilon && n < 100000) ++n;
  return n;
}

double failure_prob(BoundKind kind, long n_blocks, const TheoryParams& p,
                    const DerivedConstants& c, double tau_1, long sa_count) {
  require(n_blocks >= 0, "failure_prob: block count must be nonnegative");
  require(sa_count >= 1, "failure_prob: sa_count must be >= 1");
  require(tau_1 >= 1.0, "failure_prob: tau_1 must be >= 1");
  const bool async = kind == BoundKind::kAsyncG || kind == BoundKind::kAsyncD;
  const bool gap = kind == BoundKind::kSyncG || kind == BoundKind::kAsyncG;
  const double cl = p.c * (async ? static_cast<double>(p.covering_l) : 1.0);
  const double ratio2 = square(p.delta_slack / (2.0 + p.delta_slack));
  const double v2 = square(c.v_max);
  const double tau_pow = std::pow(tau_1, p.omega);
  // The G-sequence statement concentrates xi*sigma*epsilon with a 64 scale,
  // the D-sequence one concentrates beta*epsilon with a 16 scale. The
  // (delta_slack/(2+delta_slack))^2 factor is used in all four variants.
  const double amp2 = gap ? square(c.xi) * square(c.sigma) : square(c.beta);
  const double scale = (gap ? 64.0 : 16.0) * cl * (cl + p.kappa) * v2;
  const double expo = square(p.kappa) * ratio2 * amp2 * square(p.epsilon) * tau_pow / scale;
  const double pref = 4.0 * cl * static_cast<double>(n_blocks + 1) / p.kappa *
                      (1.0 + 2.0 * cl / p.kappa) * static_cast<double>(sa_count);
  return std::clamp(pref * std::exp(-expo), 0.0, 1.0);
}

double update_deficit_prob(long m, double tau_1, double c, double kappa,
                           double omega, int covering_l) {
  require(kappa > 0.0 && kappa < 1.0, "update_deficit_prob: kappa must lie in (0,1)");
  require(m >= 0, "update_deficit_prob: m must be nonnegative");
  if (m == 0) return 0.0;
  const double expo = square(1.0 - kappa) * c * static_cast<double>(covering_l) *
                      std::pow(tau_1, omega) / kappa;
  return std::clamp(static_cast<double>(m) * std::exp(-expo), 0.0, 1.0);
}

IterationScale iteration_scale(const TheoryParams& p, const DerivedConstants& c,
                                long s_count, long a_count, bool sync) {
  const double one_mg = 1.0 - p.gamma;
  const double v2 = square(c.v_max);
  const double e2 = square(p.epsilon);
  const double sa = static_cast<double>(s_count) * static_cast<double>(a_count);
  const double l = sync ? 1.0 : static_cast<double>(p.covering_l);
  const double l4 = l * l * l * l;
  IterationScale out;
  out.lr_term = std::pow(
      l4 * v2 / (std::pow(one_mg, 4.0) * e2) *
          std::log(sa * l4 * v2 / (std::pow(one_mg, 5.0) * e2 * p.delta)),
      1.0 / p.omega);
  // The two settings print slightly different logs in the second term: the
  // synchronous form drops the leading gamma.
  const double log_arg = (sync ? c.v_max : p.gamma * c.v_max) / (one_mg * p.epsilon);
  out.block_term = std::pow(l * l / one_mg * std::log(log_arg), 1.0 / (1.0 - p.omega));
  out.total = out.lr_term + out.block_term;
  return out;
}

std::pair<double, double> prod_help_check(long t1, long t2, double omega) {
  require(t1 > 1, "prod_help_check: t1 must exceed 1");
  require(t2 > t1, "prod_help_check: t2 must exceed t1");
  require(omega > 0.0 && omega < 1.0, "prod_help_check: omega must lie in (0,1)");
  double prod = 1.0;
  for (long i = t1; i <= t2; ++i) prod *= 1.0 - std::pow(static_cast<double>(i), -omega);
  const double bound = std::exp(-static_cast<double>(t2 - t1) / std::pow(static_cast<double>(t2), omega));
  return {prod, bound};
}

std::pair<double, double> tau_help_check(double a, double b, double tau) {
  require(a > 0.0 && b > 0.0, "tau_help_check: a and b must be positive");
  const double threshold = 2.0 * a * b * std::log(a * b);
  require(threshold > 1.0, "tau_help_check: 2ab ln(ab) must exceed 1");
  require(tau >= threshold, "tau_help_check: tau must be >= 2ab ln(ab)");
  const double lhs = std::pow(tau, b) * std::exp(-2.0 * tau / a);
  const double rhs = std::exp(-tau / a);
  return {lhs, rhs};
}

void validate_for_g_sequence(const TheoryParams& p) {
  require(p.gamma > 1.0 / 3.0 && p.gamma < 1.0, "gamma must lie in (1/3,1)");
  require(p.epsilon > 0.0, "epsilon must be positive");
  require(p.delta > 0.0 && p.delta < 1.0, "delta must lie in (0,1)");
  require(p.omega > 0.0 && p.omega < 1.0, "omega must lie in (0,1)");
  require(p.r_max > 0.0, "r_max must be positive");
  require(p.covering_l >= 1, "covering_l must be >= 1");
  require(p.c > 0.0, "c must be positive");
  require(p.kappa > 0.0 && p.kappa < 1.0, "kappa must lie in (0,1)");
  require(p.delta_slack > 0.0 && p.delta_slack < std::exp(1.0) - 2.0,
          "delta_slack must lie in (0, e-2)");
}

void validate_strict(const TheoryParams& p) {
  validate_for_g_sequence(p);
  std::ostringstream os;
  os << "kappa must exceed ln 2 = " << std::log(2.0)
     << " when the optimality-gap sequence is used";
  require(p.kappa > std::log(2.0), os.str());
  require(p.delta_slack < std::exp(p.kappa) - 2.0,
          "delta_slack must lie in (0, e^kappa - 2)");
}

}  // namespace dqsim::theory
