#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dqsim::theory {

// Inputs to every bound: accuracy epsilon, confidence delta, learning-rate
// decay omega, block-growth constants (kappa, delta_slack, c), covering
// number covering_l (1 in the synchronous setting), and the MDP scale
// (gamma, r_max).
struct TheoryParams {
  double gamma = 0.5;
  double epsilon = 0.5;
  double delta = 0.05;
  double omega = 0.8;
  double kappa = 0.8;
  double delta_slack = 0.1;  // the slack Delta in ln(2+Delta)
  double c = 1.0;
  int covering_l = 1;
  double r_max = 1.0;
};

struct DerivedConstants {
  double v_max;         // 2 r_max / (1-gamma)
  double xi;            // (1-gamma)/4, decay rate of the G sequence
  double sigma;         // (1-gamma)/(2 gamma)
  double beta;          // (1-gamma(1+sigma))/2, equals xi
  double gamma_prime;   // (1+gamma)/2
  double gamma_dprime;  // gamma(1+sigma), equals gamma_prime
};

DerivedConstants derive_constants(double gamma, double r_max);

// Geometric block envelopes: G_q = (1-xi)^q V_max bounds ||Q^B - Q^A|| on
// block q+1, D_k = (1-beta)^k V_max/sigma bounds ||Q^A - Q*||; sigma*D_k
// equals G_k because beta == xi and G_0 == sigma*D_0.
double g_seq(long q, const DerivedConstants& c);
double d_seq(long k, const DerivedConstants& c);

// Block boundaries tau_{q+1} = tau_q + ceil(step_coeff * tau_q^omega),
// step_coeff = 2c/kappa (synchronous) or 2cL/kappa (asynchronous). Rounding
// up keeps the schedule integral and only lengthens blocks.
struct BlockSchedule {
  long tau_1 = 0;
  double step_coeff = 0.0;
  double omega = 0.0;
  std::vector<long> boundaries;  // n_blocks+1 entries starting at tau_1
};

BlockSchedule epoch_schedule(long tau_1, double step_coeff, double omega, int n_blocks);
double step_coeff(const TheoryParams& p, bool sync);

// Which printed condition a bound refers to: the G-sequence (inter-estimator
// gap) or the D-sequence (optimality gap), synchronous or asynchronous.
enum class BoundKind { kSyncG, kSyncD, kAsyncG, kAsyncD };

std::string bound_kind_name(BoundKind k);

// Lower bound on the block-growth constant c for the selected condition.
// Throws std::domain_error naming the violated tau_1 condition when the
// denominator is not positive.
double c_min(BoundKind kind, double kappa, double delta_slack, double tau_1,
             double omega, int covering_l);
// Largest lower bound over the conditions in force (G and D together).
double c_min_composed(const TheoryParams& p, double tau_1, bool sync);

// Minimal first-block end tau_1 for the selected condition, the max of the
// two printed expressions. Throws std::domain_error when a log argument or
// the first-term denominator leaves its domain.
double tau1_min(BoundKind kind, const TheoryParams& p, const DerivedConstants& c);

// Blocks needed for the D envelope to reach epsilon:
// ceil((4/(1-gamma)) ln(2 gamma v_max / (epsilon (1-gamma)))),
// or 0 when epsilon >= D_0 already.
long m_star(double gamma, double epsilon, double v_max);

// Largest block index n with g_seq(n) >= sigma*epsilon (equivalently
// d_seq(n) >= epsilon), the range the block-wise envelope statements cover.
long max_valid_block(const DerivedConstants& c, double epsilon);

// The subtracted failure term of the selected high-probability statement,
// evaluated at the given first-block end and block count, clamped to [0,1].
double failure_prob(BoundKind kind, long n_blocks, const TheoryParams& p,
                    const DerivedConstants& c, double tau_1, long sa_count);

// Probability that some of the first m blocks receives fewer than
// c L tau_k^omega updates of the tracked table:
// min(1, m exp(-(1-kappa)^2 c L tau_1^omega / kappa)).
double update_deficit_prob(long m, double tau_1, double c, double kappa,
                           double omega, int covering_l);

// Iteration-complexity scale indicators. These evaluate the arguments of the
// asymptotic expressions with no hidden constants; they order configurations,
// they do not certify absolute counts.
struct IterationScale {
  double lr_term;     // ( ... )^(1/omega)
  double block_term;  // ( ... )^(1/(1-omega))
  double total;
};

IterationScale iteration_scale(const TheoryParams& p, const DerivedConstants& c,
                                long s_count, long a_count, bool sync);

// prod_{i=t1}^{t2} (1 - 1/i^omega) together with its bound
// exp(-(t2-t1)/t2^omega); requires 1 < t1 < t2.
std::pair<double, double> prod_help_check(long t1, long t2, double omega);

// (tau^b e^{-2 tau/a}, e^{-tau/a}); requires a,b > 0, 2ab ln(ab) > 1 and
// tau >= 2ab ln(ab).
std::pair<double, double> tau_help_check(double a, double b, double tau);

// Parameter validation. The G-sequence condition needs kappa in (0,1) and
// delta_slack in (0, e-2); everything touching the D sequence or the
// asynchronous setting needs kappa in (ln 2, 1) and delta_slack in
// (0, e^kappa - 2). Throws std::invalid_argument naming the field.
void validate_for_g_sequence(const TheoryParams& p);
void validate_strict(const TheoryParams& p);

}  // namespace dqsim::theory
