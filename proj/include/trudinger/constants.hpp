// Explicit constants of the estimate chain for the doubly nonlinear
// evolution  d_t u = Delta_p(u^{1/(p-1)}),  p > 1.
//
// With q = 1/(p-1) and a moment exponent lambda, the energy (Caccioppoli)
// estimate for subsolutions carries two explicit constants (alpha = lambda/p):
//
//   c1 = lambda (lambda-1) / (2^p (p-1)^{p-1}) * alpha^{-p}
//   c2 = lambda (lambda-1) / (2   (p-1)^{p-1}) * alpha^{-p}
//        + lambda 2^{p-1} p^p / ((lambda-1)^{p-1} (p-1)^{p-1})
//
// and the ratio collapses to the closed form
//
//   c2/c1 = 2^{p-1} + 2^{2p-1} lambda^p / (lambda-1)^p,
//
// independent of how alpha enters.  From c2 the Davies-Gaffney exponent is
//
//   zeta_dg = (p-1) / (2 c2^{1/(p-1)}),
//
// while the self-similar (Barenblatt-type) solution fixes the sharp exponent
//
//   zeta_b = (p-1)^2 p^{-p/(p-1)}     (= 1/4 at p = 2, the heat kernel).
//
// The estimates themselves are stated under lambda >= max(p, p/(p-1)) >= 2;
// the closed forms above are well-defined arithmetic for every lambda >= 2,
// and are evaluated as such so that ratio identities can be checked on full
// parameter sweeps.  Use lambda_admissible() where the inequality machinery
// (not just the arithmetic) is exercised.
//
// The module also covers the Sobolev bookkeeping exponents (kappa, nu), the
// neighborhood-decay constant epsilon(theta, p, lambda), and the closed-form
// bound for the fast-geometric iteration
//
//   J_{k+1} <= (A^k / Theta) J_k^{1+omega}
//   =>  J_k <= (J_0 / (A^{-1/omega} Theta)^{1/omega})^{(1+omega)^k}
//              * (A^{-k-1/omega} Theta)^{1/omega},
//
// evaluated in log space because the doubly exponential growth overflows
// doubles almost immediately.  All functions are pure.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trudinger {

// Threshold below which the subsolution estimates are not stated.
inline double min_admissible_lambda(double p)
{
   if (!(p > 1.0)) { throw std::invalid_argument("min_admissible_lambda: p must be > 1"); }
   return std::max(p, p / (p - 1.0));
}

inline bool lambda_admissible(double p, double lambda)
{
   return lambda >= min_admissible_lambda(p) * (1.0 - 1e-12);
}

namespace detail {

inline void require_p(double p)
{
   if (!(p > 1.0) || !std::isfinite(p))
   {
      throw std::invalid_argument("p must be finite and > 1");
   }
}

inline void require_lambda(double lambda)
{
   if (!(lambda >= 2.0) || !std::isfinite(lambda))
   {
      throw std::invalid_argument("lambda must be finite and >= 2");
   }
}

} // namespace detail

struct CaccioppoliConstants
{
   double c1 = 0.0;
   double c2 = 0.0;
};

inline CaccioppoliConstants caccioppoli_constants(double p, double lambda)
{
   detail::require_p(p);
   detail::require_lambda(lambda);
   const double alpha = lambda / p;
   const double lead = lambda * (lambda - 1.0) / std::pow(p - 1.0, p - 1.0)
                       * std::pow(alpha, -p);
   CaccioppoliConstants c;
   c.c1 = lead / std::pow(2.0, p);
   c.c2 = lead / 2.0
          + lambda * std::pow(2.0, p - 1.0) * std::pow(p, p)
            / (std::pow(lambda - 1.0, p - 1.0) * std::pow(p - 1.0, p - 1.0));
   return c;
}

// Closed form of c2/c1; used to cross-check the two expressions above.
inline double caccioppoli_ratio_identity(double p, double lambda)
{
   detail::require_p(p);
   detail::require_lambda(lambda);
   return std::pow(2.0, p - 1.0)
          + std::pow(2.0, 2.0 * p - 1.0) * std::pow(lambda / (lambda - 1.0), p);
}

// Exponent of the Davies-Gaffney tail bound:  zeta = (p-1) / (2 c2^{1/(p-1)}).
// At fixed p = 2 this *increases* with lambda (c2(2, lambda) = 2(lambda-1)/lambda
// + 8 lambda/(lambda-1) is strictly decreasing on lambda >= 2: 17, 73/6, ... -> 10).
inline double zeta_davies_gaffney(double p, double lambda)
{
   const double c2 = caccioppoli_constants(p, lambda).c2;
   return (p - 1.0) / (2.0 * std::pow(c2, 1.0 / (p - 1.0)));
}

// Sharp self-similar exponent:  zeta_b = (p-1)^2 p^{-p/(p-1)}.
inline double zeta_barenblatt(double p)
{
   detail::require_p(p);
   return (p - 1.0) * (p - 1.0) * std::pow(p, -p / (p - 1.0));
}

struct SobolevExponents
{
   double kappa = 2.0;  // > 1
   double nu = 0.5;     // = 1 - 1/kappa, in (0, 1]
};

// kappa = n/(n-p), nu = p/n when n > p; otherwise kappa may be any value > 1
// (configurable, default 2) with nu = 1 - 1/kappa.
inline SobolevExponents sobolev_exponents(int n, double p, double kappa_when_small = 2.0)
{
   detail::require_p(p);
   if (n < 1) { throw std::invalid_argument("sobolev_exponents: n must be >= 1"); }
   SobolevExponents s;
   if (static_cast<double>(n) > p)
   {
      s.kappa = static_cast<double>(n) / (static_cast<double>(n) - p);
      s.nu = p / static_cast<double>(n);
   }
   else
   {
      if (!(kappa_when_small > 1.0))
      {
         throw std::invalid_argument("sobolev_exponents: kappa must be > 1 when n <= p");
      }
      s.kappa = kappa_when_small;
      s.nu = 1.0 - 1.0 / kappa_when_small;
   }
   return s;
}

// Decay constant of the neighborhood estimate:
//
//   epsilon = inf_{k >= 1}  zeta_dg * theta^{k/(p-1)}
//             / (k^{p/(p-1)} (k+1)^{p/(p-1)+1} (theta-1)^{1/(p-1)}).
//
// Successive term ratios increase monotonically towards theta^{1/(p-1)} > 1,
// so the infimum is attained at the first k whose successor term is larger;
// the scan is capped defensively at k = 10^4.
inline double epsilon_iteration(double theta, double p, double lambda)
{
   detail::require_p(p);
   if (!(theta > 1.0)) { throw std::invalid_argument("epsilon_iteration: theta must be > 1"); }
   const double zeta = zeta_davies_gaffney(p, lambda);
   const double pp = p / (p - 1.0);
   const double log_zeta = std::log(zeta);
   const double log_theta = std::log(theta);
   const double log_tm1 = std::log(theta - 1.0);
   auto log_term = [&](int k)
   {
      return log_zeta + (k / (p - 1.0)) * log_theta
             - pp * std::log(static_cast<double>(k))
             - (pp + 1.0) * std::log(static_cast<double>(k + 1))
             - log_tm1 / (p - 1.0);
   };
   double best = log_term(1);
   for (int k = 2; k <= 10000; k++)
   {
      const double cur = log_term(k);
      if (cur > best) { return std::exp(best); }
      best = cur;
   }
   throw std::runtime_error("epsilon_iteration: minimum did not stabilize within k <= 1e4");
}

struct IterationParams
{
   double A = 1.0;      // > 0
   double Theta = 1.0;  // > 0
   double omega = 1.0;  // > 0
   double J0 = 0.0;     // >= 0

   void validate() const
   {
      if (!(A > 0.0) || !(Theta > 0.0) || !(omega > 0.0) || !(J0 >= 0.0))
      {
         throw std::invalid_argument("IterationParams: need A, Theta, omega > 0 and J0 >= 0");
      }
   }
};

// log of the closed-form bound on J_k; -inf when J0 = 0.
inline double iteration_bound_log(const IterationParams &prm, int k)
{
   prm.validate();
   if (k < 0) { throw std::invalid_argument("iteration_bound_log: k must be >= 0"); }
   if (prm.J0 == 0.0) { return -std::numeric_limits<double>::infinity(); }
   const double lA = std::log(prm.A);
   const double lT = std::log(prm.Theta);
   const double lJ = std::log(prm.J0);
   const double w = prm.omega;
   const double growth = std::pow(1.0 + w, static_cast<double>(k));
   // (J0 / (A^{-1/w} Theta)^{1/w})^{(1+w)^k} * (A^{-k-1/w} Theta)^{1/w}
   return growth * (lJ - lT / w + lA / (w * w))
          - (static_cast<double>(k) / w) * lA - lA / (w * w) + lT / w;
}

// Closed-form bound on J_k; +inf sentinel when it exceeds double range.
inline double iteration_bound(const IterationParams &prm, int k)
{
   const double lg = iteration_bound_log(prm, k);
   if (lg > 709.0) { return std::numeric_limits<double>::infinity(); }
   return std::exp(lg);
}

// The special case: when Theta >= A^{1/omega} J0^omega the bound simplifies
// to J_k <= A^{-k/omega} J0.
inline bool iteration_special_case_applies(const IterationParams &prm)
{
   prm.validate();
   if (prm.J0 == 0.0) { return true; }
   return std::log(prm.Theta)
          >= std::log(prm.A) / prm.omega + prm.omega * std::log(prm.J0);
}

inline double iteration_bound_special(const IterationParams &prm, int k)
{
   prm.validate();
   if (k < 0) { throw std::invalid_argument("iteration_bound_special: k must be >= 0"); }
   return std::exp(-(static_cast<double>(k) / prm.omega) * std::log(prm.A)
                   + std::log(prm.J0));
}

struct RemarkRatios
{
   double p_over_c1 = 0.0;   // bounded by C_p * lambda^{p-2}
   double c2_over_c1 = 0.0;  // bounded by C_p
   double c2 = 0.0;          // bounded by C_p * lambda^{2-p}
};

inline RemarkRatios remark_ratio_bounds(double p, double lambda)
{
   const CaccioppoliConstants c = caccioppoli_constants(p, lambda);
   RemarkRatios r;
   r.p_over_c1 = p / c.c1;
   r.c2_over_c1 = c.c2 / c.c1;
   r.c2 = c.c2;
   return r;
}

// Everything downstream modules need, as a function of (p, n, lambda, theta).
// Theta certifies polynomial growth of the reference regular function
// gamma(t) = const * t^{(lambda-1)/nu}:  gamma(theta t) = Theta * gamma(t).
struct ConstantsTable
{
   double p = 2.0;
   double q = 1.0;        // 1/(p-1)
   double lambda = 2.0;
   double alpha = 1.0;    // lambda/p
   double c1 = 0.0;
   double c2 = 0.0;
   double zeta_dg = 0.0;
   double zeta_b = 0.0;
   double kappa = 2.0;
   double nu = 0.5;
   double theta = 2.0;
   double Theta = 0.0;    // theta^{(lambda-1)/nu}
   double epsilon = 0.0;
};

inline ConstantsTable build_constants_table(double p, int n, double lambda,
                                            double theta = 2.0,
                                            double kappa_when_small = 2.0)
{
   detail::require_p(p);
   detail::require_lambda(lambda);
   if (!(theta > 1.0)) { throw std::invalid_argument("build_constants_table: theta must be > 1"); }
   ConstantsTable t;
   t.p = p;
   t.q = 1.0 / (p - 1.0);
   t.lambda = lambda;
   t.alpha = lambda / p;
   const CaccioppoliConstants c = caccioppoli_constants(p, lambda);
   t.c1 = c.c1;
   t.c2 = c.c2;
   t.zeta_dg = zeta_davies_gaffney(p, lambda);
   t.zeta_b = zeta_barenblatt(p);
   const SobolevExponents s = sobolev_exponents(n, p, kappa_when_small);
   t.kappa = s.kappa;
   t.nu = s.nu;
   t.theta = theta;
   t.Theta = std::pow(theta, (lambda - 1.0) / s.nu);
   t.epsilon = epsilon_iteration(theta, p, lambda);
   return t;
}

} // namespace trudinger
