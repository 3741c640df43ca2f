// Exact self-similar reference solutions of the radial evolution
//
//   d_t u = -(1/S) d_r ( S * (-d_r u^{1/(p-1)})^{p-1} ),      p > 1,
//
// which is  d_t u = Delta_p(u^{1/(p-1)})  on a model manifold with profile
// S(r), written for radially non-increasing u.  With the separation ansatz
// u(r,t) = t^{-a} f(r t^b), a = alpha/p, b = -1/p (alpha the profile
// exponent: S = C r^{alpha-1}; alpha = n in the Euclidean case), the profile
// solves
//
//   f'(s)/f(s) = -(p-1) (s/p)^{1/(p-1)},
//
// whose solution is  f(s) = exp(-zeta_b s^{p/(p-1)})  with the sharp
// exponent zeta_b = (p-1)^2 p^{-p/(p-1)} from the constants module.  At
// p = 2, n arbitrary this is the classical heat kernel profile e^{-r^2/4t}.
//
// The struct stores zeta explicitly so tests can probe perturbed exponents
// (a wrong zeta must leave a nonzero ODE residual).

#pragma once

#include <cmath>
#include <stdexcept>

#include "trudinger/constants.hpp"
#include "trudinger/geometry.hpp"

namespace trudinger {

struct ExactSolution
{
   double p = 2.0;
   double alpha = 1.0;  // Euclidean: alpha = n
   double zeta = 0.25;  // normally zeta_barenblatt(p)

   static ExactSolution barenblatt(double p, int n)
   {
      if (n < 1) { throw std::invalid_argument("barenblatt: n must be >= 1"); }
      ExactSolution s;
      s.p = p;
      s.alpha = static_cast<double>(n);
      s.zeta = zeta_barenblatt(p);
      return s;
   }

   static ExactSolution polynomial_model(double p, double alpha)
   {
      if (!(alpha > 0.0)) { throw std::invalid_argument("polynomial_model: alpha must be > 0"); }
      ExactSolution s;
      s.p = p;
      s.alpha = alpha;
      s.zeta = zeta_barenblatt(p);
      return s;
   }

   // self-similar exponents: u(r, t) = t^{-a} f(r t^{b})
   double self_similar_a() const { return alpha / p; }
   double self_similar_b() const { return -1.0 / p; }

   // profile f(s) = exp(-zeta s^{p/(p-1)})
   double profile(double s) const
   {
      return std::exp(-zeta * std::pow(s, p / (p - 1.0)));
   }

   double evaluate(double r, double t) const
   {
      if (!(t > 0.0)) { throw std::domain_error("ExactSolution::evaluate: t must be > 0"); }
      if (!(r >= 0.0)) { throw std::domain_error("ExactSolution::evaluate: r must be >= 0"); }
      return std::pow(t, -alpha / p) * profile(r * std::pow(t, -1.0 / p));
   }
};

// f'(s)/f(s) + (p-1)(s/p)^{1/(p-1)}, with the analytic log-derivative
// f'/f = -zeta * p/(p-1) * s^{1/(p-1)}.  Zero to machine precision when
// zeta = zeta_barenblatt(p); replacing zeta by 2*zeta leaves the residual
// -(p-1)(s/p)^{1/(p-1)}.
inline double self_similar_profile_ode_residual(const ExactSolution &sol, double s)
{
   if (!(s > 0.0))
   {
      throw std::domain_error("self_similar_profile_ode_residual: s must be > 0");
   }
   const double p = sol.p;
   const double log_deriv = -sol.zeta * (p / (p - 1.0)) * std::pow(s, 1.0 / (p - 1.0));
   return log_deriv + (p - 1.0) * std::pow(s / p, 1.0 / (p - 1.0));
}

// Strong-form residual  d_t u + (1/S) d_r ( S (-d_r u^{1/(p-1)})^{p-1} )
// by centered finite differences with step h in both r and t.  For an exact
// solution it vanishes at order O(h^2) under h-halving; evaluated against a
// mismatched profile it does not vanish (negative control).
inline double pde_residual(const ExactSolution &sol, const ModelManifold &m,
                           double r, double t, double h)
{
   if (!(h > 0.0)) { throw std::invalid_argument("pde_residual: h must be > 0"); }
   if (!(t - h > 0.0)) { throw std::domain_error("pde_residual: need t - h > 0"); }
   if (!(r - 2.0 * h > m.inner_radius()))
   {
      throw std::domain_error("pde_residual: need r - 2h inside the domain");
   }

   const double q = 1.0 / (sol.p - 1.0);
   auto w = [&](double rr) { return std::pow(sol.evaluate(rr, t), q); };
   // flux magnitude G(r') = S(r') * (-d_r w)^{p-1}; exact solutions are
   // strictly decreasing in r, so -d_r w > 0.
   auto G = [&](double rr)
   {
      const double drw = (w(rr + h) - w(rr - h)) / (2.0 * h);
      return area_factor(m, rr) * std::pow(-drw, sol.p - 1.0);
   };

   const double dtu = (sol.evaluate(r, t + h) - sol.evaluate(r, t - h)) / (2.0 * h);
   const double div = (G(r + h) - G(r - h)) / (2.0 * h);
   return dtu + div / area_factor(m, r);
}

} // namespace trudinger
