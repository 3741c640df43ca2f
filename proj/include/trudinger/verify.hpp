#pragma once

// Quantitative checks: every estimate the library knows about is evaluated
// with both sides made explicit, along either a numerical trace or an exact
// self-similar solution.  Each check reports CheckResult rows (lhs, rhs,
// margin, pass) plus whatever fitted constants the estimate family needs.
//
// Conventions shared by all checks:
//   * integrals are taken against the model measure; cell measures already
//     include the angular factor, and cells straddling a region edge
//     contribute the exact measure of the overlapped sub-cell;
//   * "elapsed" time means t - t0 where t0 is the first snapshot of the
//     trace (the initial profile plays the role of the datum u0);
//   * inequalities pass iff lhs <= rhs * (1 + tol), tol defaulting to 1e-6
//     relative, which absorbs snapshot interpolation error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trudinger/constants.hpp"
#include "trudinger/exact.hpp"
#include "trudinger/geometry.hpp"
#include "trudinger/quadrature.hpp"
#include "trudinger/solver.hpp"

namespace trudinger
{

/// One evaluated inequality instance.
struct CheckResult
{
   std::string check;
   double t = 0.0;
   double lhs = 0.0;
   double rhs = 0.0;
   double margin = 0.0; // rhs - lhs
   bool pass = false;
   std::string context;
};

// ---------------------------------------------------------------------------
// Weighted integrals and norms
// ---------------------------------------------------------------------------

/// Integral of u^lambda over the radial band [r_lo, r_hi] against the model
/// measure.  Cells fully inside contribute their cached measure; straddling
/// cells contribute the closed-form measure of the overlapped part.
inline double weighted_lp(const Field &field, const RadialGrid &grid, const ModelManifold &m,
                          double lambda, double r_lo, double r_hi)
{
   if (!(lambda > 0.0)) { throw std::invalid_argument("weighted_lp: lambda must be > 0"); }
   if (!(r_hi >= r_lo)) { throw std::invalid_argument("weighted_lp: need r_hi >= r_lo"); }
   if (field.values.size() != grid.cells)
   {
      throw std::invalid_argument("weighted_lp: field size does not match the grid");
   }
   const double lo = std::max(r_lo, grid.r_inner);
   const double hi = std::min(r_hi, grid.r_outer);
   if (!(hi > lo)) { return 0.0; }

   double sum = 0.0;
   for (std::size_t i = 0; i < grid.cells; ++i)
   {
      const double cl = grid.face_r[i];
      const double cr = grid.face_r[i + 1];
      if (cr <= lo || cl >= hi) { continue; }
      const double v = field.values[i];
      if (v == 0.0) { continue; }
      const double part_lo = std::max(cl, lo);
      const double part_hi = std::min(cr, hi);
      const double cell_measure = (part_lo == cl && part_hi == cr)
                                      ? grid.measure[i]
                                      : shell_volume(m, part_lo, part_hi);
      sum += cell_measure * std::pow(v, lambda);
   }
   return sum;
}

/// Same integral for an exact solution, via adaptive quadrature.
inline double exact_weighted_lp(const ExactSolution &sol, const ModelManifold &m,
                                double lambda, double r_lo, double r_hi, double t)
{
   if (!(lambda > 0.0)) { throw std::invalid_argument("exact_weighted_lp: lambda must be > 0"); }
   const double inner = m.inner_radius();
   const double lo = std::max(r_lo, inner);
   if (!(r_hi > lo)) { return 0.0; }
   const double omega = unit_sphere_area(m.n);
   const auto integrand = [&](double r)
   {
      if (r <= inner)
      {
         // Pole limit of the area factor (only the n = 1 line is nonzero).
         if (m.kind == ProfileKind::Euclidean && m.n == 1)
         {
            return omega * std::pow(sol.evaluate(r, t), lambda);
         }
         return 0.0;
      }
      return omega * area_factor(m, r) * std::pow(sol.evaluate(r, t), lambda);
   };
   return integrate_adaptive(integrand, lo, r_hi, 1e-10, 32);
}

/// Mass-weighted L^lambda norm of one snapshot; lambda = infinity (or any
/// non-positive value) selects the sup norm.
inline double norm_lp(const Field &field, const RadialGrid &grid, double lambda)
{
   if (!(lambda > 0.0) || std::isinf(lambda))
   {
      double mx = 0.0;
      for (double v : field.values) { mx = std::max(mx, v); }
      return mx;
   }
   double sum = 0.0;
   for (std::size_t i = 0; i < grid.cells; ++i)
   {
      if (field.values[i] > 0.0)
      {
         sum += grid.measure[i] * std::pow(field.values[i], lambda);
      }
   }
   return std::pow(sum, 1.0 / lambda);
}

/// Max of u over cells whose centers lie within [x_r - radius, x_r + radius];
/// exact for pole-centered balls on radial profiles.
inline double sup_over_ball(const Field &field, const RadialGrid &grid,
                            double center_radius, double radius)
{
   if (!(radius > 0.0)) { throw std::invalid_argument("sup_over_ball: radius must be > 0"); }
   const double lo = center_radius - radius;
   const double hi = center_radius + radius;
   double mx = -1.0;
   for (std::size_t i = 0; i < grid.cells; ++i)
   {
      if (grid.center_r[i] >= lo && grid.center_r[i] <= hi)
      {
         mx = std::max(mx, field.values[i]);
      }
   }
   if (mx < 0.0)
   {
      throw std::domain_error("sup_over_ball: interval does not intersect the grid");
   }
   return mx;
}

/// Exact-profile counterpart: radial profiles are non-increasing, so the sup
/// sits at the innermost point of the interval.
inline double exact_sup_over_ball(const ExactSolution &sol, double center_radius,
                                  double radius, double t)
{
   if (!(radius > 0.0))
   {
      throw std::invalid_argument("exact_sup_over_ball: radius must be > 0");
   }
   const double lo = std::max(0.0, center_radius - radius);
   return sol.evaluate(lo, t);
}

// ---------------------------------------------------------------------------
// Small shared utilities
// ---------------------------------------------------------------------------

struct LinearFit
{
   double slope = 0.0;
   double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(const std::vector<double> &x, const std::vector<double> &y)
{
   if (x.size() != y.size() || x.size() < 2)
   {
      throw std::invalid_argument("linear_fit: need two matching samples at least");
   }
   const double n = static_cast<double>(x.size());
   double sx = 0.0;
   double sy = 0.0;
   for (std::size_t i = 0; i < x.size(); ++i)
   {
      sx += x[i];
      sy += y[i];
   }
   const double mx = sx / n;
   const double my = sy / n;
   double sxx = 0.0;
   double sxy = 0.0;
   for (std::size_t i = 0; i < x.size(); ++i)
   {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
   }
   if (!(sxx > 0.0)) { throw std::invalid_argument("linear_fit: degenerate abscissae"); }
   LinearFit fit;
   fit.slope = sxy / sxx;
   fit.intercept = my - fit.slope * mx;
   return fit;
}

/// Exact-solution snapshots packaged as a trace (zero solver steps).
inline Trace make_exact_trace(const ExactSolution &sol, const RadialGrid &grid,
                              const std::vector<double> &times)
{
   if (times.empty()) { throw std::invalid_argument("make_exact_trace: need at least one time"); }
   Trace trace;
   trace.p = sol.p;
   trace.cfl = 0.0;
   trace.min_u_seen = 0.0;
   trace.dt_min = 0.0;
   trace.dt_max = 0.0;
   for (std::size_t k = 0; k < times.size(); ++k)
   {
      if (k > 0 && !(times[k] > times[k - 1]))
      {
         throw std::invalid_argument("make_exact_trace: times must be strictly increasing");
      }
      Field f;
      f.t = times[k];
      f.values.resize(grid.cells);
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         f.values[i] = sol.evaluate(grid.center_r[i], times[k]);
      }
      trace.snapshots.push_back(std::move(f));
   }
   return trace;
}

// ---------------------------------------------------------------------------
// Barrier weight for the weighted monotonicity check
// ---------------------------------------------------------------------------

/// Space-time weight xi(r_x, tau) = -zeta d(r_x)^{p/(p-1)} (s - tau)^{-1/(p-1)}
/// with d(r_x) the distance to the complement of the expanded ball; vanishes
/// outside the ball, is non-positive inside for zeta > 0, and satisfies
///    d_tau xi + c2 2^{p-1} p^{-p} |d_r xi|^p = 0
/// exactly when zeta equals the Davies-Gaffney rate for (p, lambda).
struct WeightFunction
{
   double zeta = 0.0;
   Region region;
   double s = 1.0; // reference time; evaluation requires tau < s
   double p = 2.0;

   WeightFunction(double zeta_, const Region &region_, double s_, double p_)
       : zeta(zeta_), region(region_), s(s_), p(p_)
   {
      detail::require_p(p_);
      if (!std::isfinite(s_)) { throw std::invalid_argument("WeightFunction: s must be finite"); }
   }

   double distance(double r_x) const { return region.dist_to_complement(r_x); }

   double xi(double r_x, double tau) const
   {
      check_tau(tau);
      const double d = distance(r_x);
      if (d == 0.0) { return 0.0; }
      const double pp = p / (p - 1.0);
      return -zeta * std::pow(d, pp) * std::pow(s - tau, -1.0 / (p - 1.0));
   }

   double dxi_dtau(double r_x, double tau) const
   {
      check_tau(tau);
      const double d = distance(r_x);
      if (d == 0.0) { return 0.0; }
      const double pp = p / (p - 1.0);
      return -(zeta / (p - 1.0)) * std::pow(d, pp) * std::pow(s - tau, -pp);
   }

   double dxi_dr(double r_x, double tau) const
   {
      check_tau(tau);
      const double d = distance(r_x);
      if (d == 0.0) { return 0.0; }
      const double pp = p / (p - 1.0);
      return zeta * pp * std::pow(d, 1.0 / (p - 1.0)) * std::pow(s - tau, -1.0 / (p - 1.0));
   }

private:
   void check_tau(double tau) const
   {
      if (!(tau < s))
      {
         throw std::domain_error("WeightFunction: requires tau < s");
      }
   }
};

struct WeightAudit
{
   double max_condition = 0.0; // max of (d_tau xi + c2 2^{p-1} p^{-p} |d_r xi|^p), normalized
   double max_xi = 0.0;        // max of xi over the sampled nodes
   bool ok = false;
};

/// Evaluate the decay condition and the sign constraint on a grid of radii
/// and times.  The derivatives are analytic, so at the exact rate the
/// condition cancels to roundoff; 1e-10 (relative to the derivative scale)
/// separates a correctly configured weight from a misconfigured one.
inline WeightAudit audit_weight(const WeightFunction &w, const std::vector<double> &radii,
                                const std::vector<double> &taus, double c2)
{
   WeightAudit audit;
   audit.max_condition = -std::numeric_limits<double>::infinity();
   audit.max_xi = -std::numeric_limits<double>::infinity();
   const double p = w.p;
   const double factor = c2 * std::pow(2.0, p - 1.0) * std::pow(p, -p);
   bool all_ok = true;
   for (double tau : taus)
   {
      for (double r : radii)
      {
         const double xi = w.xi(r, tau);
         const double dt = w.dxi_dtau(r, tau);
         const double dr = w.dxi_dr(r, tau);
         const double cond = dt + factor * std::pow(std::fabs(dr), p);
         const double scale = std::max(1.0, std::fabs(dt));
         audit.max_condition = std::max(audit.max_condition, cond / scale);
         audit.max_xi = std::max(audit.max_xi, xi);
         if (cond > 1e-10 * scale || xi > 0.0) { all_ok = false; }
      }
   }
   audit.ok = all_ok;
   return audit;
}

// ---------------------------------------------------------------------------
// Regular (polynomially growing) comparison functions
// ---------------------------------------------------------------------------

/// gamma(t) = t^e / C_gamma: increasing for e >= 0, with the exact growth
/// certificate gamma(theta t) = theta^e gamma(t).
struct RegularFunctionSpec
{
   double exponent = 0.0; // e >= 0
   double theta = 2.0;    // > 1
   double c_gamma = 1.0;  // scale; fitted by the neighborhood decay check

   RegularFunctionSpec(double exponent_, double theta_, double c_gamma_ = 1.0)
       : exponent(exponent_), theta(theta_), c_gamma(c_gamma_)
   {
      if (!(exponent_ >= 0.0))
      {
         throw std::invalid_argument("RegularFunctionSpec: exponent must be >= 0");
      }
      if (!(theta_ > 1.0)) { throw std::invalid_argument("RegularFunctionSpec: theta must be > 1"); }
      if (!(c_gamma_ > 0.0))
      {
         throw std::invalid_argument("RegularFunctionSpec: c_gamma must be > 0");
      }
   }

   double growth_theta() const { return std::pow(theta, exponent); } // Theta
   double gamma(double t) const { return std::pow(t, exponent) / c_gamma; }
};

// ---------------------------------------------------------------------------
// Check families
// ---------------------------------------------------------------------------

namespace detail
{

inline std::string context_prefix(double p, int n, double lambda)
{
   std::ostringstream os;
   os << "p=" << p << ";n=" << n << ";lambda=" << lambda;
   return os.str();
}

inline void require_snapshots(const Trace &trace, std::size_t count, const char *who)
{
   if (trace.snapshots.size() < count)
   {
      std::ostringstream os;
      os << who << ": insufficient data (need " << count << " snapshots, have "
         << trace.snapshots.size() << ")";
      throw std::runtime_error(os.str());
   }
}

} // namespace detail

/// Weighted monotonicity: J(t) = integral of u^lambda e^xi must not increase
/// from one snapshot to the next.  The weight is audited first (sign and
/// decay condition at every cell center and snapshot time); a failing audit
/// is a configuration error and the check refuses to run.
inline std::vector<CheckResult> check_integral_max_principle(
    const Trace &trace, const RadialGrid &grid, const ModelManifold &m, double lambda,
    const WeightFunction &weight, double c2, double tol = 1e-6)
{
   detail::require_snapshots(trace, 2, "check_integral_max_principle");
   if (!lambda_admissible(trace.p, lambda))
   {
      throw std::invalid_argument(
          "check_integral_max_principle: lambda must be >= max(p, p/(p-1))");
   }
   std::vector<double> taus;
   for (const Field &f : trace.snapshots) { taus.push_back(f.t); }
   if (!(taus.back() < weight.s))
   {
      throw std::invalid_argument(
          "check_integral_max_principle: weight reference time s must exceed every snapshot");
   }
   const WeightAudit audit = audit_weight(weight, grid.center_r, taus, c2);
   if (!audit.ok)
   {
      std::ostringstream os;
      os << "check_integral_max_principle: weight audit failed (max condition "
         << audit.max_condition << ", max xi " << audit.max_xi << ")";
      throw std::invalid_argument(os.str());
   }

   std::vector<double> J(trace.snapshots.size(), 0.0);
   for (std::size_t k = 0; k < trace.snapshots.size(); ++k)
   {
      const Field &f = trace.snapshots[k];
      double sum = 0.0;
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         if (f.values[i] > 0.0)
         {
            sum += grid.measure[i] * std::pow(f.values[i], lambda)
                   * std::exp(weight.xi(grid.center_r[i], f.t));
         }
      }
      J[k] = sum;
   }

   std::ostringstream ctx;
   ctx << detail::context_prefix(trace.p, m.n, lambda) << ";a=" << weight.region.a
       << ";rho=" << weight.region.rho << ";s=" << weight.s << ";tol=" << tol;
   std::vector<CheckResult> rows;
   for (std::size_t k = 0; k + 1 < trace.snapshots.size(); ++k)
   {
      CheckResult row;
      row.check = "integral_max_principle";
      row.t = trace.snapshots[k + 1].t;
      row.lhs = J[k + 1];
      row.rhs = J[k];
      row.margin = row.rhs - row.lhs;
      row.pass = row.lhs <= row.rhs * (1.0 + tol);
      row.context = ctx.str();
      rows.push_back(row);
   }
   return rows;
}

/// Two-region mass localization: the mass of u^lambda beyond the expanded
/// ball is bounded by the datum's mass outside the core ball plus an
/// exponentially small leakage of the datum's mass inside it.
inline std::vector<CheckResult> check_davies_gaffney(
    const Trace &trace, const RadialGrid &grid, const ModelManifold &m, double lambda,
    const Region &region, double tol = 1e-6)
{
   detail::require_snapshots(trace, 1, "check_davies_gaffney");
   if (!lambda_admissible(trace.p, lambda))
   {
      throw std::invalid_argument("check_davies_gaffney: lambda must be >= max(p, p/(p-1))");
   }
   if (!(region.rho > 0.0))
   {
      throw std::invalid_argument("check_davies_gaffney: need a positive expansion radius");
   }
   const double p = trace.p;
   const double zeta = zeta_davies_gaffney(p, lambda);
   const Field &u0 = trace.snapshots.front();
   const double t0 = u0.t;
   const double inside0 = weighted_lp(u0, grid, m, lambda, grid.r_inner, region.a);
   const double outside0 = weighted_lp(u0, grid, m, lambda, region.a, grid.r_outer);

   std::ostringstream ctx;
   ctx << detail::context_prefix(p, m.n, lambda) << ";a=" << region.a << ";r=" << region.rho
       << ";zeta=" << zeta << ";tol=" << tol;

   std::vector<CheckResult> rows;
   for (const Field &f : trace.snapshots)
   {
      const double elapsed = f.t - t0;
      double expfac = 0.0;
      if (elapsed > 0.0)
      {
         const double z = region.rho / std::pow(elapsed, 1.0 / p);
         expfac = std::exp(-zeta * std::pow(z, p / (p - 1.0)));
      }
      CheckResult row;
      row.check = "davies_gaffney";
      row.t = f.t;
      row.lhs = weighted_lp(f, grid, m, lambda, region.outer_radius(), grid.r_outer);
      row.rhs = outside0 + expfac * inside0;
      row.margin = row.rhs - row.lhs;
      row.pass = row.lhs <= row.rhs * (1.0 + tol);
      row.context = ctx.str();
      rows.push_back(row);
   }
   return rows;
}

struct NeighborhoodDecayResult
{
   double c_gamma = 0.0; // fitted hypothesis scale
   double c_fit = 0.0;   // smallest constant closing the conclusion in-regime
   std::vector<CheckResult> rows;
};

/// Small-mass neighborhood decay: once the mass of u^lambda inside the
/// rho-neighborhood is controlled by 1/gamma(t), the mass beyond it decays
/// like exp(-eps (rho / t^{1/p})^{p/(p-1)}) relative to 1/gamma(t).  The
/// hypothesis scale C_gamma is fitted from the trace (the fit is the
/// certificate); snapshots with elapsed^{1/p} > rho, or with zero elapsed
/// time, are recorded but excluded as out-of-regime.
inline NeighborhoodDecayResult check_neighborhood_decay(
    const Trace &trace, const RadialGrid &grid, const ModelManifold &m, double lambda,
    const Region &region, const RegularFunctionSpec &gamma_spec, double tol = 1e-6)
{
   detail::require_snapshots(trace, 2, "check_neighborhood_decay");
   if (!lambda_admissible(trace.p, lambda))
   {
      throw std::invalid_argument("check_neighborhood_decay: lambda must be >= max(p, p/(p-1))");
   }
   if (!(region.rho > 0.0))
   {
      throw std::invalid_argument("check_neighborhood_decay: need rho > 0");
   }
   const double p = trace.p;
   const double rho = region.rho;
   const double eps = epsilon_iteration(gamma_spec.theta, p, lambda);
   const double t0 = trace.snapshots.front().t;
   const double e = gamma_spec.exponent;

   struct Sample
   {
      double t = 0.0;
      double elapsed = 0.0;
      double lhs = 0.0;
      double z = 0.0; // (rho / elapsed^{1/p})^{p/(p-1)}
      bool in_regime = false;
   };
   std::vector<Sample> samples;
   double c_gamma = 0.0;
   for (const Field &f : trace.snapshots)
   {
      Sample s;
      s.t = f.t;
      s.elapsed = f.t - t0;
      s.lhs = weighted_lp(f, grid, m, lambda, region.outer_radius(), grid.r_outer);
      if (s.elapsed > 0.0)
      {
         s.z = std::pow(rho / std::pow(s.elapsed, 1.0 / p), p / (p - 1.0));
         s.in_regime = std::pow(s.elapsed, 1.0 / p) <= rho;
         // Hypothesis fit: mass inside the neighborhood against 1/gamma.
         const double inside = weighted_lp(f, grid, m, lambda, grid.r_inner,
                                           region.outer_radius());
         c_gamma = std::max(c_gamma, inside * std::pow(s.elapsed, e));
      }
      samples.push_back(s);
   }
   if (!(c_gamma > 0.0) || !std::isfinite(c_gamma))
   {
      throw std::runtime_error("check_neighborhood_decay: hypothesis certificate failed "
                               "(no positive finite C_gamma)");
   }

   // Conclusion fit in log space: C = max lhs * gamma(elapsed) * e^{+eps z}.
   double log_c_fit = -std::numeric_limits<double>::infinity();
   bool any_in_regime = false;
   for (const Sample &s : samples)
   {
      if (!s.in_regime || s.lhs <= 0.0) { continue; }
      any_in_regime = true;
      const double log_gamma = e * std::log(s.elapsed) - std::log(c_gamma);
      log_c_fit = std::max(log_c_fit, std::log(s.lhs) + log_gamma + eps * s.z);
   }
   if (!any_in_regime)
   {
      throw std::runtime_error("check_neighborhood_decay: insufficient data "
                               "(no in-regime snapshot with positive outer mass)");
   }

   NeighborhoodDecayResult result;
   result.c_gamma = c_gamma;
   result.c_fit = std::exp(log_c_fit);
   std::ostringstream ctx;
   ctx << detail::context_prefix(p, m.n, lambda) << ";a=" << region.a << ";rho=" << rho
       << ";eps=" << eps << ";theta=" << gamma_spec.theta << ";e=" << e << ";tol=" << tol;
   for (const Sample &s : samples)
   {
      CheckResult row;
      row.check = "neighborhood_decay";
      row.t = s.t;
      row.lhs = s.lhs;
      if (s.in_regime)
      {
         const double log_gamma = e * std::log(s.elapsed) - std::log(c_gamma);
         row.rhs = std::exp(log_c_fit - log_gamma - eps * s.z);
         row.margin = row.rhs - row.lhs;
         row.pass = row.lhs <= row.rhs * (1.0 + tol);
         row.context = ctx.str() + ";regime=in";
      }
      else
      {
         row.rhs = s.lhs;
         row.margin = 0.0;
         row.pass = true;
         row.context = ctx.str() + ";regime=out";
      }
      result.rows.push_back(row);
   }
   return result;
}

struct LambdaDecayResult
{
   double slope = 0.0;
   CheckResult row;
};

/// Polynomial decay of the lambda-mass: the least-squares slope of
/// log integral u^lambda against log t over the last decade must reach the
/// predicted rate -(lambda - 1) n / p, with 3% slack.
inline LambdaDecayResult check_lambda_decay(const Trace &trace, const RadialGrid &grid,
                                            const ModelManifold &m, double lambda)
{
   const double p = trace.p;
   const int n = m.n;
   const double t_max = trace.snapshots.back().t;
   std::vector<double> xs;
   std::vector<double> ys;
   for (const Field &f : trace.snapshots)
   {
      if (f.t < t_max / 10.0) { continue; }
      const double mass = weighted_lp(f, grid, m, lambda, grid.r_inner, grid.r_outer);
      if (!(mass > 0.0)) { continue; }
      xs.push_back(std::log(f.t));
      ys.push_back(std::log(mass));
   }
   if (xs.size() < 5)
   {
      throw std::runtime_error("check_lambda_decay: insufficient data "
                               "(need 5 snapshots in the last decade)");
   }
   const LinearFit fit = linear_fit(xs, ys);
   const double nu = p / static_cast<double>(n);
   const double target = -(lambda - 1.0) / nu * (1.0 - 0.03);

   LambdaDecayResult result;
   result.slope = fit.slope;
   result.row.check = "lambda_decay";
   result.row.t = t_max;
   result.row.lhs = fit.slope;
   result.row.rhs = target;
   result.row.margin = target - fit.slope;
   result.row.pass = fit.slope <= target + 1e-6;
   std::ostringstream ctx;
   ctx << detail::context_prefix(p, n, lambda) << ";nu=" << nu << ";samples=" << xs.size()
       << ";tol=1e-6abs";
   result.row.context = ctx.str();
   return result;
}

enum class EnvelopeNormalizer { BallVolume, TPower };

struct EnvelopeResult
{
   double c_report = 0.0;
   double window_factor = 0.0;
   std::vector<CheckResult> rows;
   CheckResult summary;
};

/// Sub-Gaussian envelope sweep: N(x, T) = (sup of u(T) over the ball of
/// radius T^{1/p}/2 at x) * normalizer * exp(c_exp (d(x, A)/T^{1/p})^{p/(p-1)}).
/// C_report is the largest N over the sweep; the pass criterion is a
/// stability proxy: the max over the lower half of the T-window and the max
/// over the upper half must agree within a factor of 2.
inline EnvelopeResult check_subgaussian_envelope(
    const Trace &trace, const RadialGrid &grid, const ModelManifold &m, const Region &support,
    double c_exp, const std::vector<double> &xs, const std::vector<double> &Ts,
    EnvelopeNormalizer mode)
{
   if (xs.empty() || Ts.size() < 2)
   {
      throw std::invalid_argument("check_subgaussian_envelope: need a sweep of x and T values");
   }
   if (!(c_exp > 0.0))
   {
      throw std::invalid_argument("check_subgaussian_envelope: c_exp must be > 0");
   }
   const double p = trace.p;
   const double n = static_cast<double>(m.n);

   EnvelopeResult result;
   double t_split = 2.0 * *std::min_element(Ts.begin(), Ts.end());
   double max_lower = 0.0;
   double max_upper = 0.0;
   std::ostringstream basectx;
   basectx << "p=" << p << ";n=" << m.n << ";a=" << support.a << ";c_exp=" << c_exp
           << ";mode=" << (mode == EnvelopeNormalizer::BallVolume ? "ball" : "tpower");

   for (double T : Ts)
   {
      // Locate the snapshot at absolute time T.
      const Field *snap = nullptr;
      for (const Field &f : trace.snapshots)
      {
         if (std::fabs(f.t - T) <= 1e-9 * std::max(1.0, T)) { snap = &f; }
      }
      if (snap == nullptr)
      {
         throw std::invalid_argument("check_subgaussian_envelope: no snapshot at a requested T");
      }
      const double Tp = std::pow(T, 1.0 / p);
      for (double x : xs)
      {
         const double sup = sup_over_ball(*snap, grid, x, 0.5 * Tp);
         double normalizer;
         if (mode == EnvelopeNormalizer::BallVolume)
         {
            normalizer = (x <= 0.0) ? ball_volume_at_pole(m, Tp)
                                    : off_pole_ball_volume_euclidean(m, x, Tp);
         }
         else
         {
            normalizer = std::pow(T, n / p);
         }
         const double d = std::max(0.0, x - support.a);
         const double N = sup * normalizer
                          * std::exp(c_exp * std::pow(d / Tp, p / (p - 1.0)));
         result.c_report = std::max(result.c_report, N);
         if (T <= t_split) { max_lower = std::max(max_lower, N); }
         else { max_upper = std::max(max_upper, N); }

         CheckResult row;
         row.check = "subgaussian_envelope";
         row.t = T;
         row.lhs = N;
         row.rhs = N;
         row.margin = 0.0;
         row.pass = std::isfinite(N);
         std::ostringstream ctx;
         ctx << basectx.str() << ";x=" << x;
         row.context = ctx.str();
         result.rows.push_back(row);
      }
   }

   if (max_lower > 0.0 && max_upper > 0.0)
   {
      result.window_factor = std::max(max_lower / max_upper, max_upper / max_lower);
   }
   else
   {
      result.window_factor = std::numeric_limits<double>::infinity();
   }
   result.summary.check = "subgaussian_envelope_stability";
   result.summary.t = *std::max_element(Ts.begin(), Ts.end());
   result.summary.lhs = result.window_factor;
   result.summary.rhs = 2.0;
   result.summary.margin = result.summary.rhs - result.summary.lhs;
   result.summary.pass = result.window_factor < 2.0;
   result.summary.context = basectx.str() + ";kind=window_stability";
   return result;
}

struct SharpnessFit
{
   double slope = 0.0;
   double intercept = 0.0;
   CheckResult row;
};

/// Self-similar tail fit: pooling (x, y) = ((r/t^{1/p})^{p/(p-1)},
/// -log(u t^{n/p})) over a time window must recover the self-similar rate
/// zeta_B(p) within 5%.
inline SharpnessFit sharpness_fit(const Trace &trace, const RadialGrid &grid, int n,
                                  double t_lo, double t_hi, double u_floor_rel = 1e-12)
{
   const double p = trace.p;
   double u_max = 0.0;
   for (const Field &f : trace.snapshots)
   {
      if (f.t < t_lo || f.t > t_hi) { continue; }
      for (double v : f.values) { u_max = std::max(u_max, v); }
   }
   const double floor = u_floor_rel * u_max;

   std::vector<double> xs;
   std::vector<double> ys;
   for (const Field &f : trace.snapshots)
   {
      if (f.t < t_lo || f.t > t_hi) { continue; }
      const double tp = std::pow(f.t, 1.0 / p);
      const double tnp = std::pow(f.t, static_cast<double>(n) / p);
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         const double v = f.values[i];
         if (!(v > floor)) { continue; }
         xs.push_back(std::pow(grid.center_r[i] / tp, p / (p - 1.0)));
         ys.push_back(-std::log(v * tnp));
      }
   }
   if (xs.size() < 16)
   {
      throw std::runtime_error("sharpness_fit: insufficient data (need 16 points above floor)");
   }
   const LinearFit fit = linear_fit(xs, ys);
   const double zeta = zeta_barenblatt(p);

   SharpnessFit result;
   result.slope = fit.slope;
   result.intercept = fit.intercept;
   result.row.check = "sharpness_fit";
   result.row.t = t_hi;
   result.row.lhs = std::fabs(fit.slope - zeta);
   result.row.rhs = 0.05 * zeta;
   result.row.margin = result.row.rhs - result.row.lhs;
   result.row.pass = result.row.lhs <= result.row.rhs;
   std::ostringstream ctx;
   ctx << "p=" << p << ";n=" << n << ";slope=" << fit.slope << ";zeta=" << zeta
       << ";points=" << xs.size();
   result.row.context = ctx.str();
   return result;
}

struct MeanValueResult
{
   double ratio = 0.0;
   CheckResult row;
};

/// Scale-invariant mean value quotient over the cylinder [t_base, t_base+T]:
///   ratio = sup over the shrunken late cylinder * (T mu(B))^{1/lambda}
///           / L^lambda norm over the full-domain cylinder,
/// with B = B(x, T^{1/p}) and the shrunken cylinder (1/2)B x
/// [t_base + (1 - 2^{-p}) T, t_base + T].  Time integration is trapezoidal
/// over the snapshots, with interpolated values at the window endpoints.
inline MeanValueResult check_mean_value_scaleinv(const Trace &trace, const RadialGrid &grid,
                                                 const ModelManifold &m, double lambda,
                                                 double center_radius, double T, double t_base)
{
   if (!(lambda > 0.0))
   {
      throw std::invalid_argument("check_mean_value_scaleinv: lambda must be > 0");
   }
   if (!(T > 0.0)) { throw std::invalid_argument("check_mean_value_scaleinv: T must be > 0"); }
   const double p = trace.p;
   const double t_end = t_base + T;
   const double radius = std::pow(T, 1.0 / p);

   if (!(trace.snapshots.front().t <= t_base) || !(trace.snapshots.back().t >= t_end))
   {
      throw std::runtime_error("check_mean_value_scaleinv: insufficient data "
                               "(trace does not cover the time window)");
   }

   // lambda-mass of the whole domain as a function of time, sampled at the
   // snapshots and interpolated linearly at the window endpoints.
   std::vector<double> ts;
   std::vector<double> fs;
   std::size_t inside = 0;
   const auto mass_at = [&](const Field &f)
   { return weighted_lp(f, grid, m, lambda, grid.r_inner, grid.r_outer); };
   const auto interp_mass = [&](double t)
   {
      for (std::size_t k = 0; k + 1 < trace.snapshots.size(); ++k)
      {
         const Field &a = trace.snapshots[k];
         const Field &b = trace.snapshots[k + 1];
         if (a.t <= t && t <= b.t)
         {
            const double theta = (t - a.t) / (b.t - a.t);
            return (1.0 - theta) * mass_at(a) + theta * mass_at(b);
         }
      }
      throw std::logic_error("check_mean_value_scaleinv: interpolation out of range");
   };
   ts.push_back(t_base);
   fs.push_back(interp_mass(t_base));
   for (const Field &f : trace.snapshots)
   {
      if (f.t > t_base && f.t < t_end)
      {
         ts.push_back(f.t);
         fs.push_back(mass_at(f));
         ++inside;
      }
   }
   ts.push_back(t_end);
   fs.push_back(interp_mass(t_end));
   if (inside + 2 < 5)
   {
      throw std::runtime_error("check_mean_value_scaleinv: insufficient data "
                               "(need 5 samples in the window)");
   }
   double integral = 0.0;
   for (std::size_t k = 0; k + 1 < ts.size(); ++k)
   {
      integral += 0.5 * (fs[k] + fs[k + 1]) * (ts[k + 1] - ts[k]);
   }
   const double denom = std::pow(integral, 1.0 / lambda);

   // Sup over the shrunken late cylinder.
   const double t_prime = t_base + (1.0 - std::pow(2.0, -p)) * T;
   const auto interp_field = [&](double t)
   {
      for (std::size_t k = 0; k + 1 < trace.snapshots.size(); ++k)
      {
         const Field &a = trace.snapshots[k];
         const Field &b = trace.snapshots[k + 1];
         if (a.t <= t && t <= b.t)
         {
            Field out;
            out.t = t;
            out.values.resize(grid.cells);
            const double theta = (t - a.t) / (b.t - a.t);
            for (std::size_t i = 0; i < grid.cells; ++i)
            {
               out.values[i] = (1.0 - theta) * a.values[i] + theta * b.values[i];
            }
            return out;
         }
      }
      throw std::logic_error("check_mean_value_scaleinv: interpolation out of range");
   };
   double sup = 0.0;
   {
      const Field at_start = interp_field(t_prime);
      sup = sup_over_ball(at_start, grid, center_radius, 0.5 * radius);
      const Field at_end = interp_field(t_end);
      sup = std::max(sup, sup_over_ball(at_end, grid, center_radius, 0.5 * radius));
      for (const Field &f : trace.snapshots)
      {
         if (f.t > t_prime && f.t < t_end)
         {
            sup = std::max(sup, sup_over_ball(f, grid, center_radius, 0.5 * radius));
         }
      }
   }

   double mu_ball;
   if (center_radius <= 0.0) { mu_ball = ball_volume_at_pole(m, radius); }
   else { mu_ball = off_pole_ball_volume_euclidean(m, center_radius, radius); }

   MeanValueResult result;
   result.ratio = sup * std::pow(T * mu_ball, 1.0 / lambda) / denom;
   result.row.check = "mean_value_scaleinv";
   result.row.t = t_end;
   result.row.lhs = result.ratio;
   result.row.rhs = result.ratio;
   result.row.margin = 0.0;
   result.row.pass = std::isfinite(result.ratio) && result.ratio > 0.0;
   std::ostringstream ctx;
   ctx << detail::context_prefix(p, m.n, lambda) << ";x=" << center_radius << ";T=" << T
       << ";t_base=" << t_base << ";muB=" << mu_ball;
   result.row.context = ctx.str();
   return result;
}

} // namespace trudinger
