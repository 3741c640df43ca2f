// Rotationally symmetric model geometries.
//
// A model manifold of dimension n is (0, inf) x S^{n-1} with metric
// dr^2 + psi^2(r) dtheta^2.  Everything the rest of the library needs is
// captured by the profile S(r) = psi^{n-1}(r): the Riemannian measure of a
// radial set is  omega_{n-1} * integral S(r) dr,  where omega_{n-1} is the
// area of the unit sphere S^{n-1}.
//
// Three profiles are supported:
//   Euclidean             S(r) = r^{n-1}
//   Polynomial            S(r) = C * r^{alpha-1}   on r > r0, 0 < alpha <= n
//   Custom                S tabulated on a grid, linearly interpolated
//
// Euclidean space is the Polynomial profile with C = 1, alpha = n, r0 = 0.
// All values are immutable after construction and safe to share across
// threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trudinger {

// Area of the unit sphere S^{n-1} in R^n: omega_{n-1} = 2 pi^{n/2} / Gamma(n/2).
// omega_0 = 2 (two points), omega_1 = 2 pi, omega_2 = 4 pi.
inline double unit_sphere_area(int n)
{
   if (n < 1) { throw std::invalid_argument("unit_sphere_area: n must be >= 1"); }
   const double pi = 3.14159265358979323846;
   return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

enum class ProfileKind { Euclidean, Polynomial, Custom };

struct ModelManifold
{
   int n = 1;                       // dimension, >= 1
   ProfileKind kind = ProfileKind::Euclidean;
   double C = 1.0;                  // Polynomial: S(r) = C * r^{alpha-1}
   double alpha = 1.0;              // Polynomial exponent, 0 < alpha <= n
   double r0 = 0.0;                 // Polynomial inner radius, >= 0
   std::vector<double> grid_r;      // Custom: strictly increasing nodes
   std::vector<double> grid_S;      // Custom: S > 0 at the nodes

   static ModelManifold euclidean(int n)
   {
      if (n < 1) { throw std::invalid_argument("euclidean: n must be >= 1"); }
      ModelManifold m;
      m.n = n;
      m.kind = ProfileKind::Euclidean;
      m.C = 1.0;
      m.alpha = static_cast<double>(n);
      m.r0 = 0.0;
      return m;
   }

   static ModelManifold polynomial(int n, double C, double alpha, double r0 = 0.0)
   {
      if (n < 1) { throw std::invalid_argument("polynomial: n must be >= 1"); }
      if (C <= 0.0) { throw std::invalid_argument("polynomial: C must be > 0"); }
      if (alpha <= 0.0 || alpha > static_cast<double>(n))
      {
         throw std::invalid_argument("polynomial: alpha must lie in (0, n]");
      }
      if (r0 < 0.0) { throw std::invalid_argument("polynomial: r0 must be >= 0"); }
      ModelManifold m;
      m.n = n;
      m.kind = ProfileKind::Polynomial;
      m.C = C;
      m.alpha = alpha;
      m.r0 = r0;
      return m;
   }

   static ModelManifold custom(int n, std::vector<double> r, std::vector<double> S)
   {
      if (n < 1) { throw std::invalid_argument("custom: n must be >= 1"); }
      if (r.size() < 2 || r.size() != S.size())
      {
         throw std::invalid_argument("custom: need >= 2 nodes and matching S values");
      }
      for (std::size_t i = 0; i + 1 < r.size(); i++)
      {
         if (!(r[i] < r[i + 1]))
         {
            throw std::invalid_argument("custom: nodes must be strictly increasing");
         }
      }
      for (double s : S)
      {
         if (!(s > 0.0) || !std::isfinite(s))
         {
            throw std::invalid_argument("custom: S must be positive and finite");
         }
      }
      ModelManifold m;
      m.n = n;
      m.kind = ProfileKind::Custom;
      m.r0 = r.front();
      m.grid_r = std::move(r);
      m.grid_S = std::move(S);
      return m;
   }

   // Inner boundary of the radial domain (0 for Euclidean, r0 for Polynomial,
   // first node for Custom).
   double inner_radius() const
   {
      switch (kind)
      {
         case ProfileKind::Euclidean:  return 0.0;
         case ProfileKind::Polynomial: return r0;
         case ProfileKind::Custom:     return grid_r.front();
      }
      return 0.0;
   }
};

// Profile value S(r).
inline double area_factor(const ModelManifold &m, double r)
{
   switch (m.kind)
   {
      case ProfileKind::Euclidean:
         if (!(r > 0.0)) { throw std::domain_error("area_factor: r must be > 0"); }
         return std::pow(r, m.n - 1);
      case ProfileKind::Polynomial:
         if (!(r > m.r0))
         {
            throw std::domain_error("area_factor: r must be > r0 for polynomial profiles");
         }
         return m.C * std::pow(r, m.alpha - 1.0);
      case ProfileKind::Custom:
      {
         if (!(r >= m.grid_r.front()) || !(r <= m.grid_r.back()))
         {
            throw std::domain_error("area_factor: r outside the tabulated range");
         }
         const auto it = std::upper_bound(m.grid_r.begin(), m.grid_r.end(), r);
         std::size_t hi = static_cast<std::size_t>(it - m.grid_r.begin());
         if (hi == 0) { hi = 1; }
         if (hi == m.grid_r.size()) { hi = m.grid_r.size() - 1; }
         const std::size_t lo = hi - 1;
         const double w = (r - m.grid_r[lo]) / (m.grid_r[hi] - m.grid_r[lo]);
         return (1.0 - w) * m.grid_S[lo] + w * m.grid_S[hi];
      }
   }
   throw std::logic_error("area_factor: unreachable");
}

namespace detail {

// integral of S over [a, b] without the omega factor.  Exact closed forms
// for Euclidean/Polynomial; for Custom, the exact integral of the linear
// interpolant (trapezoid on full segments, exact partial segments).
inline double profile_integral(const ModelManifold &m, double a, double b)
{
   if (!(b >= a)) { throw std::invalid_argument("profile_integral: need b >= a"); }
   switch (m.kind)
   {
      case ProfileKind::Euclidean:
      {
         const double nn = static_cast<double>(m.n);
         return (std::pow(b, nn) - std::pow(a, nn)) / nn;
      }
      case ProfileKind::Polynomial:
      {
         const double lo = std::max(a, m.r0);
         if (b <= lo) { return 0.0; }
         return m.C * (std::pow(b, m.alpha) - std::pow(lo, m.alpha)) / m.alpha;
      }
      case ProfileKind::Custom:
      {
         const double lo = std::max(a, m.grid_r.front());
         const double hi = std::min(b, m.grid_r.back());
         if (hi <= lo) { return 0.0; }
         double sum = 0.0;
         for (std::size_t i = 0; i + 1 < m.grid_r.size(); i++)
         {
            const double sl = std::max(lo, m.grid_r[i]);
            const double sh = std::min(hi, m.grid_r[i + 1]);
            if (sh <= sl) { continue; }
            // mean of the (linear) integrand at the sub-segment endpoints
            const double seg = m.grid_r[i + 1] - m.grid_r[i];
            auto S_at = [&](double r)
            {
               const double w = (r - m.grid_r[i]) / seg;
               return (1.0 - w) * m.grid_S[i] + w * m.grid_S[i + 1];
            };
            sum += 0.5 * (S_at(sl) + S_at(sh)) * (sh - sl);
         }
         return sum;
      }
   }
   throw std::logic_error("profile_integral: unreachable");
}

} // namespace detail

// Measure of the radial shell {a <= r_x < b}: omega_{n-1} * integral_a^b S.
inline double shell_volume(const ModelManifold &m, double a, double b)
{
   return unit_sphere_area(m.n) * detail::profile_integral(m, a, b);
}

// mu(B(o, r)): measure of the pole-centered ball of radius r.
inline double ball_volume_at_pole(const ModelManifold &m, double r)
{
   if (!(r > 0.0)) { throw std::domain_error("ball_volume_at_pole: r must be > 0"); }
   return shell_volume(m, m.inner_radius(), r);
}

// Volume of a ball of radius r centered at distance center_radius from the
// pole.  Only Euclidean space has translation-invariant ball volumes, so the
// profile must be Euclidean; then the volume is omega_{n-1} r^n / n
// independently of the center.
inline double off_pole_ball_volume_euclidean(const ModelManifold &m,
                                             double center_radius, double r)
{
   if (m.kind != ProfileKind::Euclidean)
   {
      throw std::runtime_error(
         "off_pole_ball_volume_euclidean: only supported on the Euclidean profile");
   }
   if (!(r > 0.0))
   {
      throw std::domain_error("off_pole_ball_volume_euclidean: r must be > 0");
   }
   (void)center_radius; // translation invariance
   const double nn = static_cast<double>(m.n);
   return unit_sphere_area(m.n) * std::pow(r, nn) / nn;
}

// mu(B(o, r_big)) / mu(B(o, r_small)) for pole-centered balls.  Callers
// compare against C * (r_big/r_small)^alpha; for Polynomial profiles with
// r0 = 0 the ratio equals (r_big/r_small)^alpha exactly.
inline double doubling_ratio(const ModelManifold &m, double r_small, double r_big)
{
   if (!(r_small > 0.0) || !(r_big >= r_small))
   {
      throw std::invalid_argument("doubling_ratio: need 0 < r_small <= r_big");
   }
   return ball_volume_at_pole(m, r_big) / ball_volume_at_pole(m, r_small);
}

// Radial region bookkeeping: A = B(o, a) together with the width rho of its
// neighborhood A_rho = {d(x, A) < rho} = B(o, a + rho).  The complement
// A_rho^c is {r_x >= a + rho}.
struct Region
{
   double a = 1.0;    // radius of the centered ball A
   double rho = 0.0;  // neighborhood width, >= 0

   Region() = default;
   Region(double a_, double rho_) : a(a_), rho(rho_)
   {
      if (!(a > 0.0)) { throw std::invalid_argument("Region: a must be > 0"); }
      if (!(rho >= 0.0)) { throw std::invalid_argument("Region: rho must be >= 0"); }
   }

   double outer_radius() const { return a + rho; }

   // d(x, A_rho^c) for a point at radius r_x: distance to {r_y >= a + rho}.
   double dist_to_complement(double r_x) const
   {
      return std::max(0.0, a + rho - r_x);
   }
};

} // namespace trudinger
