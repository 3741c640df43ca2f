// Adaptive Simpson quadrature for smooth radial integrands.  Used to
// evaluate reference integrals of exact solutions to high relative accuracy
// (the grid-based integrals in the solver/verify modules use exact cell
// measures instead and do not come through here).

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace trudinger {
namespace detail {

template <class F>
double adaptive_simpson_rec(const F &f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth)
{
   const double m = 0.5 * (a + b);
   const double lm = 0.5 * (a + m);
   const double rm = 0.5 * (m + b);
   const double flm = f(lm);
   const double frm = f(rm);
   const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
   const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
   const double delta = left + right - whole;
   if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
   {
      return left + right + delta / 15.0;
   }
   return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
          + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// integral_a^b f, with mixed absolute/relative tolerance.  The interval is
// pre-split into `panels` chunks so narrow features are not missed by the
// first Simpson estimate.
template <class F>
double integrate_adaptive(const F &f, double a, double b, double rel_tol = 1e-10,
                          int panels = 16)
{
   if (!(b >= a)) { throw std::invalid_argument("integrate_adaptive: need b >= a"); }
   if (a == b) { return 0.0; }
   double coarse = 0.0;
   const double h = (b - a) / panels;
   for (int i = 0; i < panels; i++)
   {
      coarse += std::abs(f(a + (i + 0.5) * h)) * h;
   }
   const double tol = rel_tol * std::max(coarse, 1e-300);
   double total = 0.0;
   for (int i = 0; i < panels; i++)
   {
      const double x0 = a + i * h;
      const double x1 = a + (i + 1) * h;
      const double fa = f(x0);
      const double fb = f(x1);
      const double fm = f(0.5 * (x0 + x1));
      const double whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
      total += detail::adaptive_simpson_rec(f, x0, x1, fa, fm, fb, whole,
                                            tol / panels, 48);
   }
   return total;
}

} // namespace trudinger
