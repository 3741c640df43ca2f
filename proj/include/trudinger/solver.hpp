#pragma once

// Conservative explicit finite-volume integrator for the radial flow
//
//    du/dt = (1/S) d/dr ( S |d_r w|^{p-2} d_r w ),   w = u^{1/(p-1)},
//
// on a truncated radial domain [r_inner, r_outer] with zero-flux boundary
// faces.  The scheme is deliberately plain: uniform faces, arithmetic face
// means, explicit time stepping with an adaptive stability rule.  Mass
// conservation is exact up to roundoff because cell updates telescope.
//
// Degeneracy handling:
//   * p > 2: u^{q-1} (q = 1/(p-1)) blows up as u -> 0.  A floor delta is
//     applied inside the diffusivity used by the time-step rule only; the
//     flux itself is well defined because |g|^{p-2} vanishes faster.
//   * p < 2: |g|^{p-2} blows up as g -> 0, which would collapse the time
//     step on flat regions.  The gradient entering the *rule* is floored at
//     a scale-free value max(u_face, delta)^q / (r_outer - r_inner), which
//     caps the diffusivity at (p-1) q L^{2-p}.  In addition, a transfer
//     limiter bounds dt so no face moves more than half the mass that would
//     equalize its two adjacent cells; this provably preserves the radial
//     ordering of cell values.  Both devices only ever shrink dt -- the flux
//     formula is never modified.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trudinger/exact.hpp"
#include "trudinger/geometry.hpp"

namespace trudinger
{

enum class BoundaryRule { ZeroFluxBoth };

/// Parameters of the explicit integrator.
struct SolverConfig
{
   double p = 2.0;                  // exponent of the flux nonlinearity, > 1
   double cfl = 0.4;                // safety factor in (0, 1]
   double floor_delta = 1e-14;      // floor used inside the dt rule only
   BoundaryRule boundary = BoundaryRule::ZeroFluxBoth;
   std::uint64_t max_steps = 200000000;

   void validate() const
   {
      if (!(p > 1.0)) { throw std::invalid_argument("SolverConfig: p must be > 1"); }
      if (!(cfl > 0.0) || !(cfl <= 1.0))
      {
         throw std::invalid_argument("SolverConfig: cfl must lie in (0, 1]");
      }
      if (!(floor_delta >= 0.0))
      {
         throw std::invalid_argument("SolverConfig: floor_delta must be >= 0");
      }
      if (max_steps == 0) { throw std::invalid_argument("SolverConfig: max_steps must be > 0"); }
   }
};

/// Thrown by step() when the integration cannot continue (non-finite state,
/// a negative value beyond tolerance, or a collapsed time step).
class SolverAbort : public std::runtime_error
{
public:
   explicit SolverAbort(const std::string &what_arg) : std::runtime_error(what_arg) {}
};

/// Uniform radial mesh over [r_inner, r_outer] with exact cell measures
/// m_i = omega_{n-1} * integral of S over the cell.  Face areas are cached;
/// the two boundary faces carry area 0 because they never transport flux.
struct RadialGrid
{
   double r_inner = 0.0;
   double r_outer = 0.0;
   std::size_t cells = 0;
   double dr = 0.0;
   std::vector<double> face_r;    // cells + 1 positions, strictly increasing
   std::vector<double> center_r;  // cells midpoints
   std::vector<double> measure;   // cells measures m_i > 0
   std::vector<double> face_area; // cells + 1; zero at both boundary faces
   double total_measure = 0.0;

   RadialGrid(const ModelManifold &m, double outer, std::size_t cell_count)
   {
      if (cell_count < 16)
      {
         throw std::invalid_argument("RadialGrid: need at least 16 cells");
      }
      r_inner = m.inner_radius();
      if (!(outer > r_inner) || !std::isfinite(outer))
      {
         throw std::invalid_argument("RadialGrid: r_outer must exceed the inner radius");
      }
      r_outer = outer;
      cells = cell_count;
      dr = (r_outer - r_inner) / static_cast<double>(cells);

      face_r.resize(cells + 1);
      for (std::size_t j = 0; j <= cells; ++j)
      {
         face_r[j] = r_inner + static_cast<double>(j) * dr;
      }
      face_r[cells] = r_outer; // pin the last face exactly

      center_r.resize(cells);
      measure.resize(cells);
      for (std::size_t i = 0; i < cells; ++i)
      {
         center_r[i] = 0.5 * (face_r[i] + face_r[i + 1]);
         measure[i] = shell_volume(m, face_r[i], face_r[i + 1]);
         if (!(measure[i] > 0.0))
         {
            throw std::logic_error("RadialGrid: non-positive cell measure");
         }
         total_measure += measure[i];
      }

      face_area.assign(cells + 1, 0.0);
      const double omega = unit_sphere_area(m.n);
      for (std::size_t j = 1; j < cells; ++j)
      {
         face_area[j] = omega * area_factor(m, face_r[j]);
      }

      const double expected = shell_volume(m, r_inner, r_outer);
      if (!(std::fabs(total_measure - expected) <= 1e-10 * expected))
      {
         throw std::logic_error("RadialGrid: cell measures do not sum to the shell volume");
      }
   }
};

/// One radial profile at a fixed time.
struct Field
{
   std::vector<double> values;
   double t = 0.0;
};

/// Per-step diagnostics reported by step().
struct StepInfo
{
   double dt = 0.0;
   std::uint64_t clipped = 0;      // values raised from [-1e-12, 0) to 0
   double min_before_clip = std::numeric_limits<double>::infinity();
};

/// Snapshot sequence plus run metadata.  The first snapshot is the initial
/// profile; requested snapshot times follow in strictly increasing order.
struct Trace
{
   std::vector<Field> snapshots;
   double p = 0.0;
   double cfl = 0.0;
   std::uint64_t steps = 0;
   double dt_min = std::numeric_limits<double>::infinity();
   double dt_max = 0.0;
   double min_u_seen = std::numeric_limits<double>::infinity();
   std::uint64_t clip_count = 0;
   bool aborted = false;
   std::string abort_reason;
};

namespace detail
{

// Kernel modes.  The common exponents get sqrt-based fast paths because
// std::pow dominates the runtime otherwise; mode 0 is the generic fallback.
enum : int { KernelGeneral = 0, KernelP15 = 1, KernelP2 = 2, KernelP3 = 3 };

template <int Mode>
inline Field step_kernel(const Field &field, const RadialGrid &grid,
                         const SolverConfig &cfg, StepInfo *info)
{
   const std::size_t n = grid.cells;
   const double p = cfg.p;
   const double q = 1.0 / (p - 1.0);
   const double delta = cfg.floor_delta;
   const double dr = grid.dr;
   const double domain_len = grid.r_outer - grid.r_inner;
   const std::vector<double> &u = field.values;

   std::vector<double> w(n);
   for (std::size_t i = 0; i < n; ++i)
   {
      if (Mode == KernelP15) { w[i] = u[i] * u[i]; }
      else if (Mode == KernelP2) { w[i] = u[i]; }
      else if (Mode == KernelP3) { w[i] = std::sqrt(u[i]); }
      else { w[i] = std::pow(u[i], q); }
   }

   // Face sweep: flux plus the two dt bounds (diffusive and, for p < 2, the
   // half-equalization transfer limiter).
   std::vector<double> flux(n + 1, 0.0);
   double dt_diffusive = std::numeric_limits<double>::infinity();
   double dt_transfer = std::numeric_limits<double>::infinity();
   for (std::size_t j = 1; j < n; ++j)
   {
      const double g = (w[j] - w[j - 1]) / dr;
      const double ag = std::fabs(g);
      const double uf = std::max(0.5 * (u[j - 1] + u[j]), delta);

      double phi;   // |g|^{p-2} g
      double diff;  // diffusivity entering the dt rule
      if (Mode == KernelP15)
      {
         phi = (g >= 0.0 ? 1.0 : -1.0) * std::sqrt(ag);
         const double geff = std::max(ag, uf * uf / domain_len);
         diff = uf / std::sqrt(geff);
      }
      else if (Mode == KernelP2)
      {
         phi = g;
         diff = 1.0;
      }
      else if (Mode == KernelP3)
      {
         phi = ag * g;
         diff = ag / std::sqrt(uf);
      }
      else if (p >= 2.0)
      {
         phi = (ag > 0.0) ? std::pow(ag, p - 2.0) * g : 0.0;
         diff = (p - 1.0) * q * ((ag > 0.0) ? std::pow(ag, p - 2.0) : (p > 2.0 ? 0.0 : 1.0))
                * std::pow(uf, q - 1.0);
      }
      else
      {
         phi = (ag > 0.0) ? std::pow(ag, p - 2.0) * g : 0.0;
         const double geff = std::max(ag, std::pow(uf, q) / domain_len);
         diff = (p - 1.0) * q * std::pow(geff, p - 2.0) * std::pow(uf, q - 1.0);
      }

      const double f = grid.face_area[j] * phi;
      flux[j] = f;

      diff = std::max(diff, delta);
      dt_diffusive = std::min(dt_diffusive, dr * dr / (2.0 * diff));

      if ((Mode == KernelP15 || (Mode == KernelGeneral && p < 2.0)) && f != 0.0)
      {
         const double gap = std::fabs(u[j - 1] - u[j]);
         if (gap > 0.0)
         {
            const double m_eq = gap * grid.measure[j - 1] * grid.measure[j]
                                / (grid.measure[j - 1] + grid.measure[j]);
            dt_transfer = std::min(dt_transfer, 0.5 * m_eq / std::fabs(f));
         }
      }
   }

   double dt = std::min(cfg.cfl * dt_diffusive, dt_transfer);
   if (!std::isfinite(dt) || !(dt > 0.0) || field.t + dt == field.t)
   {
      std::ostringstream msg;
      msg << "time step collapsed at t=" << field.t << " (dt=" << dt << ")";
      throw SolverAbort(msg.str());
   }

   Field next;
   next.t = field.t + dt;
   next.values.resize(n);
   std::uint64_t clipped = 0;
   double min_before = std::numeric_limits<double>::infinity();
   for (std::size_t i = 0; i < n; ++i)
   {
      double v = u[i] + (dt / grid.measure[i]) * (flux[i + 1] - flux[i]);
      if (std::isnan(v))
      {
         std::ostringstream msg;
         msg << "non-finite value in cell " << i << " at t=" << next.t;
         throw SolverAbort(msg.str());
      }
      min_before = std::min(min_before, v);
      if (v < 0.0)
      {
         if (v < -1e-12)
         {
            std::ostringstream msg;
            msg << "negative value " << v << " in cell " << i << " at t=" << next.t;
            throw SolverAbort(msg.str());
         }
         v = 0.0;
         ++clipped;
      }
      next.values[i] = v;
   }

   if (info != nullptr)
   {
      info->dt = dt;
      info->clipped = clipped;
      info->min_before_clip = min_before;
   }
   return next;
}

} // namespace detail

/// Advance one explicit step.  The time increment is chosen by the stability
/// rule dt = cfl * min_faces dr^2 / (2 D) with the face diffusivity
/// D = (p-1) |g|^{p-2} q max(u_face, delta)^{q-1}, tightened for p < 2 by
/// the transfer limiter described at the top of this header.
inline Field step(const Field &field, const RadialGrid &grid, const SolverConfig &cfg,
                  StepInfo *info = nullptr)
{
   cfg.validate();
   if (field.values.size() != grid.cells)
   {
      throw std::invalid_argument("step: field size does not match the grid");
   }
   for (double v : field.values)
   {
      if (!std::isfinite(v) || v < 0.0)
      {
         throw std::invalid_argument("step: field must be finite and nonnegative");
      }
   }
   if (cfg.p == 1.5) { return detail::step_kernel<detail::KernelP15>(field, grid, cfg, info); }
   if (cfg.p == 2.0) { return detail::step_kernel<detail::KernelP2>(field, grid, cfg, info); }
   if (cfg.p == 3.0) { return detail::step_kernel<detail::KernelP3>(field, grid, cfg, info); }
   return detail::step_kernel<detail::KernelGeneral>(field, grid, cfg, info);
}

/// Integrate from u0 to t_end, recording linearly-interpolated snapshots at
/// the requested times (all strictly inside (u0.t, t_end]).  The returned
/// trace starts with the initial profile.  Hitting max_steps, or an abort
/// inside step(), terminates early with the partial trace and a reason.
inline Trace run(const Field &u0, double t_end, const std::vector<double> &snapshot_times,
                 const RadialGrid &grid, const SolverConfig &cfg)
{
   cfg.validate();
   if (u0.values.size() != grid.cells)
   {
      throw std::invalid_argument("run: initial field size does not match the grid");
   }
   if (!(t_end > u0.t)) { throw std::invalid_argument("run: t_end must exceed the initial time"); }
   for (std::size_t k = 0; k < snapshot_times.size(); ++k)
   {
      const double ts = snapshot_times[k];
      if (!(ts > u0.t) || !(ts <= t_end))
      {
         throw std::invalid_argument("run: snapshot times must lie in (t0, t_end]");
      }
      if (k > 0 && !(ts > snapshot_times[k - 1]))
      {
         throw std::invalid_argument("run: snapshot times must be strictly increasing");
      }
   }

   Trace trace;
   trace.p = cfg.p;
   trace.cfl = cfg.cfl;
   trace.snapshots.push_back(u0);

   Field cur = u0;
   std::size_t next_snap = 0;
   while (cur.t < t_end)
   {
      if (trace.steps >= cfg.max_steps)
      {
         std::ostringstream msg;
         msg << "max_steps (" << cfg.max_steps << ") exceeded at t=" << cur.t;
         trace.aborted = true;
         trace.abort_reason = msg.str();
         return trace;
      }

      Field next;
      StepInfo si;
      try
      {
         next = step(cur, grid, cfg, &si);
      }
      catch (const SolverAbort &e)
      {
         trace.aborted = true;
         trace.abort_reason = e.what();
         return trace;
      }
      ++trace.steps;
      trace.dt_min = std::min(trace.dt_min, si.dt);
      trace.dt_max = std::max(trace.dt_max, si.dt);
      trace.clip_count += si.clipped;
      trace.min_u_seen = std::min(trace.min_u_seen, si.min_before_clip);

      while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= next.t)
      {
         const double ts = snapshot_times[next_snap];
         const double theta = (ts - cur.t) / (next.t - cur.t);
         Field snap;
         snap.t = ts;
         snap.values.resize(grid.cells);
         for (std::size_t i = 0; i < grid.cells; ++i)
         {
            snap.values[i] = cur.values[i] + theta * (next.values[i] - cur.values[i]);
         }
         trace.snapshots.push_back(std::move(snap));
         ++next_snap;
      }

      cur = std::move(next);
   }
   return trace;
}

/// One row of a space-refinement study against the exact self-similar
/// solution: errors at the final time, observed orders between consecutive
/// rows, relative mass drift, and the most negative value seen pre-clip.
struct ConvergenceRow
{
   std::size_t cells = 0;
   double err_linf = 0.0;
   double err_l1 = 0.0;
   double order_linf = std::numeric_limits<double>::quiet_NaN();
   double order_l1 = std::numeric_limits<double>::quiet_NaN();
   double mass_drift_rel = 0.0;
   double min_u = 0.0;
};

/// Initialize with the exact profile at t0 on successively finer grids,
/// integrate to t1, and compare against the exact profile at t1.  The outer
/// radius is chosen so the exact tail at t1 is below 1e-12 of the peak.
inline std::vector<ConvergenceRow> convergence_study(double p, int n,
                                                     const std::vector<std::size_t> &grid_sizes,
                                                     double t0, double t1, double cfl = 0.4)
{
   if (grid_sizes.empty())
   {
      throw std::invalid_argument("convergence_study: need at least one grid size");
   }
   if (!(t0 > 0.0) || !(t1 > t0))
   {
      throw std::invalid_argument("convergence_study: need 0 < t0 < t1");
   }
   const ExactSolution exact = ExactSolution::barenblatt(p, n);
   const ModelManifold manifold = ModelManifold::euclidean(n);

   // exp(-zeta s^{p/(p-1)}) < 1e-12  <=>  s > (ln(1e12)/zeta)^{(p-1)/p}
   const double s_tail = std::pow(std::log(1e12) / exact.zeta, (p - 1.0) / p);
   const double r_outer = std::pow(t1, 1.0 / p) * s_tail;

   std::vector<ConvergenceRow> rows;
   for (std::size_t gi = 0; gi < grid_sizes.size(); ++gi)
   {
      const RadialGrid grid(manifold, r_outer, grid_sizes[gi]);
      Field u0;
      u0.t = t0;
      u0.values.resize(grid.cells);
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         u0.values[i] = exact.evaluate(grid.center_r[i], t0);
      }

      SolverConfig cfg;
      cfg.p = p;
      cfg.cfl = cfl;
      const Trace trace = run(u0, t1, {t1}, grid, cfg);
      if (trace.aborted)
      {
         throw std::runtime_error("convergence_study: run aborted: " + trace.abort_reason);
      }
      const Field &final_field = trace.snapshots.back();

      ConvergenceRow row;
      row.cells = grid.cells;
      double mass0 = 0.0;
      double mass1 = 0.0;
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         const double e = std::fabs(final_field.values[i] - exact.evaluate(grid.center_r[i], t1));
         row.err_linf = std::max(row.err_linf, e);
         row.err_l1 += grid.measure[i] * e;
         mass0 += grid.measure[i] * u0.values[i];
         mass1 += grid.measure[i] * final_field.values[i];
      }
      row.mass_drift_rel = std::fabs(mass1 - mass0) / mass0;
      row.min_u = std::isfinite(trace.min_u_seen) ? trace.min_u_seen : 0.0;
      if (gi > 0)
      {
         row.order_linf = std::log2(rows.back().err_linf / row.err_linf);
         row.order_l1 = std::log2(rows.back().err_l1 / row.err_l1);
      }
      rows.push_back(row);
   }
   return rows;
}

} // namespace trudinger
