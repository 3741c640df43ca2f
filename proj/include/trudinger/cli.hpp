#pragma once

// Subcommand implementations behind the `trudinger` executable.
//
// Commands take argument vectors and output streams instead of touching
// argc/argv and std::cout directly, so the test suite can drive them
// in-process and inspect both exit codes and emitted text. Everything here
// is deterministic: identical inputs produce byte-identical output files.
//
// Exit code contract:
//   0  command succeeded, all enabled checks passed
//   1  command ran but a check (or convergence threshold) failed
//   2  invalid configuration or flags
//   3  operational failure (solver abort, unwritable output, ...)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trudinger/config.hpp"
#include "trudinger/constants.hpp"
#include "trudinger/exact.hpp"
#include "trudinger/geometry.hpp"
#include "trudinger/solver.hpp"
#include "trudinger/verify.hpp"

namespace trudinger
{
namespace cli
{

// ---------------------------------------------------------------------------
// formatting & file plumbing
// ---------------------------------------------------------------------------

/// Shortest round-trippable decimal form (17 significant digits).
inline std::string g17(double v)
{
   char buf[64];
   std::snprintf(buf, sizeof(buf), "%.17g", v);
   return buf;
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path &dir, const std::string &name,
                              const std::string &content)
{
   std::filesystem::create_directories(dir);
   const std::filesystem::path tmp = dir / (name + ".tmp");
   {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) { throw std::runtime_error("cannot write " + tmp.string()); }
   }
   std::filesystem::rename(tmp, dir / name);
}

// ---------------------------------------------------------------------------
// run pipeline
// ---------------------------------------------------------------------------

inline Field initial_field(const ExperimentConfig &cfg, const RadialGrid &grid)
{
   Field f;
   f.t = cfg.t0;
   f.values.resize(grid.cells, 0.0);
   switch (cfg.initial)
   {
      case InitialKind::Barenblatt:
      {
         const ExactSolution sol = cfg.manifold.kind == ProfileKind::Polynomial
                                       ? ExactSolution::polynomial_model(cfg.p, cfg.manifold.alpha)
                                       : ExactSolution::barenblatt(cfg.p, cfg.n);
         for (std::size_t i = 0; i < grid.cells; ++i)
         {
            f.values[i] = sol.evaluate(grid.center_r[i], cfg.t0);
         }
         break;
      }
      case InitialKind::Bump:
      {
         for (std::size_t i = 0; i < grid.cells; ++i)
         {
            const double s = grid.center_r[i] / cfg.bump_a;
            const double b = std::max(0.0, 1.0 - s * s);
            f.values[i] = std::pow(b, cfg.bump_m);
         }
         break;
      }
      case InitialKind::Csv:
      {
         // Piecewise-linear in r; constant extension beyond the sampled range.
         const auto &tab = cfg.initial_samples;
         for (std::size_t i = 0; i < grid.cells; ++i)
         {
            const double r = grid.center_r[i];
            if (r <= tab.front().first) { f.values[i] = tab.front().second; }
            else if (r >= tab.back().first) { f.values[i] = tab.back().second; }
            else
            {
               auto hi = std::upper_bound(tab.begin(), tab.end(), r,
                                          [](double x, const std::pair<double, double> &row)
                                          { return x < row.first; });
               auto lo = hi - 1;
               const double w = (r - lo->first) / (hi->first - lo->first);
               f.values[i] = lo->second + w * (hi->second - lo->second);
            }
         }
         break;
      }
   }
   return f;
}

/// One configured check: either a batch of result rows or a skip notice.
struct CheckOutcome
{
   std::string name;
   std::vector<CheckResult> rows;
   bool skipped = false;
   std::string skip_reason;
};

namespace detail
{

inline std::string run_context(const ExperimentConfig &cfg, double lambda)
{
   std::ostringstream ctx;
   ctx << "p=" << cfg.p << ";n=" << cfg.manifold.n << ";lambda=" << lambda;
   return ctx.str();
}

inline CheckOutcome check_mass(const ExperimentConfig &cfg, const Trace &trace,
                               const RadialGrid &grid)
{
   CheckOutcome out;
   out.name = "mass";
   const double m0 = weighted_lp(trace.snapshots.front(), grid, cfg.manifold, 1.0, grid.r_inner,
                                 grid.r_outer);
   const double scale = std::max(std::fabs(m0), 1e-300);
   for (const Field &f : trace.snapshots)
   {
      const double mt =
          weighted_lp(f, grid, cfg.manifold, 1.0, grid.r_inner, grid.r_outer);
      CheckResult row;
      row.check = "mass";
      row.t = f.t;
      row.lhs = std::fabs(mt - m0) / scale;
      row.rhs = 1e-10;
      row.margin = row.rhs - row.lhs;
      row.pass = row.lhs <= row.rhs;
      row.context = run_context(cfg, 1.0);
      out.rows.push_back(row);
   }
   return out;
}

inline CheckOutcome check_lambda_monotone(const ExperimentConfig &cfg, const Trace &trace,
                                          const RadialGrid &grid)
{
   CheckOutcome out;
   out.name = "lambda_monotone";
   std::vector<double> lambdas = {1.0, 2.0, cfg.lambda,
                                  std::numeric_limits<double>::infinity()};
   std::sort(lambdas.begin(), lambdas.end());
   lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
   for (double lam : lambdas)
   {
      double prev = norm_lp(trace.snapshots.front(), grid, lam);
      for (std::size_t k = 1; k < trace.snapshots.size(); ++k)
      {
         const double cur = norm_lp(trace.snapshots[k], grid, lam);
         CheckResult row;
         row.check = "lambda_monotone";
         row.t = trace.snapshots[k].t;
         row.lhs = cur;
         row.rhs = prev * (1.0 + 1e-6);
         row.margin = row.rhs - row.lhs;
         row.pass = row.lhs <= row.rhs + 1e-300;
         row.context = run_context(cfg, lam);
         out.rows.push_back(row);
         prev = cur;
      }
   }
   return out;
}

inline CheckOutcome check_envelope(const ExperimentConfig &cfg, const Trace &trace,
                                   const RadialGrid &grid)
{
   CheckOutcome out;
   out.name = "subgaussian_envelope";
   std::vector<double> Ts = cfg.snapshot_times;
   if (Ts.size() < 2)
   {
      out.skipped = true;
      out.skip_reason = "need at least two snapshot times";
      return out;
   }
   const double t_min = *std::min_element(Ts.begin(), Ts.end());
   const double t_max = *std::max_element(Ts.begin(), Ts.end());
   if (!(t_max > 2.0 * t_min))
   {
      out.skipped = true;
      out.skip_reason = "snapshot times span less than one window doubling";
      return out;
   }
   if (cfg.envelope_fk_mode && cfg.manifold.kind != ProfileKind::Euclidean)
   {
      out.skipped = true;
      out.skip_reason = "ball-volume normalizer requires a euclidean manifold";
      return out;
   }
   const Region support = cfg.has_region ? cfg.region() : Region(cfg.bump_a, 0.0);
   std::vector<double> xs(13);
   for (std::size_t i = 0; i < xs.size(); ++i)
   {
      xs[i] = 0.75 * cfg.r_max * static_cast<double>(i) / static_cast<double>(xs.size() - 1);
   }
   const EnvelopeNormalizer mode =
       cfg.envelope_fk_mode ? EnvelopeNormalizer::BallVolume : EnvelopeNormalizer::TPower;
   const EnvelopeResult res = check_subgaussian_envelope(trace, grid, cfg.manifold, support,
                                                         cfg.envelope_c_exp, xs, Ts, mode);
   out.rows = res.rows;
   out.rows.push_back(res.summary);
   return out;
}

} // namespace detail

/// Execute every configured check against the finished trace. Checks that
/// cannot run on this data (too few samples, empty tails) are reported as
/// skipped with the reason rather than silently dropped.
inline std::vector<CheckOutcome> run_checks(const ExperimentConfig &cfg, const Trace &trace,
                                            const RadialGrid &grid)
{
   std::vector<CheckOutcome> outcomes;
   for (const std::string &name : cfg.checks)
   {
      CheckOutcome out;
      out.name = name;
      try
      {
         if (name == "mass") { out = detail::check_mass(cfg, trace, grid); }
         else if (name == "lambda_monotone")
         {
            out = detail::check_lambda_monotone(cfg, trace, grid);
         }
         else if (name == "integral_max_principle")
         {
            const double zeta = zeta_davies_gaffney(cfg.p, cfg.lambda);
            const double s = cfg.t_end + std::max(1.0, cfg.t_end - cfg.t0);
            const WeightFunction w(zeta, cfg.region(), s, cfg.p);
            const double c2 = caccioppoli_constants(cfg.p, cfg.lambda).c2;
            out.rows =
                check_integral_max_principle(trace, grid, cfg.manifold, cfg.lambda, w, c2);
         }
         else if (name == "davies_gaffney")
         {
            out.rows = check_davies_gaffney(trace, grid, cfg.manifold, cfg.lambda, cfg.region());
         }
         else if (name == "neighborhood_decay")
         {
            const SobolevExponents se = sobolev_exponents(cfg.manifold.n, cfg.p);
            const RegularFunctionSpec gamma((cfg.lambda - 1.0) / se.nu, 2.0, 1.0);
            const NeighborhoodDecayResult res = check_neighborhood_decay(
                trace, grid, cfg.manifold, cfg.lambda, cfg.region(), gamma);
            out.rows = res.rows;
         }
         else if (name == "lambda_decay")
         {
            const LambdaDecayResult res =
                check_lambda_decay(trace, grid, cfg.manifold, cfg.lambda);
            out.rows = {res.row};
         }
         else if (name == "subgaussian_envelope") { out = detail::check_envelope(cfg, trace, grid); }
         else if (name == "sharpness_fit")
         {
            const SharpnessFit res = sharpness_fit(trace, grid, cfg.manifold.n,
                                                   cfg.snapshot_times.front(), cfg.t_end);
            out.rows = {res.row};
         }
         else if (name == "mean_value_scaleinv")
         {
            const MeanValueResult res = check_mean_value_scaleinv(
                trace, grid, cfg.manifold, cfg.lambda, 0.0, cfg.t_end - cfg.t0, cfg.t0);
            out.rows = {res.row};
         }
      }
      catch (const std::runtime_error &e)
      {
         out.rows.clear();
         out.skipped = true;
         out.skip_reason = e.what();
      }
      outcomes.push_back(std::move(out));
   }
   return outcomes;
}

namespace detail
{

inline std::string render_trace_csv(const Trace &trace, const RadialGrid &grid)
{
   std::string out = "t,r,u\n";
   for (const Field &f : trace.snapshots)
   {
      for (std::size_t i = 0; i < grid.cells; ++i)
      {
         out += g17(f.t);
         out += ',';
         out += g17(grid.center_r[i]);
         out += ',';
         out += g17(f.values[i]);
         out += '\n';
      }
   }
   return out;
}

inline std::string render_norms_csv(const ExperimentConfig &cfg, const Trace &trace,
                                    const RadialGrid &grid)
{
   std::vector<double> lambdas = {1.0, 2.0, cfg.lambda,
                                  std::numeric_limits<double>::infinity()};
   std::sort(lambdas.begin(), lambdas.end());
   lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
   std::string out = "t,lambda,norm\n";
   for (const Field &f : trace.snapshots)
   {
      for (double lam : lambdas)
      {
         out += g17(f.t);
         out += ',';
         out += g17(lam);
         out += ',';
         out += g17(norm_lp(f, grid, lam));
         out += '\n';
      }
   }
   return out;
}

inline std::string render_checks_csv(const std::vector<CheckOutcome> &outcomes)
{
   std::vector<const CheckResult *> rows;
   for (const CheckOutcome &out : outcomes)
   {
      for (const CheckResult &row : out.rows) { rows.push_back(&row); }
   }
   std::stable_sort(rows.begin(), rows.end(),
                    [](const CheckResult *a, const CheckResult *b)
                    {
                       if (a->check != b->check) { return a->check < b->check; }
                       return a->t < b->t;
                    });
   std::string out = "check,t,lhs,rhs,margin,pass,context\n";
   for (const CheckResult *row : rows)
   {
      out += row->check;
      out += ',';
      out += g17(row->t);
      out += ',';
      out += g17(row->lhs);
      out += ',';
      out += g17(row->rhs);
      out += ',';
      out += g17(row->margin);
      out += ',';
      out += row->pass ? '1' : '0';
      out += ',';
      out += row->context;
      out += '\n';
   }
   return out;
}

inline std::string render_summary(const ExperimentConfig &cfg, const Trace &trace,
                                  const std::vector<CheckOutcome> &outcomes, bool aborted)
{
   std::ostringstream out;
   out << "command: run\n";
   if (aborted) { out << "status: aborted (" << trace.abort_reason << ")\n"; }
   else { out << "status: ok\n"; }
   out << "p: " << g17(cfg.p) << "\n";
   out << "n: " << cfg.manifold.n << "\n";
   out << "cells: " << cfg.cells << "\n";
   out << "steps: " << trace.steps << "\n";
   if (trace.steps > 0)
   {
      out << "dt_min: " << g17(trace.dt_min) << "\n";
      out << "dt_max: " << g17(trace.dt_max) << "\n";
   }
   bool all_pass = true;
   for (const CheckOutcome &oc : outcomes)
   {
      if (oc.skipped)
      {
         out << oc.name << ": skipped (" << oc.skip_reason << ")\n";
         continue;
      }
      std::size_t failed = 0;
      for (const CheckResult &row : oc.rows)
      {
         if (!row.pass) { ++failed; }
      }
      if (failed == 0) { out << oc.name << ": PASS (" << oc.rows.size() << " rows)\n"; }
      else
      {
         out << oc.name << ": FAIL (" << failed << " of " << oc.rows.size() << " rows)\n";
         all_pass = false;
      }
   }
   if (aborted) { out << "overall: ABORTED\n"; }
   else { out << "overall: " << (all_pass ? "PASS" : "FAIL") << "\n"; }
   return out.str();
}

} // namespace detail

/// `trudinger run <config>`: solve, verify, and write the report files.
inline int cmd_run(const std::string &config_path, std::ostream &out, std::ostream &err)
{
   ExperimentConfig cfg;
   try
   {
      cfg = load_experiment_config(config_path);
   }
   catch (const ConfigError &e)
   {
      err << e.what() << "\n";
      return 2;
   }
   if (const char *env_dir = std::getenv("TRUDINGER_OUT"))
   {
      if (*env_dir != '\0') { cfg.output_dir = env_dir; }
   }

   try
   {
      const RadialGrid grid(cfg.manifold, cfg.r_max, cfg.cells);
      const Field u0 = initial_field(cfg, grid);
      SolverConfig scfg;
      scfg.p = cfg.p;
      const Trace trace = run(u0, cfg.t_end, cfg.snapshot_times, grid, scfg);

      const std::filesystem::path dir(cfg.output_dir);
      write_file_atomic(dir, "trace.csv", detail::render_trace_csv(trace, grid));

      if (trace.aborted)
      {
         std::vector<CheckOutcome> outcomes;
         for (const std::string &name : cfg.checks)
         {
            CheckOutcome oc;
            oc.name = name;
            oc.skipped = true;
            oc.skip_reason = "solver aborted";
            outcomes.push_back(oc);
         }
         write_file_atomic(dir, "norms.csv", "t,lambda,norm\n");
         write_file_atomic(dir, "checks.csv", "check,t,lhs,rhs,margin,pass,context\n");
         const std::string summary = detail::render_summary(cfg, trace, outcomes, true);
         write_file_atomic(dir, "summary.txt", summary);
         out << summary;
         err << "run: solver aborted: " << trace.abort_reason << "\n";
         return 3;
      }

      const std::vector<CheckOutcome> outcomes = run_checks(cfg, trace, grid);
      write_file_atomic(dir, "norms.csv", detail::render_norms_csv(cfg, trace, grid));
      write_file_atomic(dir, "checks.csv", detail::render_checks_csv(outcomes));
      const std::string summary = detail::render_summary(cfg, trace, outcomes, false);
      write_file_atomic(dir, "summary.txt", summary);
      out << summary;

      for (const CheckOutcome &oc : outcomes)
      {
         for (const CheckResult &row : oc.rows)
         {
            if (!row.pass) { return 1; }
         }
      }
      return 0;
   }
   catch (const ConfigError &e)
   {
      err << e.what() << "\n";
      return 2;
   }
   catch (const std::invalid_argument &e)
   {
      err << "config: " << e.what() << "\n";
      return 2;
   }
   catch (const std::exception &e)
   {
      err << "run: " << e.what() << "\n";
      return 3;
   }
}

/// `trudinger constants --p <v> --lambda <v> [--n <v>] [--theta <v>]`.
inline int cmd_constants(const std::vector<std::string> &args, std::ostream &out,
                         std::ostream &err)
{
   CLI::App app{"print the explicit constant table as CSV"};
   double p = 0.0;
   double lambda = 0.0;
   double theta = 2.0;
   int n = 1;
   app.add_option("--p", p, "exponent p > 1")->required();
   app.add_option("--lambda", lambda, "integrability exponent")->required();
   app.add_option("--n", n, "dimension (default 1)");
   app.add_option("--theta", theta, "regular-function scale factor (default 2)");

   std::vector<const char *> argv = {"constants"};
   for (const std::string &a : args) { argv.push_back(a.c_str()); }
   try
   {
      app.parse(static_cast<int>(argv.size()), argv.data());
   }
   catch (const CLI::CallForHelp &)
   {
      out << app.help();
      return 0;
   }
   catch (const CLI::ParseError &e)
   {
      err << "constants: " << e.what() << "\n";
      return 2;
   }

   try
   {
      const ConstantsTable t = build_constants_table(p, n, lambda, theta);
      out << "name,value\n";
      out << "p," << g17(t.p) << "\n";
      out << "q," << g17(t.q) << "\n";
      out << "lambda," << g17(t.lambda) << "\n";
      out << "alpha," << g17(t.alpha) << "\n";
      out << "c1," << g17(t.c1) << "\n";
      out << "c2," << g17(t.c2) << "\n";
      out << "zeta_dg," << g17(t.zeta_dg) << "\n";
      out << "zeta_b," << g17(t.zeta_b) << "\n";
      out << "kappa," << g17(t.kappa) << "\n";
      out << "nu," << g17(t.nu) << "\n";
      out << "theta," << g17(t.theta) << "\n";
      out << "Theta," << g17(t.Theta) << "\n";
      out << "epsilon," << g17(t.epsilon) << "\n";
      return 0;
   }
   catch (const std::invalid_argument &e)
   {
      err << "constants: " << e.what() << "\n";
      return 2;
   }
}

/// `trudinger convergence --p <v> --n <v> --grids 128,256,... [--t0] [--t1]
/// [--cfl] [--min-order]`.
inline int cmd_convergence(const std::vector<std::string> &args, std::ostream &out,
                           std::ostream &err)
{
   CLI::App app{"self-similar refinement study as CSV"};
   double p = 0.0;
   int n = 1;
   std::string grids;
   double t0 = 1.0;
   double t1 = 2.0;
   double cfl = 0.4;
   double min_order = 0.8;
   app.add_option("--p", p, "exponent p > 1")->required();
   app.add_option("--n", n, "dimension");
   app.add_option("--grids", grids, "comma-separated cell counts")->required();
   app.add_option("--t0", t0, "start time (> 0)");
   app.add_option("--t1", t1, "end time (> t0)");
   app.add_option("--cfl", cfl, "time step safety factor");
   app.add_option("--min-order", min_order, "required observed order (sup norm)");

   std::vector<const char *> argv = {"convergence"};
   for (const std::string &a : args) { argv.push_back(a.c_str()); }
   try
   {
      app.parse(static_cast<int>(argv.size()), argv.data());
   }
   catch (const CLI::CallForHelp &)
   {
      out << app.help();
      return 0;
   }
   catch (const CLI::ParseError &e)
   {
      err << "convergence: " << e.what() << "\n";
      return 2;
   }

   std::vector<std::size_t> sizes;
   {
      std::istringstream ls(grids);
      std::string tok;
      while (std::getline(ls, tok, ','))
      {
         try
         {
            const long v = std::stol(tok);
            if (v < 16) { throw std::invalid_argument("grid sizes must be >= 16"); }
            sizes.push_back(static_cast<std::size_t>(v));
         }
         catch (const std::exception &)
         {
            err << "convergence: bad grid size \"" << tok << "\"\n";
            return 2;
         }
      }
   }

   std::vector<ConvergenceRow> rows;
   try
   {
      rows = convergence_study(p, n, sizes, t0, t1, cfl);
   }
   catch (const std::invalid_argument &e)
   {
      err << "convergence: " << e.what() << "\n";
      return 2;
   }
   catch (const std::exception &e)
   {
      err << "convergence: " << e.what() << "\n";
      return 3;
   }

   out << "cells,err_linf,err_l1,order_linf,order_l1,mass_drift_rel,min_u\n";
   for (const ConvergenceRow &row : rows)
   {
      out << row.cells << ',' << g17(row.err_linf) << ',' << g17(row.err_l1) << ',';
      out << (std::isnan(row.order_linf) ? std::string() : g17(row.order_linf)) << ',';
      out << (std::isnan(row.order_l1) ? std::string() : g17(row.order_l1)) << ',';
      out << g17(row.mass_drift_rel) << ',' << g17(row.min_u) << '\n';
   }

   if (rows.size() < 2) { return 0; } // single grid: no threshold to apply
   return rows.back().order_linf >= min_order ? 0 : 1;
}

/// Top-level dispatch for the executable.
inline int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
   static const char *usage =
       "usage: trudinger <command> [args]\n"
       "  run <config.json>      solve and verify one configured experiment\n"
       "  constants --p P --lambda L [--n N] [--theta T]\n"
       "                         print the explicit constant table\n"
       "  convergence --p P --grids N1,N2,... [--n N] [--t0 A] [--t1 B]\n"
       "                         self-similar refinement study\n";
   if (args.empty())
   {
      err << usage;
      return 2;
   }
   const std::string &cmd = args.front();
   const std::vector<std::string> rest(args.begin() + 1, args.end());
   if (cmd == "run")
   {
      if (rest.size() != 1)
      {
         err << "usage: trudinger run <config.json>\n";
         return 2;
      }
      return cmd_run(rest.front(), out, err);
   }
   if (cmd == "constants") { return cmd_constants(rest, out, err); }
   if (cmd == "convergence") { return cmd_convergence(rest, out, err); }
   err << "unknown command \"" << cmd << "\"\n" << usage;
   return 2;
}

} // namespace cli
} // namespace trudinger
