#pragma once

// Strict experiment configuration.
//
// A run is described by one JSON document. Parsing is deliberately strict:
// unknown keys are rejected by name, and every numeric precondition of the
// downstream modules is validated at load time, so a bad configuration is
// reported with a diagnostic instead of surfacing later as a solver abort
// or a meaningless check result. Loading is fully deterministic; there is
// no randomness anywhere in a run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trudinger/constants.hpp"
#include "trudinger/geometry.hpp"

namespace trudinger
{

/// Raised for any malformed or invalid configuration; the message is the
/// user-facing diagnostic (exit code 2 territory).
class ConfigError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// How the initial datum is produced.
enum class InitialKind
{
   Barenblatt, ///< exact self-similar profile evaluated at t0 (requires t0 > 0)
   Bump,       ///< (max(0, 1 - (r/a)^2))^m, compactly supported in B(o, a)
   Csv         ///< piecewise-linear interpolation of (r, u) samples from a file
};

/// A fully validated experiment description. All derived quantities
/// (snapshot times, region radius, manifold tables) are resolved here.
struct ExperimentConfig
{
   double p = 2.0;
   int n = 1;
   ModelManifold manifold = ModelManifold::euclidean(1);

   double r_max = 10.0;
   std::size_t cells = 128;

   double t0 = 0.0;
   double t_end = 1.0;
   std::vector<double> snapshot_times; ///< strictly increasing, in (t0, t_end]

   InitialKind initial = InitialKind::Bump;
   double bump_a = 1.0;
   double bump_m = 2.0;
   std::vector<std::pair<double, double>> initial_samples; ///< for InitialKind::Csv

   double lambda = 2.0;

   bool has_region = false;
   double region_a = 1.0;
   double region_rho = 0.0; ///< resolved; "auto" becomes (t_end - t0)^{1/p}

   std::vector<std::string> checks; ///< validated names, duplicates removed

   bool has_envelope = false;
   double envelope_c_exp = 0.0;
   bool envelope_fk_mode = true; ///< true = ball-volume normalizer, false = t^{n/p}

   std::string output_dir = "out";

   Region region() const { return Region(region_a, region_rho); }
};

namespace detail
{

[[noreturn]] inline void config_fail(const std::string &where, const std::string &message)
{
   throw ConfigError("config: " + message + (where.empty() ? "" : " (at " + where + ")"));
}

/// Reject keys outside the allowed set; the offending key is named so the
/// user can find the typo.
inline void check_keys(const nlohmann::json &obj, const std::string &where,
                       std::initializer_list<const char *> allowed)
{
   for (const auto &item : obj.items())
   {
      bool known = false;
      for (const char *key : allowed)
      {
         if (item.key() == key)
         {
            known = true;
            break;
         }
      }
      if (!known) { config_fail(where, "unknown key \"" + item.key() + "\""); }
   }
}

inline const nlohmann::json &require_field(const nlohmann::json &obj, const std::string &where,
                                           const char *key)
{
   auto it = obj.find(key);
   if (it == obj.end()) { config_fail(where, std::string("missing required key \"") + key + "\""); }
   return *it;
}

inline double as_number(const nlohmann::json &v, const std::string &where)
{
   if (!v.is_number()) { config_fail(where, "expected a number"); }
   const double x = v.get<double>();
   if (!std::isfinite(x)) { config_fail(where, "number must be finite"); }
   return x;
}

inline double get_number(const nlohmann::json &obj, const std::string &where, const char *key)
{
   return as_number(require_field(obj, where, key), where + "." + key);
}

inline double get_number_or(const nlohmann::json &obj, const std::string &where, const char *key,
                            double fallback)
{
   auto it = obj.find(key);
   return it == obj.end() ? fallback : as_number(*it, where + "." + key);
}

inline std::string get_string(const nlohmann::json &obj, const std::string &where, const char *key)
{
   const nlohmann::json &v = require_field(obj, where, key);
   if (!v.is_string()) { config_fail(where + "." + key, "expected a string"); }
   return v.get<std::string>();
}

/// Two-column numeric CSV (optional single header line). Used for custom
/// manifold profiles (r, S) and tabulated initial data (r, u).
inline std::vector<std::pair<double, double>> read_two_column_csv(const std::filesystem::path &path)
{
   std::ifstream in(path);
   if (!in) { config_fail(path.string(), "cannot open file"); }
   std::vector<std::pair<double, double>> rows;
   std::string line;
   std::size_t lineno = 0;
   while (std::getline(in, line))
   {
      ++lineno;
      if (line.empty()) { continue; }
      for (char &c : line)
      {
         if (c == ',') { c = ' '; }
      }
      std::istringstream ls(line);
      double a = 0.0;
      double b = 0.0;
      if (!(ls >> a >> b))
      {
         if (lineno == 1) { continue; } // header line
         config_fail(path.string() + ":" + std::to_string(lineno), "expected two numeric columns");
      }
      if (!std::isfinite(a) || !std::isfinite(b))
      {
         config_fail(path.string() + ":" + std::to_string(lineno), "values must be finite");
      }
      rows.emplace_back(a, b);
   }
   if (rows.size() < 2) { config_fail(path.string(), "need at least two data rows"); }
   for (std::size_t i = 1; i < rows.size(); ++i)
   {
      if (!(rows[i].first > rows[i - 1].first))
      {
         config_fail(path.string(), "first column must be strictly increasing");
      }
   }
   return rows;
}

inline const std::vector<std::string> &known_check_names()
{
   static const std::vector<std::string> names = {
       "mass",
       "lambda_monotone",
       "integral_max_principle",
       "davies_gaffney",
       "neighborhood_decay",
       "lambda_decay",
       "subgaussian_envelope",
       "sharpness_fit",
       "mean_value_scaleinv",
   };
   return names;
}

} // namespace detail

/// Parse and validate a configuration document. `base_dir` resolves relative
/// csv paths (pass the directory containing the config file).
inline ExperimentConfig parse_experiment_config(const std::string &text,
                                                const std::filesystem::path &base_dir)
{
   nlohmann::json doc;
   try
   {
      doc = nlohmann::json::parse(text);
   }
   catch (const nlohmann::json::parse_error &e)
   {
      // Map the reported byte offset back to a line number.
      std::size_t line = 1;
      const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
      for (std::size_t i = 0; i < stop; ++i)
      {
         if (text[i] == '\n') { ++line; }
      }
      throw ConfigError("config: parse error at line " + std::to_string(line) + ": " + e.what());
   }
   if (!doc.is_object()) { detail::config_fail("$", "top level must be an object"); }
   detail::check_keys(doc, "$",
                      {"p", "n", "manifold", "grid", "time", "initial", "lambda", "region",
                       "checks", "envelope", "output_dir"});

   ExperimentConfig cfg;

   cfg.p = detail::get_number(doc, "$", "p");
   if (!(cfg.p > 1.0)) { detail::config_fail("$.p", "p must be > 1"); }

   const double n_raw = detail::get_number(doc, "$", "n");
   cfg.n = static_cast<int>(n_raw);
   if (cfg.n < 1 || static_cast<double>(cfg.n) != n_raw)
   {
      detail::config_fail("$.n", "n must be a positive integer");
   }

   // ---- manifold ----------------------------------------------------------
   if (doc.contains("manifold"))
   {
      const nlohmann::json &man = doc["manifold"];
      if (!man.is_object()) { detail::config_fail("$.manifold", "expected an object"); }
      detail::check_keys(man, "$.manifold", {"kind", "C", "alpha", "r0", "csv"});
      const std::string kind = detail::get_string(man, "$.manifold", "kind");
      if (kind == "euclidean")
      {
         detail::check_keys(man, "$.manifold", {"kind"});
         cfg.manifold = ModelManifold::euclidean(cfg.n);
      }
      else if (kind == "polynomial")
      {
         const double C = detail::get_number(man, "$.manifold", "C");
         const double alpha = detail::get_number(man, "$.manifold", "alpha");
         const double r0 = detail::get_number_or(man, "$.manifold", "r0", 0.0);
         try
         {
            cfg.manifold = ModelManifold::polynomial(cfg.n, C, alpha, r0);
         }
         catch (const std::invalid_argument &e)
         {
            detail::config_fail("$.manifold", e.what());
         }
      }
      else if (kind == "custom")
      {
         const std::string rel = detail::get_string(man, "$.manifold", "csv");
         const auto rows = detail::read_two_column_csv(base_dir / rel);
         std::vector<double> r(rows.size());
         std::vector<double> S(rows.size());
         for (std::size_t i = 0; i < rows.size(); ++i)
         {
            r[i] = rows[i].first;
            S[i] = rows[i].second;
         }
         try
         {
            cfg.manifold = ModelManifold::custom(cfg.n, std::move(r), std::move(S));
         }
         catch (const std::invalid_argument &e)
         {
            detail::config_fail("$.manifold", e.what());
         }
      }
      else
      {
         detail::config_fail("$.manifold.kind",
                             "unknown kind \"" + kind + "\" (euclidean, polynomial, custom)");
      }
   }
   else
   {
      cfg.manifold = ModelManifold::euclidean(cfg.n);
   }

   // ---- grid ---------------------------------------------------------------
   {
      const nlohmann::json &grid = detail::require_field(doc, "$", "grid");
      if (!grid.is_object()) { detail::config_fail("$.grid", "expected an object"); }
      detail::check_keys(grid, "$.grid", {"r_max", "cells"});
      cfg.r_max = detail::get_number(grid, "$.grid", "r_max");
      const double cells_raw = detail::get_number(grid, "$.grid", "cells");
      if (cells_raw < 16.0 || cells_raw != std::floor(cells_raw))
      {
         detail::config_fail("$.grid.cells", "cells must be an integer >= 16");
      }
      cfg.cells = static_cast<std::size_t>(cells_raw);
      if (!(cfg.r_max > cfg.manifold.inner_radius()))
      {
         detail::config_fail("$.grid.r_max", "r_max must exceed the manifold inner radius");
      }
   }

   // ---- time ---------------------------------------------------------------
   {
      const nlohmann::json &time = detail::require_field(doc, "$", "time");
      if (!time.is_object()) { detail::config_fail("$.time", "expected an object"); }
      detail::check_keys(time, "$.time", {"t0", "t_end", "snapshots"});
      cfg.t0 = detail::get_number(time, "$.time", "t0");
      cfg.t_end = detail::get_number(time, "$.time", "t_end");
      if (!(cfg.t0 >= 0.0)) { detail::config_fail("$.time.t0", "t0 must be >= 0"); }
      if (!(cfg.t_end > cfg.t0)) { detail::config_fail("$.time.t_end", "t_end must exceed t0"); }

      const nlohmann::json &snaps = detail::require_field(time, "$.time", "snapshots");
      if (snaps.is_number())
      {
         const double count_raw = snaps.get<double>();
         if (count_raw < 1.0 || count_raw != std::floor(count_raw))
         {
            detail::config_fail("$.time.snapshots", "snapshot count must be a positive integer");
         }
         const std::size_t count = static_cast<std::size_t>(count_raw);
         cfg.snapshot_times.resize(count);
         for (std::size_t k = 0; k < count; ++k)
         {
            cfg.snapshot_times[k] =
                cfg.t0 + (cfg.t_end - cfg.t0) * static_cast<double>(k + 1) / static_cast<double>(count);
         }
         cfg.snapshot_times.back() = cfg.t_end;
      }
      else if (snaps.is_array())
      {
         for (const auto &v : snaps)
         {
            cfg.snapshot_times.push_back(detail::as_number(v, "$.time.snapshots[]"));
         }
         if (cfg.snapshot_times.empty())
         {
            detail::config_fail("$.time.snapshots", "snapshot list must be non-empty");
         }
         double prev = cfg.t0;
         for (double t : cfg.snapshot_times)
         {
            if (!(t > prev) || t > cfg.t_end)
            {
               detail::config_fail("$.time.snapshots",
                                   "times must be strictly increasing inside (t0, t_end]");
            }
            prev = t;
         }
      }
      else
      {
         detail::config_fail("$.time.snapshots", "expected a count or a list of times");
      }
   }

   // ---- initial ------------------------------------------------------------
   {
      const nlohmann::json &init = detail::require_field(doc, "$", "initial");
      if (!init.is_object()) { detail::config_fail("$.initial", "expected an object"); }
      detail::check_keys(init, "$.initial", {"kind", "a", "m", "csv"});
      const std::string kind = detail::get_string(init, "$.initial", "kind");
      if (kind == "barenblatt")
      {
         detail::check_keys(init, "$.initial", {"kind"});
         cfg.initial = InitialKind::Barenblatt;
         if (!(cfg.t0 > 0.0))
         {
            detail::config_fail("$.initial", "barenblatt initial data requires t0 > 0");
         }
         if (cfg.manifold.kind == ProfileKind::Custom)
         {
            detail::config_fail("$.initial",
                                "barenblatt initial data needs a euclidean or polynomial manifold");
         }
      }
      else if (kind == "bump")
      {
         cfg.initial = InitialKind::Bump;
         cfg.bump_a = detail::get_number_or(init, "$.initial", "a", 1.0);
         cfg.bump_m = detail::get_number_or(init, "$.initial", "m", 2.0);
         if (!(cfg.bump_a > 0.0) || cfg.bump_a >= cfg.r_max)
         {
            detail::config_fail("$.initial.a", "support radius must lie in (0, r_max)");
         }
         if (!(cfg.bump_m >= 1.0)) { detail::config_fail("$.initial.m", "smoothness power must be >= 1"); }
      }
      else if (kind == "csv")
      {
         cfg.initial = InitialKind::Csv;
         const std::string rel = detail::get_string(init, "$.initial", "csv");
         cfg.initial_samples = detail::read_two_column_csv(base_dir / rel);
         for (const auto &row : cfg.initial_samples)
         {
            if (row.second < 0.0)
            {
               detail::config_fail("$.initial.csv", "initial values must be non-negative");
            }
         }
      }
      else
      {
         detail::config_fail("$.initial.kind",
                             "unknown kind \"" + kind + "\" (barenblatt, bump, csv)");
      }
   }

   // ---- lambda / region / checks / envelope --------------------------------
   cfg.lambda = detail::get_number(doc, "$", "lambda");
   if (!(cfg.lambda > 0.0)) { detail::config_fail("$.lambda", "lambda must be > 0"); }

   if (doc.contains("region"))
   {
      const nlohmann::json &reg = doc["region"];
      if (!reg.is_object()) { detail::config_fail("$.region", "expected an object"); }
      detail::check_keys(reg, "$.region", {"a", "rho"});
      cfg.has_region = true;
      cfg.region_a = detail::get_number(reg, "$.region", "a");
      if (!(cfg.region_a > 0.0)) { detail::config_fail("$.region.a", "a must be > 0"); }
      const nlohmann::json &rho = detail::require_field(reg, "$.region", "rho");
      if (rho.is_string())
      {
         if (rho.get<std::string>() != "auto")
         {
            detail::config_fail("$.region.rho", "expected a number or \"auto\"");
         }
         cfg.region_rho = std::pow(cfg.t_end - cfg.t0, 1.0 / cfg.p);
      }
      else
      {
         cfg.region_rho = detail::as_number(rho, "$.region.rho");
         if (!(cfg.region_rho >= 0.0)) { detail::config_fail("$.region.rho", "rho must be >= 0"); }
      }
   }

   if (doc.contains("checks"))
   {
      const nlohmann::json &checks = doc["checks"];
      if (!checks.is_array()) { detail::config_fail("$.checks", "expected a list of check names"); }
      for (const auto &v : checks)
      {
         if (!v.is_string()) { detail::config_fail("$.checks", "check names must be strings"); }
         const std::string name = v.get<std::string>();
         const auto &known = detail::known_check_names();
         if (std::find(known.begin(), known.end(), name) == known.end())
         {
            detail::config_fail("$.checks", "unknown check \"" + name + "\"");
         }
         if (std::find(cfg.checks.begin(), cfg.checks.end(), name) == cfg.checks.end())
         {
            cfg.checks.push_back(name);
         }
      }
   }

   if (doc.contains("envelope"))
   {
      const nlohmann::json &env = doc["envelope"];
      if (!env.is_object()) { detail::config_fail("$.envelope", "expected an object"); }
      detail::check_keys(env, "$.envelope", {"c_exp", "mode"});
      cfg.has_envelope = true;
      cfg.envelope_c_exp = detail::get_number(env, "$.envelope", "c_exp");
      if (!(cfg.envelope_c_exp > 0.0)) { detail::config_fail("$.envelope.c_exp", "c_exp must be > 0"); }
      const std::string mode = detail::get_string(env, "$.envelope", "mode");
      if (mode == "fk") { cfg.envelope_fk_mode = true; }
      else if (mode == "sobolev") { cfg.envelope_fk_mode = false; }
      else { detail::config_fail("$.envelope.mode", "mode must be \"fk\" or \"sobolev\""); }
   }

   if (doc.contains("output_dir"))
   {
      cfg.output_dir = detail::get_string(doc, "$", "output_dir");
      if (cfg.output_dir.empty()) { detail::config_fail("$.output_dir", "must be non-empty"); }
   }

   // ---- cross-field preconditions -----------------------------------------
   const bool wants_region_checks =
       std::find(cfg.checks.begin(), cfg.checks.end(), "integral_max_principle") != cfg.checks.end()
       || std::find(cfg.checks.begin(), cfg.checks.end(), "davies_gaffney") != cfg.checks.end()
       || std::find(cfg.checks.begin(), cfg.checks.end(), "neighborhood_decay") != cfg.checks.end();
   if (wants_region_checks)
   {
      if (!cfg.has_region)
      {
         detail::config_fail("$.region", "localization checks require a region");
      }
      if (!lambda_admissible(cfg.p, cfg.lambda))
      {
         std::ostringstream msg;
         msg << "lambda = " << cfg.lambda << " violates lambda >= max(p, p/(p-1)) = "
             << min_admissible_lambda(cfg.p) << " required by the localization estimates";
         detail::config_fail("$.lambda", msg.str());
      }
   }
   if (std::find(cfg.checks.begin(), cfg.checks.end(), "subgaussian_envelope") != cfg.checks.end())
   {
      if (!cfg.has_envelope)
      {
         detail::config_fail("$.envelope", "subgaussian_envelope check requires an envelope block");
      }
      if (!cfg.has_region && cfg.initial != InitialKind::Bump)
      {
         detail::config_fail("$.region",
                             "subgaussian_envelope needs a region (or a bump initial datum) "
                             "to define the support");
      }
   }

   return cfg;
}

/// Load a configuration from disk; relative csv paths resolve against the
/// config file's own directory.
inline ExperimentConfig load_experiment_config(const std::string &path)
{
   std::ifstream in(path, std::ios::binary);
   if (!in) { throw ConfigError("config: cannot open \"" + path + "\""); }
   std::ostringstream buffer;
   buffer << in.rdbuf();
   return parse_experiment_config(buffer.str(), std::filesystem::path(path).parent_path());
}

} // namespace trudinger
