#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trudinger/cli.hpp"
#include "trudinger/config.hpp"

using namespace trudinger;
namespace fs = std::filesystem;

namespace
{

/// Scratch directory that cleans up after itself.
struct TempDir
{
   fs::path path;

   explicit TempDir(const std::string &tag)
   {
      path = fs::temp_directory_path() / ("trudinger_test_" + tag);
      fs::remove_all(path);
      fs::create_directories(path);
   }

   ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path &p, const std::string &text)
{
   std::ofstream out(p, std::ios::binary);
   out << text;
   REQUIRE(out.good());
}

std::string slurp(const fs::path &p)
{
   std::ifstream in(p, std::ios::binary);
   REQUIRE(in.good());
   std::ostringstream buf;
   buf << in.rdbuf();
   return buf.str();
}

int run_cli(const std::vector<std::string> &args, std::string *out_text = nullptr,
            std::string *err_text = nullptr)
{
   std::ostringstream out;
   std::ostringstream err;
   const int code = cli::cli_main(args, out, err);
   if (out_text != nullptr) { *out_text = out.str(); }
   if (err_text != nullptr) { *err_text = err.str(); }
   return code;
}

const char *minimal_config = R"({
  "p": 2.0,
  "n": 1,
  "grid": {"r_max": 12.0, "cells": 64},
  "time": {"t0": 1.0, "t_end": 2.0, "snapshots": 4},
  "initial": {"kind": "barenblatt"},
  "lambda": 2.0,
  "checks": ["mass", "lambda_monotone"],
  "output_dir": "OUTDIR"
})";

std::string config_with_output(const std::string &text, const fs::path &outdir)
{
   std::string s = text;
   const std::string key = "OUTDIR";
   const std::size_t at = s.find(key);
   REQUIRE(at != std::string::npos);
   std::string dir = outdir.string();
   // JSON string escape for backslashes (not expected on this platform, but cheap)
   std::string escaped;
   for (char c : dir)
   {
      if (c == '\\') { escaped += "\\\\"; }
      else { escaped += c; }
   }
   s.replace(at, key.size(), escaped);
   return s;
}

} // namespace

TEST_CASE("config parsing: strictness and diagnostics")
{
   SECTION("minimal document resolves derived fields")
   {
      const ExperimentConfig cfg = parse_experiment_config(R"({
         "p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 5},
         "initial": {"kind": "bump", "a": 1.0},
         "lambda": 2.0,
         "region": {"a": 1.0, "rho": "auto"}
      })", ".");
      REQUIRE(cfg.snapshot_times.size() == 5);
      REQUIRE(cfg.snapshot_times.front() == Catch::Approx(0.2));
      REQUIRE(cfg.snapshot_times.back() == 1.0);
      REQUIRE(cfg.region_rho == Catch::Approx(1.0)); // (t_end - t0)^{1/p}
      REQUIRE(cfg.bump_m == 2.0);                    // default smoothness
      REQUIRE(cfg.manifold.kind == ProfileKind::Euclidean);
   }

   SECTION("unknown keys are named")
   {
      const std::string doc = R"({"p": 2.0, "n": 1, "foo": 3,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 2.0})";
      REQUIRE_THROWS_WITH(parse_experiment_config(doc, "."),
                          Catch::Matchers::ContainsSubstring("foo"));
   }

   SECTION("nested unknown keys are named too")
   {
      const std::string doc = R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32, "spacing": "log"},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 2.0})";
      REQUIRE_THROWS_WITH(parse_experiment_config(doc, "."),
                          Catch::Matchers::ContainsSubstring("spacing"));
   }

   SECTION("syntax errors carry a line number")
   {
      const std::string doc = "{\n  \"p\": 2.0,\n  \"n\": oops\n}";
      REQUIRE_THROWS_WITH(parse_experiment_config(doc, "."),
                          Catch::Matchers::ContainsSubstring("line 3"));
   }

   SECTION("localization checks demand an admissible lambda")
   {
      const std::string doc = R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 1.5,
         "region": {"a": 1.0, "rho": 1.0},
         "checks": ["davies_gaffney"]})";
      REQUIRE_THROWS_WITH(parse_experiment_config(doc, "."),
                          Catch::Matchers::ContainsSubstring("max(p, p/(p-1))"));
   }

   SECTION("region is required by localization checks")
   {
      const std::string doc = R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 2.0,
         "checks": ["davies_gaffney"]})";
      REQUIRE_THROWS_AS(parse_experiment_config(doc, "."), ConfigError);
   }

   SECTION("unknown check names are rejected")
   {
      const std::string doc = R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 2.0,
         "checks": ["massive"]})";
      REQUIRE_THROWS_WITH(parse_experiment_config(doc, "."),
                          Catch::Matchers::ContainsSubstring("massive"));
   }

   SECTION("assorted value validation")
   {
      // p <= 1
      REQUIRE_THROWS_AS(parse_experiment_config(R"({"p": 1.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump"}, "lambda": 2.0})", "."),
                        ConfigError);
      // bump support outside the grid
      REQUIRE_THROWS_AS(parse_experiment_config(R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "bump", "a": 9.0}, "lambda": 2.0})", "."),
                        ConfigError);
      // barenblatt initial needs t0 > 0
      REQUIRE_THROWS_AS(parse_experiment_config(R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
         "initial": {"kind": "barenblatt"}, "lambda": 2.0})", "."),
                        ConfigError);
      // snapshot list must stay inside (t0, t_end]
      REQUIRE_THROWS_AS(parse_experiment_config(R"({"p": 2.0, "n": 1,
         "grid": {"r_max": 8.0, "cells": 32},
         "time": {"t0": 0.0, "t_end": 1.0, "snapshots": [0.5, 1.5]},
         "initial": {"kind": "bump"}, "lambda": 2.0})", "."),
                        ConfigError);
   }
}

TEST_CASE("cmd_run: minimal experiment end to end")
{
   TempDir tmp("run_minimal");
   const fs::path outdir = tmp.path / "out";
   const fs::path cfg_path = tmp.path / "exp.json";
   write_text(cfg_path, config_with_output(minimal_config, outdir));

   std::string out;
   std::string err;
   const int code = run_cli({"run", cfg_path.string()}, &out, &err);
   INFO(err);
   REQUIRE(code == 0);

   REQUIRE(fs::exists(outdir / "trace.csv"));
   REQUIRE(fs::exists(outdir / "norms.csv"));
   REQUIRE(fs::exists(outdir / "checks.csv"));
   REQUIRE(fs::exists(outdir / "summary.txt"));

   const std::string trace = slurp(outdir / "trace.csv");
   REQUIRE(trace.rfind("t,r,u\n", 0) == 0);
   // initial slice + 4 requested snapshots, 64 cells each, plus header
   REQUIRE(std::count(trace.begin(), trace.end(), '\n') == 1 + 5 * 64);

   const std::string norms = slurp(outdir / "norms.csv");
   REQUIRE(norms.rfind("t,lambda,norm\n", 0) == 0);
   REQUIRE(norms.find("inf") != std::string::npos); // sup-norm rows

   const std::string checks = slurp(outdir / "checks.csv");
   REQUIRE(checks.rfind("check,t,lhs,rhs,margin,pass,context\n", 0) == 0);
   REQUIRE(checks.find("mass,") != std::string::npos);
   REQUIRE(checks.find("lambda_monotone,") != std::string::npos);

   const std::string summary = slurp(outdir / "summary.txt");
   REQUIRE(summary.find("mass: PASS") != std::string::npos);
   REQUIRE(summary.find("lambda_monotone: PASS") != std::string::npos);
   REQUIRE(summary.find("overall: PASS") != std::string::npos);
   REQUIRE(out == summary); // stdout mirrors the summary file
}

TEST_CASE("cmd_run: full check suite on a bump experiment")
{
   TempDir tmp("run_full");
   const fs::path outdir = tmp.path / "out";
   const fs::path cfg_path = tmp.path / "exp.json";
   const char *doc = R"({
     "p": 2.0,
     "n": 1,
     "manifold": {"kind": "euclidean"},
     "grid": {"r_max": 8.0, "cells": 96},
     "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 6},
     "initial": {"kind": "bump", "a": 1.0, "m": 2},
     "lambda": 2.0,
     "region": {"a": 1.0, "rho": "auto"},
     "checks": ["mass", "lambda_monotone", "integral_max_principle",
                "davies_gaffney", "neighborhood_decay",
                "subgaussian_envelope", "mean_value_scaleinv"],
     "envelope": {"c_exp": 0.125, "mode": "fk"},
     "output_dir": "OUTDIR"
   })";
   write_text(cfg_path, config_with_output(doc, outdir));

   std::string out;
   std::string err;
   const int code = run_cli({"run", cfg_path.string()}, &out, &err);
   INFO(err);
   INFO(out);
   REQUIRE(code == 0);

   const std::string summary = slurp(outdir / "summary.txt");
   for (const char *name : {"mass", "lambda_monotone", "integral_max_principle",
                            "davies_gaffney", "neighborhood_decay", "subgaussian_envelope",
                            "mean_value_scaleinv"})
   {
      INFO(name);
      REQUIRE(summary.find(std::string(name) + ": PASS") != std::string::npos);
   }
   // every configured check produced rows in checks.csv
   const std::string checks = slurp(outdir / "checks.csv");
   for (const char *name : {"mass,", "lambda_monotone,", "integral_max_principle,",
                            "davies_gaffney,", "neighborhood_decay,", "subgaussian_envelope,",
                            "mean_value_scaleinv,"})
   {
      INFO(name);
      REQUIRE(checks.find(name) != std::string::npos);
   }
}

TEST_CASE("cmd_run: tabulated initial data and custom manifolds")
{
   TempDir tmp("run_csv");
   const fs::path outdir = tmp.path / "out";

   write_text(tmp.path / "initial.csv", "r,u\n0.0,1.0\n0.5,0.5\n1.0,0.0\n8.0,0.0\n");
   write_text(tmp.path / "profile.csv", [] {
      std::string rows = "r,S\n";
      for (int i = 0; i <= 100; ++i)
      {
         const double r = 1e-6 + (10.0 - 1e-6) * i / 100.0;
         rows += cli::g17(r) + ",1.0\n";
      }
      return rows;
   }());

   const char *doc = R"({
     "p": 2.0,
     "n": 1,
     "manifold": {"kind": "custom", "csv": "profile.csv"},
     "grid": {"r_max": 8.0, "cells": 64},
     "time": {"t0": 0.0, "t_end": 0.5, "snapshots": 3},
     "initial": {"kind": "csv", "csv": "initial.csv"},
     "lambda": 2.0,
     "checks": ["mass"],
     "output_dir": "OUTDIR"
   })";
   const fs::path cfg_path = tmp.path / "exp.json";
   write_text(cfg_path, config_with_output(doc, outdir));

   std::string err;
   const int code = run_cli({"run", cfg_path.string()}, nullptr, &err);
   INFO(err);
   REQUIRE(code == 0);
   REQUIRE(slurp(outdir / "summary.txt").find("mass: PASS") != std::string::npos);
}

TEST_CASE("cmd_run: exit codes for bad configurations")
{
   TempDir tmp("run_bad");

   SECTION("missing file")
   {
      std::string err;
      REQUIRE(run_cli({"run", (tmp.path / "absent.json").string()}, nullptr, &err) == 2);
      REQUIRE(err.find("cannot open") != std::string::npos);
   }

   SECTION("unknown key")
   {
      const fs::path cfg_path = tmp.path / "bad_key.json";
      write_text(cfg_path, R"({"p": 2.0, "n": 1, "foo": 1,
        "grid": {"r_max": 8.0, "cells": 32},
        "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
        "initial": {"kind": "bump"}, "lambda": 2.0})");
      std::string err;
      REQUIRE(run_cli({"run", cfg_path.string()}, nullptr, &err) == 2);
      REQUIRE(err.find("foo") != std::string::npos);
   }

   SECTION("inadmissible lambda for a localization check")
   {
      const fs::path cfg_path = tmp.path / "bad_lambda.json";
      write_text(cfg_path, R"({"p": 2.0, "n": 1,
        "grid": {"r_max": 8.0, "cells": 32},
        "time": {"t0": 0.0, "t_end": 1.0, "snapshots": 2},
        "initial": {"kind": "bump"}, "lambda": 1.5,
        "region": {"a": 1.0, "rho": 1.0},
        "checks": ["davies_gaffney"]})");
      std::string err;
      REQUIRE(run_cli({"run", cfg_path.string()}, nullptr, &err) == 2);
      REQUIRE(err.find("lambda") != std::string::npos);
   }
}

TEST_CASE("cmd_run: determinism and output redirection")
{
   TempDir tmp("run_deterministic");
   const fs::path out_a = tmp.path / "a";
   const fs::path out_b = tmp.path / "b";
   const fs::path cfg_path = tmp.path / "exp.json";
   write_text(cfg_path, config_with_output(minimal_config, out_a));

   REQUIRE(run_cli({"run", cfg_path.string()}) == 0);

   // Same config again, output redirected via the environment override.
   REQUIRE(setenv("TRUDINGER_OUT", out_b.string().c_str(), 1) == 0);
   const int code = run_cli({"run", cfg_path.string()});
   REQUIRE(unsetenv("TRUDINGER_OUT") == 0);
   REQUIRE(code == 0);

   for (const char *name : {"trace.csv", "norms.csv", "checks.csv", "summary.txt"})
   {
      INFO(name);
      REQUIRE(slurp(out_a / name) == slurp(out_b / name));
   }
}

TEST_CASE("cmd_constants")
{
   SECTION("known table values at p = 2, lambda = 2")
   {
      std::string out;
      REQUIRE(run_cli({"constants", "--p", "2", "--lambda", "2"}, &out) == 0);
      REQUIRE(out.rfind("name,value\n", 0) == 0);
      REQUIRE(out.find("c1,0.5\n") != std::string::npos);
      REQUIRE(out.find("c2,17\n") != std::string::npos);
      REQUIRE(out.find("zeta_dg,0.029411764705882") != std::string::npos);
      REQUIRE(out.find("zeta_b,0.25\n") != std::string::npos);
   }

   SECTION("all rows finite and positive at p = 3, lambda = 3")
   {
      std::string out;
      REQUIRE(run_cli({"constants", "--p", "3", "--lambda", "3"}, &out) == 0);
      std::istringstream lines(out);
      std::string line;
      std::getline(lines, line); // header
      int rows = 0;
      while (std::getline(lines, line))
      {
         const std::size_t comma = line.find(',');
         REQUIRE(comma != std::string::npos);
         const double value = std::stod(line.substr(comma + 1));
         INFO(line);
         REQUIRE(std::isfinite(value));
         REQUIRE(value > 0.0);
         ++rows;
      }
      REQUIRE(rows == 13);
   }

   SECTION("rejects p = 1 and missing flags")
   {
      std::string err;
      REQUIRE(run_cli({"constants", "--p", "1", "--lambda", "2"}, nullptr, &err) == 2);
      REQUIRE(run_cli({"constants", "--p", "2"}, nullptr, &err) == 2);
      REQUIRE(run_cli({"constants", "--p", "2", "--lambda", "2", "--bogus", "1"}, nullptr,
                      &err) == 2);
   }
}

TEST_CASE("cmd_convergence")
{
   SECTION("two grids give a filled order column and exit 0")
   {
      std::string out;
      std::string err;
      const int code = run_cli({"convergence", "--p", "2", "--n", "3", "--grids", "64,128",
                                "--t0", "1.0", "--t1", "1.2"},
                               &out, &err);
      INFO(err);
      REQUIRE(code == 0);
      std::istringstream lines(out);
      std::string header;
      std::getline(lines, header);
      REQUIRE(header == "cells,err_linf,err_l1,order_linf,order_l1,mass_drift_rel,min_u");
      std::string row1;
      std::string row2;
      REQUIRE(std::getline(lines, row1).good());
      REQUIRE(static_cast<bool>(std::getline(lines, row2)));
      REQUIRE(row1.rfind("64,", 0) == 0);
      REQUIRE(row2.rfind("128,", 0) == 0);
      REQUIRE(row1.find(",,,") != std::string::npos); // first row: empty orders
      REQUIRE(row2.find(",,,") == std::string::npos);
   }

   SECTION("single grid applies no threshold")
   {
      std::string out;
      REQUIRE(run_cli({"convergence", "--p", "2", "--grids", "64", "--t0", "1.0", "--t1",
                       "1.2"},
                      &out) == 0);
      REQUIRE(out.find(",,,") != std::string::npos);
   }

   SECTION("degenerate time window is a configuration error")
   {
      std::string err;
      REQUIRE(run_cli({"convergence", "--p", "2", "--grids", "64,128", "--t0", "1.0", "--t1",
                       "0.5"},
                      nullptr, &err) == 2);
   }

   SECTION("malformed grid list is a configuration error")
   {
      std::string err;
      REQUIRE(run_cli({"convergence", "--p", "2", "--grids", "64,xyz"}, nullptr, &err) == 2);
   }
}

TEST_CASE("cli_main dispatch")
{
   std::string err;
   REQUIRE(run_cli({}, nullptr, &err) == 2);
   REQUIRE(err.find("usage") != std::string::npos);
   REQUIRE(run_cli({"frobnicate"}, nullptr, &err) == 2);
   REQUIRE(run_cli({"run"}, nullptr, &err) == 2);
   REQUIRE(run_cli({"run", "a.json", "b.json"}, nullptr, &err) == 2);
}
