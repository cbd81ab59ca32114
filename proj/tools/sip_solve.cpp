#include <iostream>

#include "CLI11.hpp"
#include "sip/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"semi-infinite programming via discretization lower bounds"};
  app.require_subcommand(1);

  sip::SolveOptions opt;
  CLI::App* solve =
      app.add_subcommand("solve", "run the iterative lower-bounding loop");
  solve->add_option("--instance", opt.instance_path, "instance file to load");
  solve->add_option("--builtin", opt.builtin,
                    "built-in instance name (available: cex)");
  solve->add_option("--oracle", opt.oracle,
                    "lower-level oracle: exact, alpha or scripted")
      ->capture_default_str();
  solve->add_option("--alpha", opt.alpha,
                    "violation fraction for the alpha oracle, in (0,1)")
      ->capture_default_str();
  solve->add_option("--map", opt.map_entries,
                    "scripted oracle affine map: row-major matrix entries "
                    "followed by the offset vector")
      ->delimiter(',');
  solve->add_option("--eps-feas", opt.eps_feas,
                    "feasibility threshold for declaring optimality")
      ->capture_default_str();
  solve->add_option("--eps-obj", opt.eps_obj,
                    "optimality tolerance of the global subsolver")
      ->capture_default_str();
  solve->add_option("--max-iter", opt.max_iter, "iteration budget")
      ->capture_default_str();
  solve->add_option("--trace", opt.trace_path, "write a CSV trace here");
  solve->add_flag("--quiet", opt.quiet, "suppress per-iteration output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sip::kExitUsage;
  }

  if (solve->parsed()) return sip::run_solve(opt, std::cout, std::cerr);
  return sip::kExitUsage;
}
