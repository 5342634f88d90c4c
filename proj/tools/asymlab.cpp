// asymlab -- batch experiment runner.
//
//   asymlab run <spec-file>      execute an experiment, write CSVs + manifest
//   asymlab list                 print the built-in experiment catalog
//   asymlab validate <spec-file> schema-check a spec without running it
//
// Flags: --out <dir> (output directory, overrides the spec's output_dir),
//        --jobs <k> (worker threads over ladder rungs),
//        --tol <name>=<value> (override a named tolerance; repeatable).
//
// Exit codes: 0 success; 2 spec/schema violation (message names the field);
//             3 numerical or I/O failure while running.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asymlab/experiment.hpp"

namespace {

int apply_tol_flags(const std::vector<std::string>& tol_flags,
                    std::map<std::string, double>& tol) {
  for (const std::string& t : tol_flags) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      std::cerr << "spec field 'tol': expected name=value, got '" << t
                << "'\n";
      return 2;
    }
    const std::string name = t.substr(0, eq);
    double value = 0.0;
    try {
      value = asymlab::detail::parse_double_field("tol", t.substr(eq + 1));
      asymlab::apply_tolerance_override(tol, name, value);
    } catch (const asymlab::schema_error& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymlab: truncation-ladder experiments for shift-like "
               "operator families"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  int jobs = 1;
  std::vector<std::string> tol_flags;

  CLI::App* run = app.add_subcommand("run", "execute an experiment spec");
  run->add_option("spec-file", spec_path, "experiment spec file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "worker threads over ladder rungs");
  run->add_option("--tol", tol_flags, "tolerance override name=value");

  CLI::App* list =
      app.add_subcommand("list", "print the built-in experiment catalog");

  CLI::App* validate =
      app.add_subcommand("validate", "schema-check a spec file");
  validate->add_option("spec-file", spec_path, "experiment spec file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::fputs(asymlab::catalog_listing().c_str(), stdout);
    return 0;
  }

  if (validate->parsed()) {
    try {
      const asymlab::ExperimentSpec spec =
          asymlab::load_experiment_spec(spec_path);
      asymlab::validate_experiment(spec);
    } catch (const asymlab::schema_error& e) {
      std::cerr << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 3;
    }
    std::printf("ok: %s\n", spec_path.c_str());
    return 0;
  }

  // run
  asymlab::ExperimentSpec spec;
  auto tol = asymlab::default_tolerances();
  try {
    spec = asymlab::load_experiment_spec(spec_path);
    asymlab::validate_experiment(spec);
    if (jobs < 1) throw asymlab::schema_error("jobs", "must be at least 1");
  } catch (const asymlab::schema_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  if (const int rc = apply_tol_flags(tol_flags, tol)) return rc;

  std::string dir = !out_dir.empty()       ? out_dir
                    : !spec.output_dir.empty() ? spec.output_dir
                                               : std::string(".");
  try {
    const asymlab::RunManifest man =
        asymlab::run_experiment(spec, dir, tol, jobs);
    std::printf("ran %s (%s): %zu rungs, %zu files -> %s\n",
                man.name.c_str(), man.kind.c_str(), man.ladder.size(),
                man.files.size(), dir.c_str());
    for (const asymlab::EmittedFile& f : man.files)
      std::printf("  %s  %zu bytes  fnv1a64=%s\n", f.path.c_str(), f.bytes,
                  f.fnv1a64.c_str());
    for (const auto& [k, v] : man.verdicts)
      std::printf("  verdict %s = %s\n", k.c_str(), v.c_str());
    return 0;
  } catch (const asymlab::schema_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 3;
  }
}
