// pepslab <kind> --config FILE [--jobs N] [--output DIR]
// pepslab validate --config FILE
//
// Exit status: 0 on success, 1 when every unit of a run failed or validate
// found problems, 2 for unusable input.

#include <iostream>

#include "CLI11.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/experiment.hpp"
#include "pepslab/runtime.hpp"

namespace {

int do_validate(const std::string& file) {
  const auto diag = pepslab::validate(pepslab::read_config_file(file));
  if (diag.empty()) {
    std::cout << file << ": ok\n";
    return 0;
  }
  for (const auto& d : diag) std::cout << file << ": " << d << "\n";
  return 1;
}

int do_run(const std::string& kind, const std::string& file, int jobs, const std::string& output) {
  pepslab::ExperimentConfig config = pepslab::load_config(file);
  if (config.kind != kind) {
    std::cerr << "pepslab: " << file << " describes a " << config.kind << " run, not " << kind << "\n";
    return 2;
  }
  pepslab::RunOptions opt;
  opt.jobs = jobs;
  opt.output_dir = output;
  opt.seed_offset = pepslab::seed_offset_from_env();
  const pepslab::RunArtifact art = pepslab::run(config, opt);

  std::size_t failed = 0;
  for (const auto& s : art.status)
    if (!s.ok) {
      ++failed;
      std::cerr << "pepslab: " << s.unit << " failed: " << s.message << "\n";
    }
  std::cout << "wrote " << art.dir.string() << " (";
  for (std::size_t i = 0; i < art.tables.size(); ++i)
    std::cout << (i ? ", " : "") << art.tables[i].file << ": " << art.tables[i].rows << " rows";
  std::cout << "); " << art.status.size() - failed << "/" << art.status.size() << " units ok\n";
  return art.all_failed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  pepslab::tune_allocator();
  CLI::App app{"Boundary-MPS, stabilizer and replica experiments"};
  app.require_subcommand(1);

  std::string config, output;
  int jobs = 1;
  auto* val = app.add_subcommand("validate", "Check a config without running it");
  val->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::vector<CLI::App*> runs;
  for (const auto& kind : pepslab::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "Run a " + kind + " experiment");
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "Units run in parallel")->check(CLI::PositiveNumber);
    sub->add_option("--output", output, "Output directory, overrides output_dir");
    runs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) return do_validate(config);
    for (auto* sub : runs)
      if (sub->parsed()) return do_run(sub->get_name(), config, jobs, output);
  } catch (const pepslab::SchemaError& e) {
    std::cerr << "pepslab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pepslab: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
