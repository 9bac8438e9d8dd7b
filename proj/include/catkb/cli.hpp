#pragma once

#include <exception>
#include <filesystem>
#include <string>

#include "catkb/dataset.hpp"
#include "catkb/pipeline.hpp"

namespace catkb {

/// Exit codes: 0 ok, 2 input or config, 3 pipeline stage, 4 undefined metric, 5 transport.
int exit_code_for(const std::exception& e);

struct RunRequest {
  std::filesystem::path events;
  std::filesystem::path concepts;
  std::filesystem::path triples;
  std::filesystem::path out;
  PipelineConfig cfg;
  LoadOptions load;
  std::string scorer = "lexical";  // lexical | logistic | remote | recorded
  std::string endpoint;            // remote
  std::filesystem::path recorded;  // recorded: JSONL {"prompt", "score"}
};

struct RunOutcome {
  CatResult result;
  std::filesystem::path manifest;
};

/// Loads the inputs, runs the loop, exports at cfg.export_threshold and writes the artifacts
/// directory: bundle/, stores/, student_data/, exports/, report.json, timings.json and,
/// last, manifest.json. The manifest lists every other output with its SHA-256 and holds no
/// wall-clock data, so identical inputs give identical manifests.
RunOutcome execute_run(const RunRequest& request);

/// Entry point of the `catkb` executable.
int run_cli(int argc, char** argv);

}  // namespace catkb
