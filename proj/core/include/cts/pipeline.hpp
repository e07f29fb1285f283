#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cts/bias_lab.hpp"
#include "cts/config.hpp"
#include "cts/error.hpp"
#include "cts/report.hpp"
#include "cts/reward_model.hpp"

namespace cts::pipeline {

/// An error raised inside a named stage; keeps the kind of the original.
class StageError : public Error {
 public:
  StageError(std::string stage, Kind kind, const std::string& what)
      : Error(kind, stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

using Progress = std::function<void(std::string_view)>;

struct PipelineResult {
  report::RunReport report;
  reward::RewardModel model;
  bias::AuditLog audit;
  std::vector<StageTiming> timings;
};

/// Runs ingest, injection, featurization, model fitting, drift and trust
/// scoring and attribution. The config must already be valid. When
/// `artifacts` is non-empty, audit.jsonl, model.json and (optionally)
/// cleaned.jsonl are written there as their stages finish.
PipelineResult execute(const RunConfig& config, const Progress& progress = {},
                       const std::filesystem::path& artifacts = {});

/// Validates the config, executes into a staging directory and publishes the
/// outputs under config.output_dir. On failure the staged files move to
/// output_dir/quarantine/run-NNN with an error.txt, earlier outputs stay as
/// they were, and the error is rethrown.
PipelineResult run(const RunConfig& config, const Progress& progress = {});

}  // namespace cts::pipeline
