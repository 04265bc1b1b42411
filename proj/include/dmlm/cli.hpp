#pragma once

#include "dmlm/mcmc.hpp"
#include "dmlm/simulation.hpp"
#include "dmlm/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dmlm::cli {

namespace fs = std::filesystem;

// Exit codes shared by every command.
constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct SimulateOptions {
  fs::path out;
  SimConfig sim;
  int replicates = 1;
  int jobs = 1;
};

struct FitOptions {
  fs::path data;  // a replicate directory, or a directory of rep_* replicates
  fs::path out;
  std::string model = "joint";  // joint | dmlm-bayes
  Hyperparams hyper;
  SamplerConfig sampler;
  fs::path partition;  // optional partition file; pivot when empty
  std::vector<double> sweep_b0;
  int jobs = 1;
  bool quiet = false;
};

struct PredictOptions {
  fs::path run;   // a fitted replicate directory
  fs::path test;  // directory holding Z.csv, X.csv and optionally Y.csv
  fs::path out;
};

struct EvaluateOptions {
  std::vector<fs::path> runs;  // searched recursively for fitted replicates
  fs::path truth;              // overrides the truth recorded at fit time
  fs::path out;
  std::vector<double> sweep_b0;
};

int cmd_simulate(const SimulateOptions& opts);
int cmd_fit(const FitOptions& opts);
int cmd_predict(const PredictOptions& opts);
int cmd_evaluate(const EvaluateOptions& opts);

/// Parses argv and dispatches to a command; returns the process exit code.
int run(int argc, char** argv);

}  // namespace dmlm::cli
