#pragma once

#include "dmlm/mcmc.hpp"
#include "dmlm/prediction.hpp"
#include "dmlm/simulation.hpp"
#include "dmlm/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dmlm::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

// CSV: one header row, comma-delimited, integers verbatim, reals with 17
// significant digits so that a write-read-write cycle is byte-identical.

std::vector<std::string> indexed_header(const std::string& prefix, Eigen::Index count);

void write_csv(const fs::path& path, const Matrix& values, const std::vector<std::string>& header);
void write_csv(const fs::path& path, const IntMatrix& values, const std::vector<std::string>& header);
Matrix read_real_csv(const fs::path& path, std::vector<std::string>* header = nullptr);
IntMatrix read_int_csv(const fs::path& path, std::vector<std::string>* header = nullptr);

/// Single-column files.
void write_vector(const fs::path& path, const Vector& values, const std::string& name);
Vector read_vector(const fs::path& path);

/// Y.csv, Z.csv, X.csv in dir.
void write_dataset(const fs::path& dir, const Dataset& data);
Dataset read_dataset(const fs::path& dir);
void write_test_set(const fs::path& dir, const TestSet& test);
/// Y.csv is optional.
TestSet read_test_set(const fs::path& dir);

void write_truth(const fs::path& dir, const GroundTruth& truth);
GroundTruth read_truth(const fs::path& dir);

/// A simulated replicate: train/, test/, truth/ subdirectories.
void write_replicate(const fs::path& dir, const Replicate& rep);

json to_json(const Hyperparams& hyper);
Hyperparams hyperparams_from_json(const json& j, Hyperparams base = {});
json to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const json& j, SamplerConfig base = {});
json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const json& j, SimConfig base = {});

/// Trace files, MPPIs, median-model selections and summary.json for one chain.
/// Per-sample compositions are not written; the predictor file carries what
/// held-out prediction needs.
void write_chain(const fs::path& dir, const ChainOutput& chain, const Eigen::Index num_taxa,
                 const Eigen::Index num_covariates);

/// Traces read back from write_chain output. phi and zeta are rebuilt from the
/// sparse phi trace; compositions are not restored.
ChainOutput read_chain(const fs::path& dir);

void write_predictor(const fs::path& path, const BalancePredictor& pred);
BalancePredictor read_predictor(const fs::path& path);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

/// Provenance record written once per output directory.
struct RunManifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double seconds = 0.0;

  json to_json() const;
};
void write_manifest(const fs::path& dir, const RunManifest& manifest);

}  // namespace dmlm::io
