#pragma once

#include "dmlm/mcmc.hpp"
#include "dmlm/partition.hpp"
#include "dmlm/types.hpp"

namespace dmlm {

/// Two-step comparator: covariate selection on the counts alone, then
/// balance selection on balances frozen at the posterior-mean composition.
struct TwoStepOutput {
  ChainOutput stage1;  // dm_only
  Matrix psi_bar;      // N x J, entrywise mean of the stage-1 compositions
  ChainOutput stage2;  // lm_only, psi holds psi_bar
};

/// The count model alone; Y is ignored.
ChainOutput run_dm_only(const Dataset& data, const Hyperparams& hyper, const SamplerConfig& config);

/// Add/delete sampler over xi against the collapsed marginal of Y with B held fixed.
ChainOutput run_lm_balance_selection(const Matrix& B_fixed, const Vector& Y, const Hyperparams& hyper,
                                     const SamplerConfig& config);

/// Mean of the retained compositions of a count-model chain.
Matrix posterior_mean_psi(const ChainOutput& chain);

/// Runs both stages. Stage 2 reuses config with mode lm_only and a seed
/// derived from config.seed.
TwoStepOutput run_two_step(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                           const SamplerConfig& config);

/// Held-out predictions: test compositions from stage 1, selections and
/// training balances from stage 2.
Vector predict_two_step(const TwoStepOutput& fit, const Dataset& train, const TestSet& test,
                        const PartitionSpec& spec, const Hyperparams& hyper);

}  // namespace dmlm
