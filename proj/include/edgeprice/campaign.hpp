#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "edgeprice/simulation.hpp"

namespace edgeprice {

struct CampaignOptions {
    std::filesystem::path output;  // campaign root
    std::filesystem::path models;  // model root
    std::string scenario_name;
    std::uint64_t seed = 0;
    AgentHyperparams hyper;
    double price_preference = kDefaultPricePreference;
    std::size_t train_episodes = 100;
    std::size_t eval_episodes = 5;
    std::size_t snapshot_every = 20;
    std::size_t tune_train_episodes = 10;
    std::size_t tune_eval_episodes = 5;
    std::vector<double> actor_lrs{5e-4, 1e-3, 5e-3};
    std::vector<double> critic_lrs{5e-4, 1e-3, 5e-3};
    /// Continue from saved models instead of fresh agents.
    bool resume = false;
    /// Progress callback (episode description); may be empty.
    std::function<void(const std::string&)> progress;
};

/// Seed of training episode `index` (derive_seed("episode", index)).
std::uint64_t training_seed(std::uint64_t master, std::size_t index);
/// Seed of evaluation episode `index` (derive_seed("evaluation", index)).
std::uint64_t evaluation_seed(std::uint64_t master, std::size_t index);

/// "<episode>" directory name, zero padded.
std::string episode_dir(std::size_t index);

/// Trains for train_episodes, saving models after every episode.
/// Writes <output>/train/{episode_NNN/, episodes.csv, progress.csv,
/// snapshots/progress_NNN.csv}.
void run_training(const Scenario& scenario, const CampaignOptions& options);

/// Evaluates trained models over eval_episodes seeds. Writes
/// <output>/evaluate/{episode_NNN/, episodes.csv, aggregate.csv}.
void run_evaluation(const Scenario& scenario, const CampaignOptions& options);

/// Actor x critic learning-rate grid; each combination trains
/// tune_train_episodes and evaluates tune_eval_episodes under
/// <output>/tune/<combo>/. Writes <output>/tune/results.csv.
void run_tuning(const Scenario& scenario, const CampaignOptions& options);

std::string combo_name(double actor_lr, double critic_lr);

}  // namespace edgeprice
