#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeprice/envgen.hpp"
#include "edgeprice/simulation.hpp"

namespace edgeprice {

/// Parsed command line. Unused fields keep their defaults.
struct CliRequest {
    std::string command;  // simulate | envgen | tune | train | evaluate | summarize
    RunMode mode = RunMode::Evaluate;
    std::string input;
    std::string output;
    std::string models;
    std::string scenario;
    std::string topology;
    std::uint64_t seed = 0;
    std::size_t devices = 0;  // 0 keeps the input value
    double minutes = -1.0;    // < 0 keeps the input value
    AgentHyperparams hyper;
    double price_preference = kDefaultPricePreference;
    PricingPolicy policy = PricingPolicy::Agent;
    double fixed_price = 0.5;
    envgen::GenParams generator;
    std::size_t episodes = 0;       // 0: command default
    std::size_t eval_episodes = 0;  // 0: command default
    std::vector<double> lr_grid;
    bool resume = false;
};

/// Bad arguments or a help request; `text` is what to print.
class UsageError : public std::runtime_error {
public:
    UsageError(int exit_code, std::string text)
        : std::runtime_error(text), exit_code_(exit_code), text_(std::move(text)) {}
    int exit_code() const { return exit_code_; }
    const std::string& text() const { return text_; }

private:
    int exit_code_;
    std::string text_;
};

/// Args exclude the program name. Throws UsageError.
CliRequest parse_cli(const std::vector<std::string>& args);

/// Parses and runs; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgeprice
