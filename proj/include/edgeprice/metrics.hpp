#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgeprice/domain.hpp"

namespace edgeprice {

/// One row of tasks.csv.
struct TaskLogRow {
    TaskId id = 0;
    DeviceIndex device = 0;
    std::string application;
    double creation_time = 0.0;
    double length_mi = 0.0;
    double input_bits = 0.0;
    double output_bits = 0.0;
    double container_bits = 0.0;
    double max_delay = 0.0;
    bool offloaded = false;
    std::string agent;                   // pricing agent charged; empty for local
    std::optional<double> decision_slot;  // slot index of the accepted price
    std::optional<double> price;
    std::string destination;  // executing server, "local", or empty if never reached
    bool rejected = false;
    TaskStatus status = TaskStatus::Created;
    std::optional<double> offload_start;
    std::optional<double> arrival_time;
    std::optional<double> exec_start;
    std::optional<double> exec_end;
    std::optional<double> download_start;
    std::optional<double> delivery_time;
    std::optional<double> finish_time;
};

std::vector<std::string> task_log_header();
std::vector<std::string> task_log_cells(const TaskLogRow& row);
std::vector<TaskLogRow> read_task_log(const std::filesystem::path& path);

std::optional<TaskStatus> parse_task_status(std::string_view text);

class ConservationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunSummary {
    std::size_t generated = 0;
    std::size_t offloaded = 0;
    std::size_t local_success = 0;
    std::size_t local_failed = 0;
    std::size_t edge_success = 0;
    std::size_t edge_failed = 0;
    std::size_t unfinished = 0;
    std::size_t failed_latency = 0;
    std::size_t failed_energy = 0;
    std::size_t failed_device_dead = 0;
    std::size_t rejected = 0;

    double offloaded_percent = 0.0;
    std::optional<double> edge_success_percent;   // over finished offloaded tasks
    std::optional<double> local_success_percent;  // over finished local tasks
    std::optional<double> avg_network_time;       // seconds, over delivered offloads

    // Filled by the engine; not derivable from the task log.
    double total_return = 0.0;
    double server_energy = 0.0;  // J
    double device_energy = 0.0;  // J
    double mean_cpu_utilization = 0.0;  // percent, mean over servers
    std::size_t dead_devices = 0;
    std::size_t price_updates = 0;

    double total_energy() const { return server_energy + device_energy; }

    /// Metric name/value pairs in summary.csv order; empty values are
    /// undefined metrics.
    std::vector<std::pair<std::string, std::optional<double>>> metrics() const;
};

/// Task metrics from the log. Throws ConservationError if the rows do not
/// reconcile (or differ from `expected_generated` when given).
RunSummary summarize(const std::vector<TaskLogRow>& rows, std::optional<std::size_t> expected_generated = {});

struct Aggregate {
    double mean = 0.0;
    double half_width = 0.0;  // 95% Student-t
    std::size_t n = 0;
    bool degenerate = false;  // n == 1
};

/// Throws std::invalid_argument when `values` is empty.
Aggregate aggregate(const std::vector<double>& values);

/// Writes summary.csv (metric,value).
void write_summary(const RunSummary& summary, const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& extra = {});

/// metric -> value from a summary.csv; empty cells are dropped.
std::vector<std::pair<std::string, double>> read_summary(const std::filesystem::path& path);

/// Aggregates the listed summary files metric by metric into
/// aggregate.csv (metric,mean,half_width,n,degenerate).
void write_aggregate(const std::vector<std::filesystem::path>& summaries, const std::filesystem::path& path);

}  // namespace edgeprice
