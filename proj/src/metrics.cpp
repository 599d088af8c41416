#include "edgeprice/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "edgeprice/csv.hpp"

namespace edgeprice {

std::vector<std::string> task_log_header() {
    return {"task_id",      "device",        "application",   "creation_time", "length_mi",  "input_bits",
            "output_bits",  "container_bits", "max_delay",    "offloaded",     "agent",      "decision_slot",
            "price",        "destination",   "rejected",      "status",        "offload_start", "arrival_time",
            "exec_start",   "exec_end",      "download_start", "delivery_time", "finish_time"};
}

std::vector<std::string> task_log_cells(const TaskLogRow& r) {
    return {std::to_string(r.id),
            std::to_string(r.device),
            r.application,
            format_number(r.creation_time),
            format_number(r.length_mi),
            format_number(r.input_bits),
            format_number(r.output_bits),
            format_number(r.container_bits),
            format_number(r.max_delay),
            r.offloaded ? "1" : "0",
            r.agent,
            format_optional(r.decision_slot),
            format_optional(r.price),
            r.destination,
            r.rejected ? "1" : "0",
            std::string(to_string(r.status)),
            format_optional(r.offload_start),
            format_optional(r.arrival_time),
            format_optional(r.exec_start),
            format_optional(r.exec_end),
            format_optional(r.download_start),
            format_optional(r.delivery_time),
            format_optional(r.finish_time)};
}

std::optional<TaskStatus> parse_task_status(std::string_view text) {
    for (auto s : {TaskStatus::Created, TaskStatus::Queued, TaskStatus::Executing, TaskStatus::DoneSuccess,
                   TaskStatus::FailedLatency, TaskStatus::FailedEnergy, TaskStatus::FailedDeviceDead}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::vector<TaskLogRow> read_task_log(const std::filesystem::path& path) {
    CsvTable t = CsvTable::read(path);
    std::vector<TaskLogRow> rows;
    rows.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        TaskLogRow r;
        r.id = static_cast<TaskId>(t.number(i, "task_id"));
        r.device = static_cast<DeviceIndex>(t.number(i, "device"));
        r.application = t.text(i, "application");
        r.creation_time = t.number(i, "creation_time");
        r.length_mi = t.number(i, "length_mi");
        r.input_bits = t.number(i, "input_bits");
        r.output_bits = t.number(i, "output_bits");
        r.container_bits = t.number(i, "container_bits");
        r.max_delay = t.number(i, "max_delay");
        r.offloaded = t.text(i, "offloaded") == "1";
        r.agent = t.text(i, "agent");
        r.decision_slot = t.optional_number(i, "decision_slot");
        r.price = t.optional_number(i, "price");
        r.destination = t.text(i, "destination");
        r.rejected = t.text(i, "rejected") == "1";
        auto status = parse_task_status(t.text(i, "status"));
        if (!status) throw std::runtime_error(path.string() + ": unknown status '" + t.text(i, "status") + "'");
        r.status = *status;
        r.offload_start = t.optional_number(i, "offload_start");
        r.arrival_time = t.optional_number(i, "arrival_time");
        r.exec_start = t.optional_number(i, "exec_start");
        r.exec_end = t.optional_number(i, "exec_end");
        r.download_start = t.optional_number(i, "download_start");
        r.delivery_time = t.optional_number(i, "delivery_time");
        r.finish_time = t.optional_number(i, "finish_time");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::pair<std::string, std::optional<double>>> RunSummary::metrics() const {
    auto d = [](std::size_t v) { return std::optional<double>(static_cast<double>(v)); };
    return {{"tasks_generated", d(generated)},
            {"tasks_offloaded", d(offloaded)},
            {"offloaded_percent", offloaded_percent},
            {"edge_success_percent", edge_success_percent},
            {"local_success_percent", local_success_percent},
            {"avg_network_time", avg_network_time},
            {"total_return", total_return},
            {"total_energy", total_energy()},
            {"server_energy", server_energy},
            {"device_energy", device_energy},
            {"mean_cpu_utilization", mean_cpu_utilization},
            {"local_success", d(local_success)},
            {"local_failed", d(local_failed)},
            {"edge_success", d(edge_success)},
            {"edge_failed", d(edge_failed)},
            {"unfinished", d(unfinished)},
            {"failed_latency", d(failed_latency)},
            {"failed_energy", d(failed_energy)},
            {"failed_device_dead", d(failed_device_dead)},
            {"rejected", d(rejected)},
            {"dead_devices", d(dead_devices)},
            {"price_updates", d(price_updates)}};
}

RunSummary summarize(const std::vector<TaskLogRow>& rows, std::optional<std::size_t> expected_generated) {
    RunSummary s;
    s.generated = rows.size();
    double network_time = 0.0;
    std::size_t delivered = 0;
    for (const auto& r : rows) {
        if (r.offloaded) ++s.offloaded;
        if (r.rejected) ++s.rejected;
        if (!is_terminal(r.status)) {
            ++s.unfinished;
            continue;
        }
        if (!r.finish_time || *r.finish_time < r.creation_time) {
            throw ConservationError("task " + std::to_string(r.id) + " finished without a valid finish time");
        }
        bool ok = r.status == TaskStatus::DoneSuccess;
        if (r.offloaded) {
            ok ? ++s.edge_success : ++s.edge_failed;
        } else {
            ok ? ++s.local_success : ++s.local_failed;
        }
        switch (r.status) {
            case TaskStatus::FailedLatency: ++s.failed_latency; break;
            case TaskStatus::FailedEnergy: ++s.failed_energy; break;
            case TaskStatus::FailedDeviceDead: ++s.failed_device_dead; break;
            default: break;
        }
        if (r.offloaded && r.delivery_time && r.offload_start && r.arrival_time && r.download_start) {
            network_time += (*r.arrival_time - *r.offload_start) + (*r.delivery_time - *r.download_start);
            ++delivered;
        }
    }
    std::size_t accounted = s.local_success + s.local_failed + s.edge_success + s.edge_failed + s.unfinished;
    if (accounted != s.generated) {
        throw ConservationError("conservation violated: " + std::to_string(s.generated) + " generated, " +
                                std::to_string(accounted) + " accounted for");
    }
    if (expected_generated && *expected_generated != s.generated) {
        throw ConservationError("conservation violated: engine generated " + std::to_string(*expected_generated) +
                                " tasks, log holds " + std::to_string(s.generated));
    }
    if (s.generated > 0) s.offloaded_percent = 100.0 * static_cast<double>(s.offloaded) / static_cast<double>(s.generated);
    std::size_t edge_done = s.edge_success + s.edge_failed;
    std::size_t local_done = s.local_success + s.local_failed;
    if (edge_done > 0) s.edge_success_percent = 100.0 * static_cast<double>(s.edge_success) / static_cast<double>(edge_done);
    if (local_done > 0) {
        s.local_success_percent = 100.0 * static_cast<double>(s.local_success) / static_cast<double>(local_done);
    }
    if (delivered > 0) s.avg_network_time = network_time / static_cast<double>(delivered);
    return s;
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate: no values");
    Aggregate a;
    a.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(a.n);
    if (a.n == 1) {
        a.degenerate = true;
        return a;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    double sd = std::sqrt(ss / static_cast<double>(a.n - 1));
    boost::math::students_t dist(static_cast<double>(a.n - 1));
    double t = boost::math::quantile(dist, 0.975);
    a.half_width = t * sd / std::sqrt(static_cast<double>(a.n));
    return a;
}

void write_summary(const RunSummary& summary, const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& extra) {
    CsvWriter out(path, {"metric", "value"});
    for (const auto& [name, value] : summary.metrics()) out.row({name, format_optional(value)});
    for (const auto& [name, value] : extra) out.row({name, value});
}

std::vector<std::pair<std::string, double>> read_summary(const std::filesystem::path& path) {
    CsvTable t = CsvTable::read(path);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& v = t.text(i, "value");
        if (v.empty()) continue;
        try {
            out.emplace_back(t.text(i, "metric"), parse_number(v));
        } catch (const std::invalid_argument&) {
            // non-numeric annotations (e.g. trace hashes) are not aggregated
        }
    }
    return out;
}

void write_aggregate(const std::vector<std::filesystem::path>& summaries, const std::filesystem::path& path) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
    for (const auto& file : summaries) {
        for (const auto& [metric, v] : read_summary(file)) {
            auto [it, inserted] = values.try_emplace(metric);
            if (inserted) order.push_back(metric);
            it->second.push_back(v);
        }
    }
    CsvWriter out(path, {"metric", "mean", "half_width", "n", "degenerate"});
    for (const auto& metric : order) {
        Aggregate a = aggregate(values[metric]);
        out.row({metric, format_number(a.mean), format_number(a.half_width), std::to_string(a.n),
                 a.degenerate ? "1" : "0"});
    }
}

}  // namespace edgeprice
