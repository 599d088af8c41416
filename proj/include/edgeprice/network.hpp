#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgeprice/domain.hpp"

namespace edgeprice {

using LinkId = std::size_t;
using TransferId = std::uint64_t;

inline constexpr double kBitsPerMegabit = 1e6;

struct Link {
    VertexId a = 0;
    VertexId b = 0;
    double bandwidth_mbps = 0.0;
    double latency = 0.0;  // seconds
    std::set<TransferId> active;

    VertexId other(VertexId v) const { return v == a ? b : a; }
};

enum class VertexKind { AccessPoint, Server };

struct Vertex {
    std::string name;
    Location location;
    VertexKind kind = VertexKind::AccessPoint;
};

struct Route {
    std::vector<VertexId> vertices;  // src ... dst
    std::vector<LinkId> links;
    double propagation = 0.0;  // seconds
};

/// Metro-area network of APs and servers joined by wired links.
class ManGraph {
public:
    VertexId add_vertex(Vertex v);
    LinkId add_link(VertexId a, VertexId b, double bandwidth_mbps, double latency);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t link_count() const { return links_.size(); }
    const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const Link& link(LinkId l) const { return links_.at(l); }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<std::pair<VertexId, LinkId>>& neighbors(VertexId v) const { return adjacency_.at(v); }
    std::size_t degree(VertexId v) const { return adjacency_.at(v).size(); }
    bool is_connected() const;

    /// Minimum-latency path. Ties go to fewer hops, then to the
    /// lexicographically smallest vertex sequence. Throws std::runtime_error
    /// if `dst` is unreachable.
    Route route(VertexId src, VertexId dst) const;

private:
    friend class Network;
    struct DistanceField {
        std::vector<double> latency;
        std::vector<std::size_t> hops;
    };
    const DistanceField& field_to(VertexId dst) const;

    std::vector<Vertex> vertices_;
    std::vector<Link> links_;
    std::vector<std::vector<std::pair<VertexId, LinkId>>> adjacency_;
    mutable std::unordered_map<VertexId, DistanceField> fields_;
};

enum class TransferDirection { UploadInput, DownloadResult };

struct Transfer {
    TransferId id = 0;
    TaskId task = 0;
    TransferDirection direction = TransferDirection::UploadInput;
    std::vector<LinkId> path;
    double total_bits = 0.0;
    double remaining = 0.0;  // bits, as of last_update
    double rate = 0.0;       // bits per second granted for the current tick
    double started = 0.0;
    double last_update = 0.0;
    double propagation = 0.0;
};

struct TransferCompletion {
    TransferId id = 0;
    TaskId task = 0;
    double time = 0.0;  // last bit sent; propagation not included
    double propagation = 0.0;
};

/// Tick-based fair-share transfer model over the MAN plus one shared Wi-Fi
/// access link per AP.
///
/// A transfer's rate is the minimum over its links of bandwidth divided by
/// the number of transfers on that link. Rates are fixed between ticks. When
/// a transfer can finish before the next tick its completion time is
/// committed and its links are released immediately.
class Network {
public:
    Network(ManGraph graph, double wifi_bandwidth_mbps, double wifi_latency);

    const ManGraph& graph() const { return graph_; }

    LinkId wifi_link(VertexId ap) const;
    double wifi_bandwidth_mbps() const { return wifi_bandwidth_; }
    double wifi_latency() const { return wifi_latency_; }

    /// Device at `ap` to `dst`: Wi-Fi hop then MAN route.
    Route device_route(VertexId ap, VertexId dst) const;
    double device_propagation(VertexId ap, VertexId dst) const;

    /// Starts a transfer at `now`; `tick_end` is the next network tick.
    TransferId start(double now, double tick_end, TaskId task, TransferDirection dir, const Route& route,
                     double bits, std::vector<TransferCompletion>& completed);

    /// Settles progress to `now`, recomputes rates and commits transfers that
    /// finish before now + dt.
    std::vector<TransferCompletion> tick(double now, double dt);

    /// Moves an in-flight transfer onto `route`, keeping its remaining bits.
    /// Returns false if the transfer already completed.
    bool reroute(TransferId id, double now, double tick_end, const Route& route,
                 std::vector<TransferCompletion>& completed);

    bool in_flight(TransferId id) const { return transfers_.count(id) > 0; }
    const Transfer& transfer(TransferId id) const { return transfers_.at(id); }
    std::size_t active_count() const { return transfers_.size(); }
    std::size_t active_on_link(LinkId l) const { return link_ref(l).active.size(); }
    const Link& link_ref(LinkId l) const;

    /// Nominal Wi-Fi rate split over the transfers active on the AP link (min 1), in bits/s.
    double wifi_rate_estimate(VertexId ap) const;

private:
    Link& link_mut(LinkId l);
    double fair_rate(const std::vector<LinkId>& path) const;
    void attach(Transfer& t);
    void detach(const Transfer& t);
    bool try_commit(Transfer& t, double now, double tick_end, std::vector<TransferCompletion>& completed);

    ManGraph graph_;
    double wifi_bandwidth_;
    double wifi_latency_;
    std::vector<Link> wifi_links_;
    std::vector<std::optional<LinkId>> wifi_of_vertex_;
    std::map<TransferId, Transfer> transfers_;
    TransferId next_id_ = 0;
};

}  // namespace edgeprice
