#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "edgeprice/config.hpp"
#include "edgeprice/domain.hpp"
#include "edgeprice/rng.hpp"

namespace edgeprice::envgen {

using Edge = std::pair<std::size_t, std::size_t>;  // first < second

struct GenParams {
    double side = 1100.0;
    double coverage = 45.0;
    double twst_weight = 1.0;
    std::array<double, 3> link_weights{1.0, 1.0, 1.0};  // distance, degree product, uniform
    std::size_t extra_edges = 0;
    std::size_t server_count = 20;
    std::size_t cluster_count = 8;
    std::uint64_t seed = 0;
    double man_bandwidth = 1000.0;
    double man_latency = 0.005;
    ServerSpec server_spec{105.0, 185.0, 15, 20000.0, 80000.0, 1280000.0};

    void validate() const;
};

struct ClusterAssignment {
    std::vector<std::size_t> cluster_of;  // per server
    std::vector<bool> is_head;            // per server
    std::size_t cluster_count = 0;
};

/// Flat-top hexagonal cells of circumradius `coverage`. Columns are 1.5 R
/// apart, rows sqrt(3) R apart, odd columns shifted by half a row. The
/// lattice is anchored at the origin and every center inside the closed
/// square is kept; side 1100 with R = 45 gives 247 cells. Row-major order
/// (by y, then x).
std::vector<Location> place_aps(double side, double coverage);

/// Tunable-weight spanning tree, grown from the vertex nearest the centroid.
/// Each step attaches the outside vertex v through the tree vertex u that
/// minimizes  w * |uv| + (1 - w) * |u hub|,  where hub is the current
/// highest-degree tree vertex. w = 1 is Prim's MST; w = 0 grows a star.
/// Ties: lower cost, then lower v, then lower u.
std::vector<Edge> build_twst(const std::vector<Location>& points, double weight);

/// Adds `budget` new edges. Candidate (u, v) is drawn with probability
/// proportional to w1 / |uv| + w2 deg(u) deg(v) + w3; all-zero weights draw
/// uniformly. The graph stays simple.
std::vector<Edge> add_links(const std::vector<Location>& points, std::vector<Edge> edges,
                            const std::array<double, 3>& weights, std::size_t budget, RngStream& rng);

/// Vertices hosting servers, drawn without replacement with probability
/// proportional to degree.
std::vector<std::size_t> place_servers(std::size_t vertex_count, const std::vector<Edge>& edges,
                                       std::size_t server_count, RngStream& rng);

/// Brandes betweenness on hop-count shortest paths (undirected, each
/// unordered pair counted once).
std::vector<double> betweenness(std::size_t vertex_count, const std::vector<Edge>& edges);

/// Shortest-path distances between server hosts, edges weighted by the
/// Euclidean length. Throws std::runtime_error if hosts are disconnected.
std::vector<std::vector<double>> server_distances(const std::vector<Location>& points,
                                                  const std::vector<Edge>& edges,
                                                  const std::vector<std::size_t>& hosts);

/// Average-linkage agglomeration down to `k` clusters; each cluster is a
/// sorted list of item indices, clusters ordered by smallest member.
std::vector<std::vector<std::size_t>> average_linkage(const std::vector<std::vector<double>>& dist, std::size_t k);

/// Clusters servers and elects as head the member whose host has the highest
/// betweenness on the MAN with one leaf per server; ties to the lower id.
ClusterAssignment cluster_servers(const std::vector<Location>& points, const std::vector<Edge>& edges,
                                  const std::vector<std::size_t>& hosts, std::size_t k);

/// Runs the whole pipeline and lays out the datacenter file: servers dc0..
/// first (co-located with their host AP, linked to it with zero latency),
/// then APs ap0...
DatacentersFile generate(const GenParams& params);

void emit_datacenters_file(const DatacentersFile& file, const std::filesystem::path& path);

}  // namespace edgeprice::envgen
