#include "edgeprice/envgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace edgeprice::envgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Edge ordered(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::vector<std::vector<std::size_t>> adjacency(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : edges) {
        adj.at(a).push_back(b);
        adj.at(b).push_back(a);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

}  // namespace

void GenParams::validate() const {
    if (!(side > 0.0)) throw std::invalid_argument("envgen: side must be > 0");
    if (!(coverage > 0.0)) throw std::invalid_argument("envgen: coverage must be > 0");
    if (twst_weight < 0.0 || twst_weight > 1.0) throw std::invalid_argument("envgen: twst weight must be in [0, 1]");
    for (double w : link_weights) {
        if (w < 0.0) throw std::invalid_argument("envgen: link weights must be >= 0");
    }
    if (server_count < 1) throw std::invalid_argument("envgen: need at least one server");
    if (cluster_count < 1 || cluster_count > server_count) {
        throw std::invalid_argument("envgen: need 1 <= clusters <= servers");
    }
    server_spec.validate();
}

std::vector<Location> place_aps(double side, double coverage) {
    const double dx = 1.5 * coverage;
    const double dy = std::sqrt(3.0) * coverage;
    std::vector<Location> centers;
    for (std::size_t col = 0; static_cast<double>(col) * dx <= side; ++col) {
        double offset = (col % 2 == 1) ? dy / 2.0 : 0.0;
        for (std::size_t row = 0; static_cast<double>(row) * dy + offset <= side; ++row) {
            centers.push_back(Location{static_cast<double>(col) * dx, static_cast<double>(row) * dy + offset});
        }
    }
    std::stable_sort(centers.begin(), centers.end(), [](Location a, Location b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return centers;
}

std::vector<Edge> build_twst(const std::vector<Location>& points, double weight) {
    const std::size_t n = points.size();
    std::vector<Edge> edges;
    if (n < 2) return edges;

    Location centroid{0.0, 0.0};
    for (auto p : points) {
        centroid.x += p.x / static_cast<double>(n);
        centroid.y += p.y / static_cast<double>(n);
    }
    std::size_t root = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (distance(points[i], centroid) < distance(points[root], centroid)) root = i;
    }

    std::vector<bool> in_tree(n, false);
    std::vector<std::size_t> degree(n, 0);
    std::vector<std::size_t> tree{root};
    in_tree[root] = true;
    std::size_t hub = root;

    while (tree.size() < n) {
        double best = kInf;
        std::size_t best_u = 0, best_v = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            for (std::size_t u : tree) {
                double cost = weight * distance(points[u], points[v]) + (1.0 - weight) * distance(points[u], points[hub]);
                if (cost < best || (cost == best && (v < best_v || (v == best_v && u < best_u)))) {
                    best = cost;
                    best_u = u;
                    best_v = v;
                }
            }
        }
        edges.push_back(ordered(best_u, best_v));
        in_tree[best_v] = true;
        tree.push_back(best_v);
        ++degree[best_u];
        ++degree[best_v];
        for (std::size_t u : tree) {
            if (degree[u] > degree[hub] || (degree[u] == degree[hub] && u < hub)) hub = u;
        }
    }
    return edges;
}

std::vector<Edge> add_links(const std::vector<Location>& points, std::vector<Edge> edges,
                            const std::array<double, 3>& weights, std::size_t budget, RngStream& rng) {
    const std::size_t n = points.size();
    std::set<Edge> present(edges.begin(), edges.end());
    std::vector<std::size_t> degree(n, 0);
    for (auto [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    const bool uniform = weights[0] == 0.0 && weights[1] == 0.0 && weights[2] == 0.0;

    for (std::size_t added = 0; added < budget; ++added) {
        std::vector<Edge> candidates;
        std::vector<double> cumulative;
        double total = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                if (present.count(Edge{u, v})) continue;
                double w = 1.0;
                if (!uniform) {
                    double d = std::max(distance(points[u], points[v]), 1e-9);
                    w = weights[0] / d + weights[1] * static_cast<double>(degree[u] * degree[v]) + weights[2];
                }
                total += w;
                candidates.push_back(Edge{u, v});
                cumulative.push_back(total);
            }
        }
        if (candidates.empty()) break;
        std::size_t pick;
        if (total > 0.0) {
            double r = rng.uniform01() * total;
            pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
            pick = std::min(pick, candidates.size() - 1);
        } else {
            pick = static_cast<std::size_t>(rng.below(candidates.size()));
        }
        Edge e = candidates[pick];
        present.insert(e);
        edges.push_back(e);
        ++degree[e.first];
        ++degree[e.second];
    }
    return edges;
}

std::vector<std::size_t> place_servers(std::size_t vertex_count, const std::vector<Edge>& edges,
                                       std::size_t server_count, RngStream& rng) {
    if (server_count > vertex_count) throw std::invalid_argument("more servers than access points");
    std::vector<double> weight(vertex_count, 0.0);
    for (auto [a, b] : edges) {
        weight[a] += 1.0;
        weight[b] += 1.0;
    }
    std::vector<bool> taken(vertex_count, false);
    std::vector<std::size_t> hosts;
    for (std::size_t k = 0; k < server_count; ++k) {
        double total = 0.0;
        for (std::size_t v = 0; v < vertex_count; ++v) {
            if (!taken[v]) total += weight[v];
        }
        std::size_t chosen = vertex_count;
        if (total > 0.0) {
            double r = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t v = 0; v < vertex_count; ++v) {
                if (taken[v] || weight[v] == 0.0) continue;
                acc += weight[v];
                chosen = v;
                if (r < acc) break;
            }
        } else {
            std::size_t r = static_cast<std::size_t>(rng.below(vertex_count - k));
            for (std::size_t v = 0; v < vertex_count; ++v) {
                if (taken[v]) continue;
                if (r == 0) {
                    chosen = v;
                    break;
                }
                --r;
            }
        }
        taken[chosen] = true;
        hosts.push_back(chosen);
    }
    return hosts;
}

std::vector<double> betweenness(std::size_t n, const std::vector<Edge>& edges) {
    auto adj = adjacency(n, edges);
    std::vector<double> cb(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> order;
        std::vector<std::vector<std::size_t>> preds(n);
        std::vector<double> sigma(n, 0.0);
        std::vector<long> dist(n, -1);
        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            std::size_t v = q.front();
            q.pop();
            order.push_back(v);
            for (std::size_t w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        std::vector<double> delta(n, 0.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            std::size_t w = *it;
            for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) cb[w] += delta[w];
        }
    }
    for (double& c : cb) c /= 2.0;
    return cb;
}

std::vector<std::vector<double>> server_distances(const std::vector<Location>& points,
                                                  const std::vector<Edge>& edges,
                                                  const std::vector<std::size_t>& hosts) {
    const std::size_t n = points.size();
    auto adj = adjacency(n, edges);
    std::vector<std::vector<double>> out(hosts.size(), std::vector<double>(hosts.size(), 0.0));
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        std::vector<double> dist(n, kInf);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[hosts[i]] = 0.0;
        pq.emplace(0.0, hosts[i]);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            for (std::size_t v : adj[u]) {
                double nd = d + distance(points[u], points[v]);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        for (std::size_t j = 0; j < hosts.size(); ++j) {
            if (dist[hosts[j]] == kInf) throw std::runtime_error("server hosts are not connected in the MAN");
            out[i][j] = dist[hosts[j]];
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> average_linkage(const std::vector<std::vector<double>>& dist, std::size_t k) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < dist.size(); ++i) clusters.push_back({i});
    if (k < 1) throw std::invalid_argument("cluster count must be >= 1");

    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double sum = 0.0;
        for (std::size_t x : a) {
            for (std::size_t y : b) sum += dist[x][y];
        }
        return sum / static_cast<double>(a.size() * b.size());
    };

    while (clusters.size() > k) {
        double best = kInf;
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double d = linkage(clusters[i], clusters[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        std::sort(clusters[bi].begin(), clusters[bi].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return clusters;
}

ClusterAssignment cluster_servers(const std::vector<Location>& points, const std::vector<Edge>& edges,
                                  const std::vector<std::size_t>& hosts, std::size_t k) {
    if (k < 1 || k > hosts.size()) throw std::invalid_argument("need 1 <= clusters <= servers");
    auto dist = server_distances(points, edges, hosts);
    auto groups = average_linkage(dist, k);

    // One leaf per server hanging off its host, as in the emitted MAN.
    std::vector<Edge> full = edges;
    for (std::size_t s = 0; s < hosts.size(); ++s) full.push_back(ordered(hosts[s], points.size() + s));
    auto centrality = betweenness(points.size() + hosts.size(), full);

    ClusterAssignment out;
    out.cluster_count = groups.size();
    out.cluster_of.assign(hosts.size(), 0);
    out.is_head.assign(hosts.size(), false);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        std::size_t head = groups[c].front();
        for (std::size_t s : groups[c]) {
            out.cluster_of[s] = c;
            if (centrality[hosts[s]] > centrality[hosts[head]]) head = s;
        }
        out.is_head[head] = true;
    }
    return out;
}

DatacentersFile generate(const GenParams& params) {
    params.validate();
    SeedManager seeds(params.seed);
    auto aps = place_aps(params.side, params.coverage);
    if (params.server_count > aps.size()) throw std::invalid_argument("envgen: more servers than access points");
    auto edges = build_twst(aps, params.twst_weight);
    auto link_rng = seeds.derive_stream("envgen-links", 0);
    edges = add_links(aps, edges, params.link_weights, params.extra_edges, link_rng);
    auto place_rng = seeds.derive_stream("envgen-servers", 0);
    auto hosts = place_servers(aps.size(), edges, params.server_count, place_rng);
    auto clusters = cluster_servers(aps, edges, hosts, params.cluster_count);

    DatacentersFile file;
    for (std::size_t s = 0; s < hosts.size(); ++s) {
        DatacenterEntry e;
        e.name = "dc" + std::to_string(s);
        e.location = aps[hosts[s]];
        e.cluster = static_cast<int>(clusters.cluster_of[s]);
        e.cluster_head = clusters.is_head[s];
        e.spec = params.server_spec;
        file.nodes.push_back(e);
    }
    for (std::size_t a = 0; a < aps.size(); ++a) {
        DatacenterEntry e;
        e.name = "ap" + std::to_string(a);
        e.location = aps[a];
        file.nodes.push_back(e);
    }
    std::vector<Edge> sorted_edges = edges;
    std::sort(sorted_edges.begin(), sorted_edges.end());
    for (auto [a, b] : sorted_edges) {
        file.links.push_back(NetworkLinkEntry{"ap" + std::to_string(a), "ap" + std::to_string(b), params.man_latency,
                                              params.man_bandwidth});
    }
    for (std::size_t s = 0; s < hosts.size(); ++s) {
        file.links.push_back(
            NetworkLinkEntry{"dc" + std::to_string(s), "ap" + std::to_string(hosts[s]), 0.0, params.man_bandwidth});
    }
    return file;
}

void emit_datacenters_file(const DatacentersFile& file, const std::filesystem::path& path) {
    write_datacenters_file(file, path);
}

}  // namespace edgeprice::envgen
