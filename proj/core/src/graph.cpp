#include "cdpg/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace cdpg {

namespace {

void check_vertex_range(const std::vector<Edge>& edges, int n, const std::string& what) {
    for (const auto& e : edges) {
        if (e.a < 1 || e.b > n)
            throw ValidationError(what + ": edge (" + std::to_string(e.a) + "," +
                                  std::to_string(e.b) + ") out of vertex range 1.." +
                                  std::to_string(n));
        if (e.a == e.b)
            throw ValidationError(what + ": self-loop at vertex " + std::to_string(e.a));
    }
}

bool connected(int n, const std::vector<Edge>& edges) {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n + 1);
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<char> seen(n + 1, 0);
    std::queue<int> q;
    q.push(1);
    seen[1] = 1;
    int count = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : adj[v])
            if (!seen[u]) {
                seen[u] = 1;
                ++count;
                q.push(u);
            }
    }
    return count == n;
}

}  // namespace

std::vector<Edge> order_edges(std::vector<Edge> edges) {
    for (const auto& e : edges)
        if (e.a == e.b)
            throw ValidationError("order_edges: self-loop at vertex " + std::to_string(e.a));
    std::sort(edges.begin(), edges.end());
    if (auto it = std::adjacent_find(edges.begin(), edges.end()); it != edges.end())
        throw ValidationError("order_edges: duplicate edge (" + std::to_string(it->a) + "," +
                              std::to_string(it->b) + ")");
    return edges;
}

Eigen::MatrixXi laplacian(int n, const std::vector<Edge>& edges) {
    check_vertex_range(edges, n, "laplacian");
    Eigen::MatrixXi L = Eigen::MatrixXi::Zero(n, n);
    for (const auto& e : edges) {
        L(e.a - 1, e.a - 1) += 1;
        L(e.b - 1, e.b - 1) += 1;
        L(e.a - 1, e.b - 1) -= 1;
        L(e.b - 1, e.a - 1) -= 1;
    }
    return L;
}

Eigen::MatrixXi incidence(int n, const std::vector<Edge>& ordered_edges) {
    check_vertex_range(ordered_edges, n, "incidence");
    if (!std::is_sorted(ordered_edges.begin(), ordered_edges.end()))
        throw ValidationError("incidence: edge list is not in canonical order");
    Eigen::MatrixXi G = Eigen::MatrixXi::Zero(n, static_cast<int>(ordered_edges.size()));
    for (int k = 0; k < static_cast<int>(ordered_edges.size()); ++k) {
        G(ordered_edges[k].a - 1, k) = -1;  // smaller endpoint
        G(ordered_edges[k].b - 1, k) = 1;   // larger endpoint
    }
    return G;
}

ClusterGraph::ClusterGraph(int id, int n, std::vector<Edge> e)
    : cluster_id(id), n_agents(n), edges(order_edges(std::move(e))) {
    if (id < 1) throw ValidationError("cluster id must be >= 1");
    if (n < 1) throw ValidationError("cluster must have at least one agent");
    check_vertex_range(edges, n, "cluster " + std::to_string(id));
    if (n >= 2 && !connected(n, edges))
        throw ValidationError("cluster " + std::to_string(id) + " is not connected");
}

MultiClusterNetwork::MultiClusterNetwork(std::vector<ClusterGraph> clusters,
                                         std::vector<Edge> global_edges)
    : clusters_(std::move(clusters)), global_edges_(order_edges(std::move(global_edges))) {
    if (clusters_.empty()) throw ValidationError("network needs at least one cluster");
    offsets_.assign(1, 0);
    for (const auto& c : clusters_) offsets_.push_back(offsets_.back() + c.n_agents);
    const int n = total_agents();
    check_vertex_range(global_edges_, n, "global graph");
    if (!connected(n, global_edges_))
        throw ValidationError("global graph is not connected");
}

int MultiClusterNetwork::relabel(int cluster, int agent) const {
    if (cluster < 1 || cluster > n_clusters())
        throw InvalidIndexError("relabel: cluster index " + std::to_string(cluster) +
                                " out of range");
    if (agent < 1 || agent > clusters_[cluster - 1].n_agents)
        throw InvalidIndexError("relabel: agent index " + std::to_string(agent) +
                                " out of range in cluster " + std::to_string(cluster));
    return offsets_[cluster - 1] + agent;
}

std::pair<int, int> MultiClusterNetwork::unlabel(int k) const {
    if (k < 1 || k > total_agents())
        throw InvalidIndexError("unlabel: global index " + std::to_string(k) + " out of range");
    int i = 1;
    while (offsets_[i] < k) ++i;
    return {i, k - offsets_[i - 1]};
}

NeighborSets MultiClusterNetwork::neighbor_sets() const {
    NeighborSets out;
    out.per_agent.resize(total_agents());
    for (int i = 1; i <= n_clusters(); ++i) {
        const auto& c = clusters_[i - 1];
        for (const auto& e : c.edges) {
            out.per_agent[relabel(i, e.a) - 1].intra_above.push_back(e.b);
            out.per_agent[relabel(i, e.b) - 1].intra_below.push_back(e.a);
        }
    }
    for (const auto& e : global_edges_) {
        out.per_agent[e.a - 1].global_above.push_back(e.b);
        out.per_agent[e.b - 1].global_below.push_back(e.a);
    }
    // Canonical edge order already sorts each list ascending.
    return out;
}

}  // namespace cdpg
