#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cdpg {

struct InvalidIndexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Unordered edge between two 1-based vertex indices, stored as (min, max).
struct Edge {
    int a = 0;
    int b = 0;
    Edge() = default;
    Edge(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge& x, const Edge& y) {
        // Total order of the edge-indexing protocol: min endpoint first,
        // ties broken by max endpoint.
        if (auto c = x.a <=> y.a; c != 0) return c;
        return x.b <=> y.b;
    }
};

/// Sorts an edge set into the canonical index order e_1..e_|E|.
/// Rejects self-loops and duplicates. Output is independent of input order.
std::vector<Edge> order_edges(std::vector<Edge> edges);

/// Laplacian of an undirected graph on vertices 1..n (integer entries).
Eigen::MatrixXi laplacian(int n_vertices, const std::vector<Edge>& edges);

/// Vertex-by-edge incidence matrix. Column k of edge (j,l), j<l, holds -1 at
/// row j and +1 at row l. Edges must already be in canonical order.
/// Satisfies incidence * incidence^T == laplacian.
Eigen::MatrixXi incidence(int n_vertices, const std::vector<Edge>& ordered_edges);

/// One cluster G_i: n_i agents with an intra-cluster edge set.
/// Connected whenever n_i >= 2; edges are held in canonical order.
struct ClusterGraph {
    int cluster_id = 0;
    int n_agents = 0;
    std::vector<Edge> edges;

    ClusterGraph(int id, int n, std::vector<Edge> e);

    Eigen::MatrixXi laplacian_matrix() const { return laplacian(n_agents, edges); }
    Eigen::MatrixXi incidence_matrix() const { return incidence(n_agents, edges); }
};

/// Per-agent neighbor index sets. Intra sets hold local (within-cluster)
/// agent indices, global sets hold relabeled indices over the whole network.
/// S holds strictly larger neighbors (edge owner side), S# strictly smaller.
struct AgentNeighbors {
    std::vector<int> intra_above;   // S_ij
    std::vector<int> intra_below;   // S#_ij
    std::vector<int> global_above;  // Sbar_ij
    std::vector<int> global_below;  // Sbar#_ij
};

struct NeighborSets {
    std::vector<AgentNeighbors> per_agent;  // indexed by relabeled agent - 1
};

/// Two-level network: clusters G_i inside the global graph G.
/// Both levels must be connected (validated at construction by BFS).
class MultiClusterNetwork {
  public:
    MultiClusterNetwork(std::vector<ClusterGraph> clusters, std::vector<Edge> global_edges);

    int n_clusters() const { return static_cast<int>(clusters_.size()); }
    int total_agents() const { return offsets_.back(); }
    const std::vector<ClusterGraph>& clusters() const { return clusters_; }
    const ClusterGraph& cluster(int i) const { return clusters_.at(i - 1); }
    const std::vector<Edge>& global_edges() const { return global_edges_; }

    /// n_ij = sum_{l<i} n_l + j. 1-based everywhere.
    int relabel(int cluster, int agent) const;
    /// Inverse of relabel: global index -> (cluster, agent).
    std::pair<int, int> unlabel(int global_index) const;

    NeighborSets neighbor_sets() const;

  private:
    std::vector<ClusterGraph> clusters_;
    std::vector<Edge> global_edges_;
    std::vector<int> offsets_;  // offsets_[i] = agents before cluster i+1
};

}  // namespace cdpg
