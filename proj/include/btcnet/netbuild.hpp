#pragma once

#include "btcnet/clustering.hpp"
#include "btcnet/ingest.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace btcnet {

enum class Representation { address, user };

/// "an" / "un"
const char *to_string(Representation r) noexcept;
Representation parse_representation(const std::string &s);

struct Edge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    Satoshi volume = 0; ///< coins moved along the edge; not used by the binary statistics

    friend bool operator==(const Edge &, const Edge &) = default;
};

/// Binary directed simple graph of one time window.
///
/// Nodes are dense ids 0..N-1 with string labels (addresses for AN, user ids
/// for UN). Edges are unique, loop-free and sorted by (src, dst).
struct WindowedGraph {
    std::string window_id;
    Representation repr = Representation::address;
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    std::size_t node_count() const noexcept { return nodes.size(); }
    std::size_t edge_count() const noexcept { return edges.size(); }
};

struct DegreeSequences {
    std::vector<std::uint32_t> in;
    std::vector<std::uint32_t> out;
    std::vector<std::uint32_t> total;
};

/// Address network: every (input, output) address pair of each non-coinbase
/// transaction becomes an edge, self-pairs dropped. Only addresses incident to
/// an edge become nodes.
WindowedGraph build_address_network(std::span<const Transaction> txs, std::string window_id = {});

/// User network: address edges mapped through `cm`, self-loops dropped.
/// Throws std::out_of_range if an address is missing from `cm`.
WindowedGraph build_user_network(std::span<const Transaction> txs, const ClusterMap &cm,
                                 std::string window_id = {});

DegreeSequences degree_sequences(const WindowedGraph &g);

/// L / (N (N-1)); throws std::domain_error when N < 2.
double link_density(const WindowedGraph &g);

/// Sum of all edge volumes.
Satoshi total_volume(const WindowedGraph &g);

/// Edge list CSV `src,dst` using node labels.
void write_edge_list(std::ostream &out, const WindowedGraph &g);
void write_edge_list(const std::string &path, const WindowedGraph &g);
/// Reads a `src,dst` edge list back into a graph (volumes are not stored).
WindowedGraph parse_edge_list(std::istream &in, std::string window_id, Representation repr);
WindowedGraph read_edge_list(const std::string &path, std::string window_id, Representation repr);

/// `{repr}_{granularity}_{window_id}.csv`
std::string edge_list_filename(Representation r, Granularity g, const std::string &window_id);

} // namespace btcnet
