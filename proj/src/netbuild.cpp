#include "btcnet/netbuild.hpp"

#include "btcnet/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

namespace btcnet {

namespace {

struct Flow {
    std::string_view address;
    Satoshi value;
};

/// Merges repeated addresses within one side of a transaction.
std::vector<Flow> aggregate(const std::vector<TxEntry> &entries)
{
    std::vector<Flow> flows;
    flows.reserve(entries.size());
    for (const auto &e : entries) {
        auto it = std::find_if(flows.begin(), flows.end(), [&](const Flow &f) { return f.address == e.address; });
        if (it == flows.end())
            flows.push_back({e.address, e.value});
        else
            it->value += e.value;
    }
    return flows;
}

/// Accumulates edges between node keys and relabels nodes densely in order of
/// first appearance.
template <typename Key, typename Hash = std::hash<Key>> class GraphBuilder {
  public:
    void add(const Key &from, const Key &to, Satoshi volume)
    {
        if (from == to)
            return;
        raw_.push_back({node(from), node(to), volume});
    }

    template <typename Label> WindowedGraph finish(std::string window_id, Representation repr, Label label) &&
    {
        WindowedGraph g;
        g.window_id = std::move(window_id);
        g.repr = repr;
        g.nodes.reserve(keys_.size());
        for (const auto &k : keys_)
            g.nodes.push_back(label(k));
        std::sort(raw_.begin(), raw_.end(), [](const Edge &a, const Edge &b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        for (const auto &e : raw_) {
            if (!g.edges.empty() && g.edges.back().src == e.src && g.edges.back().dst == e.dst)
                g.edges.back().volume += e.volume;
            else
                g.edges.push_back(e);
        }
        return g;
    }

  private:
    std::uint32_t node(const Key &k)
    {
        auto [it, inserted] = ids_.try_emplace(k, static_cast<std::uint32_t>(keys_.size()));
        if (inserted)
            keys_.push_back(k);
        return it->second;
    }

    std::unordered_map<Key, std::uint32_t, Hash> ids_;
    std::vector<Key> keys_;
    std::vector<Edge> raw_;
};

/// Share of output `out` attributed to input `in`, proportional to input value.
Satoshi pair_volume(const Flow &in, const Flow &out, Satoshi total_in)
{
    return static_cast<Satoshi>(static_cast<__int128>(out.value) * in.value / total_in);
}

template <typename Builder, typename MapAddress>
void add_transactions(Builder &b, std::span<const Transaction> txs, MapAddress map)
{
    for (const auto &tx : txs) {
        if (tx.is_coinbase())
            continue;
        const auto ins = aggregate(tx.inputs);
        const auto outs = aggregate(tx.outputs);
        Satoshi total_in = 0;
        for (const auto &f : ins)
            total_in += f.value;
        for (const auto &in : ins) {
            const auto from = map(in.address);
            for (const auto &out : outs) {
                if (in.address == out.address)
                    continue;
                b.add(from, map(out.address), pair_volume(in, out, total_in));
            }
        }
    }
}

} // namespace

const char *to_string(Representation r) noexcept { return r == Representation::address ? "an" : "un"; }

Representation parse_representation(const std::string &s)
{
    if (s == "an")
        return Representation::address;
    if (s == "un")
        return Representation::user;
    throw std::invalid_argument("unknown representation '" + s + "'");
}

WindowedGraph build_address_network(std::span<const Transaction> txs, std::string window_id)
{
    GraphBuilder<std::string_view> b;
    add_transactions(b, txs, [](std::string_view a) { return a; });
    return std::move(b).finish(std::move(window_id), Representation::address,
                               [](std::string_view a) { return std::string(a); });
}

WindowedGraph build_user_network(std::span<const Transaction> txs, const ClusterMap &cm, std::string window_id)
{
    GraphBuilder<UserId> b;
    add_transactions(b, txs, [&](std::string_view a) { return cm.at(a); });
    return std::move(b).finish(std::move(window_id), Representation::user,
                               [](UserId u) { return std::to_string(u); });
}

DegreeSequences degree_sequences(const WindowedGraph &g)
{
    DegreeSequences d;
    const auto n = g.node_count();
    d.in.assign(n, 0);
    d.out.assign(n, 0);
    for (const auto &e : g.edges) {
        ++d.out[e.src];
        ++d.in[e.dst];
    }
    d.total.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        d.total[i] = d.in[i] + d.out[i];
    return d;
}

double link_density(const WindowedGraph &g)
{
    const auto n = static_cast<double>(g.node_count());
    if (g.node_count() < 2)
        throw std::domain_error("link density needs at least two nodes");
    return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

Satoshi total_volume(const WindowedGraph &g)
{
    Satoshi v = 0;
    for (const auto &e : g.edges)
        v += e.volume;
    return v;
}

void write_edge_list(std::ostream &out, const WindowedGraph &g)
{
    out << "src,dst\n";
    for (const auto &e : g.edges)
        out << g.nodes[e.src] << ',' << g.nodes[e.dst] << '\n';
}

void write_edge_list(const std::string &path, const WindowedGraph &g)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    write_edge_list(out, g);
}

WindowedGraph parse_edge_list(std::istream &in, std::string window_id, Representation repr)
{
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    GraphBuilder<std::string> b;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (!header) {
            if (line != "src,dst")
                throw ParseError("expected header 'src,dst'", lineno);
            header = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
            throw ParseError("malformed edge row", lineno);
        auto src = line.substr(0, comma);
        auto dst = line.substr(comma + 1);
        if (src == dst)
            throw ParseError("self-loop in edge list", lineno);
        b.add(src, dst, 0);
    }
    if (!header)
        throw ParseError("missing header 'src,dst'");
    return std::move(b).finish(std::move(window_id), repr, [](const std::string &s) { return s; });
}

WindowedGraph read_edge_list(const std::string &path, std::string window_id, Representation repr)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open edge list '" + path + "'");
    return parse_edge_list(in, std::move(window_id), repr);
}

std::string edge_list_filename(Representation r, Granularity g, const std::string &window_id)
{
    return std::string(to_string(r)) + "_" + to_string(g) + "_" + window_id + ".csv";
}

} // namespace btcnet
