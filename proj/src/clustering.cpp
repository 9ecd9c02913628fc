#include "btcnet/clustering.hpp"

#include "btcnet/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace btcnet {

AddressId AddressIndex::intern(std::string_view address)
{
    if (auto it = ids_.find(address); it != ids_.end())
        return it->second;
    const auto id = static_cast<AddressId>(names_.size());
    ids_.emplace(std::string(address), id);
    names_.emplace_back(address);
    return id;
}

std::optional<AddressId> AddressIndex::find(std::string_view address) const
{
    if (auto it = ids_.find(address); it != ids_.end())
        return it->second;
    return std::nullopt;
}

void AddressIndex::reserve(std::size_t n)
{
    ids_.reserve(n);
    names_.reserve(n);
}

AddressId DisjointSet::add(std::string_view address)
{
    const auto id = index_.intern(address);
    if (id >= parent_.size())
        grow(static_cast<std::size_t>(id) + 1);
    return id;
}

void DisjointSet::grow(std::size_t n)
{
    const auto old = parent_.size();
    if (n <= old)
        return;
    parent_.resize(n);
    rank_.resize(n, 0);
    std::iota(parent_.begin() + static_cast<std::ptrdiff_t>(old), parent_.end(), static_cast<AddressId>(old));
}

AddressId DisjointSet::find(AddressId x)
{
    auto root = x;
    while (parent_[root] != root)
        root = parent_[root];
    while (parent_[x] != root) {
        const auto next = parent_[x];
        parent_[x] = root;
        x = next;
    }
    return root;
}

bool DisjointSet::unite(AddressId a, AddressId b)
{
    a = find(a);
    b = find(b);
    if (a == b)
        return false;
    if (rank_[a] < rank_[b])
        std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b])
        ++rank_[a];
    return true;
}

ClusterMap::ClusterMap(AddressIndex index, std::vector<UserId> user_of)
    : index_(std::move(index)), user_of_(std::move(user_of))
{
    if (user_of_.size() != index_.size())
        throw std::invalid_argument("cluster map size mismatch");
    UserId next = 0;
    for (auto u : user_of_) {
        if (u > next)
            throw std::invalid_argument("user ids must be assigned contiguously in first-appearance order");
        if (u == next)
            ++next;
    }
    n_users_ = next;
}

std::optional<UserId> ClusterMap::user_of(std::string_view address) const
{
    if (auto id = index_.find(address))
        return user_of_[*id];
    return std::nullopt;
}

UserId ClusterMap::at(std::string_view address) const
{
    if (auto id = index_.find(address))
        return user_of_[*id];
    throw std::out_of_range("address '" + std::string(address) + "' is not in the cluster map");
}

ClusterMap ClusterMap::identity(std::span<const Transaction> txs)
{
    AddressIndex index;
    for (const auto &tx : txs) {
        for (const auto &e : tx.inputs)
            index.intern(e.address);
        for (const auto &e : tx.outputs)
            index.intern(e.address);
    }
    std::vector<UserId> users(index.size());
    std::iota(users.begin(), users.end(), UserId{0});
    return ClusterMap(std::move(index), std::move(users));
}

void register_addresses(const Transaction &tx, DisjointSet &ds)
{
    for (const auto &e : tx.inputs)
        ds.add(e.address);
    for (const auto &e : tx.outputs)
        ds.add(e.address);
}

void apply_multi_input(const Transaction &tx, DisjointSet &ds)
{
    if (tx.inputs.size() < 2)
        return;
    const auto first = ds.add(tx.inputs.front().address);
    for (std::size_t i = 1; i < tx.inputs.size(); ++i)
        ds.unite(first, ds.add(tx.inputs[i].address));
}

std::optional<AddressId> apply_change_address(const Transaction &tx, DisjointSet &ds, const SeenSet &seen)
{
    if (tx.is_coinbase())
        return std::nullopt;

    Satoshi smallest_input = tx.inputs.front().value;
    std::vector<AddressId> inputs;
    inputs.reserve(tx.inputs.size());
    for (const auto &e : tx.inputs) {
        smallest_input = std::min(smallest_input, e.value);
        inputs.push_back(ds.add(e.address));
    }

    std::optional<AddressId> candidate;
    bool below_inputs = true;
    for (const auto &e : tx.outputs) {
        const auto id = ds.add(e.address);
        if (seen.contains(id) || std::find(inputs.begin(), inputs.end(), id) != inputs.end())
            continue;
        if (candidate && *candidate != id)
            return std::nullopt; // more than one new output: ambiguous, abstain
        candidate = id;
        below_inputs = below_inputs && e.value < smallest_input;
    }
    if (!candidate || !below_inputs)
        return std::nullopt;
    ds.unite(*candidate, inputs.front());
    return candidate;
}

ClusterMap cluster_addresses(std::span<const Transaction> txs)
{
    std::vector<std::size_t> order(txs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (txs[a].timestamp != txs[b].timestamp)
            return txs[a].timestamp < txs[b].timestamp;
        return txs[a].block_height < txs[b].block_height;
    });

    DisjointSet ds;
    SeenSet seen;
    for (auto i : order) {
        const auto &tx = txs[i];
        register_addresses(tx, ds);
        apply_multi_input(tx, ds);
        apply_change_address(tx, ds, seen);
        for (const auto &e : tx.inputs)
            seen.insert(*ds.id_of(e.address));
        for (const auto &e : tx.outputs)
            seen.insert(*ds.id_of(e.address));
    }

    // Address ids follow first appearance, so scanning them in order numbers
    // clusters by their earliest-seen member.
    constexpr auto unassigned = static_cast<UserId>(-1);
    std::vector<UserId> user_of_root(ds.size(), unassigned);
    std::vector<UserId> users(ds.size());
    UserId next = 0;
    for (AddressId a = 0; a < ds.size(); ++a) {
        auto &u = user_of_root[ds.find(a)];
        if (u == unassigned)
            u = next++;
        users[a] = u;
    }
    return ClusterMap(std::move(ds).release_index(), std::move(users));
}

void write_cluster_map(std::ostream &out, const ClusterMap &cm)
{
    out << "address,user_id\n";
    for (AddressId a = 0; a < cm.address_count(); ++a)
        out << cm.index().name(a) << ',' << cm.user_of_id(a) << '\n';
}

void write_cluster_map(const std::string &path, const ClusterMap &cm)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    write_cluster_map(out, cm);
}

ClusterMap parse_cluster_map(std::istream &in)
{
    AddressIndex index;
    std::vector<UserId> users;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (!header) {
            if (line != "address,user_id")
                throw ParseError("expected header 'address,user_id'", lineno);
            header = true;
            continue;
        }
        auto comma = line.rfind(',');
        UserId u = 0;
        if (comma == std::string::npos || comma == 0 ||
            std::from_chars(line.data() + comma + 1, line.data() + line.size(), u).ptr != line.data() + line.size())
            throw ParseError("malformed cluster map row", lineno);
        const auto before = index.size();
        index.intern(std::string_view(line).substr(0, comma));
        if (index.size() == before)
            throw ParseError("duplicate address in cluster map", lineno);
        users.push_back(u);
    }
    try {
        return ClusterMap(std::move(index), std::move(users));
    } catch (const std::invalid_argument &e) {
        throw ParseError(e.what());
    }
}

ClusterMap read_cluster_map(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open cluster map '" + path + "'");
    return parse_cluster_map(in);
}

} // namespace btcnet
