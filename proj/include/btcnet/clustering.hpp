#pragma once

#include "btcnet/ingest.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace btcnet {

using AddressId = std::uint32_t;
using UserId = std::uint32_t;

/// Dense interning of address strings, ids assigned in order of first registration.
class AddressIndex {
  public:
    AddressId intern(std::string_view address);
    std::optional<AddressId> find(std::string_view address) const;
    const std::string &name(AddressId id) const { return names_[id]; }
    std::size_t size() const noexcept { return names_.size(); }
    void reserve(std::size_t n);

  private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::unordered_map<std::string, AddressId, Hash, std::equal_to<>> ids_;
    std::vector<std::string> names_;
};

/// Union-find over the address index space, union by rank with path compression.
class DisjointSet {
  public:
    DisjointSet() = default;
    explicit DisjointSet(std::size_t n) { grow(n); }

    /// Registers `address`, creating a singleton set if unseen.
    AddressId add(std::string_view address);
    std::optional<AddressId> id_of(std::string_view address) const { return index_.find(address); }
    const AddressIndex &index() const noexcept { return index_; }
    /// Moves the address index out, leaving the set unusable.
    AddressIndex release_index() && { return std::move(index_); }

    AddressId find(AddressId x);
    /// Merges the sets of a and b; returns false if they were already joined.
    bool unite(AddressId a, AddressId b);
    bool same(AddressId a, AddressId b) { return find(a) == find(b); }

    std::size_t size() const noexcept { return parent_.size(); }
    void grow(std::size_t n);

  private:
    AddressIndex index_;
    std::vector<AddressId> parent_;
    std::vector<std::uint8_t> rank_;
};

/// Addresses that appeared in some earlier transaction, by address id.
class SeenSet {
  public:
    bool contains(AddressId id) const { return id < seen_.size() && seen_[id]; }
    void insert(AddressId id)
    {
        if (id >= seen_.size())
            seen_.resize(static_cast<std::size_t>(id) + 1, false);
        seen_[id] = true;
    }

  private:
    std::vector<bool> seen_;
};

/// Address -> user assignment. User ids are contiguous from 0 and ordered by the
/// first appearance of each cluster's earliest-seen address.
class ClusterMap {
  public:
    ClusterMap() = default;
    ClusterMap(AddressIndex index, std::vector<UserId> user_of);

    std::optional<UserId> user_of(std::string_view address) const;
    /// Throws std::out_of_range for unmapped addresses.
    UserId at(std::string_view address) const;
    UserId user_of_id(AddressId id) const { return user_of_[id]; }
    const AddressIndex &index() const noexcept { return index_; }
    std::size_t address_count() const noexcept { return user_of_.size(); }
    std::size_t user_count() const noexcept { return n_users_; }

    /// Every address mapped to its own user, in first-appearance order.
    static ClusterMap identity(std::span<const Transaction> txs);

  private:
    AddressIndex index_;
    std::vector<UserId> user_of_;
    std::size_t n_users_ = 0;
};

/// Registers every address of `tx` in `ds` (inputs first, then outputs).
void register_addresses(const Transaction &tx, DisjointSet &ds);

/// Multi-input rule: all inputs of one transaction belong to one user.
void apply_multi_input(const Transaction &tx, DisjointSet &ds);

/// Change-address rule. Fires when exactly one distinct output address is new
/// (absent from `seen` and not an input of `tx`) and every amount it receives is
/// strictly below the smallest input; that output joins the input cluster.
/// Returns the id of the merged change address, if any.
std::optional<AddressId> apply_change_address(const Transaction &tx, DisjointSet &ds, const SeenSet &seen);

/// Single chronological pass (timestamp, then block height, then file order)
/// applying the multi-input and then the change-address rule per transaction.
ClusterMap cluster_addresses(std::span<const Transaction> txs);

/// CSV `address,user_id`, one row per address in user-id assignment order.
void write_cluster_map(std::ostream &out, const ClusterMap &cm);
void write_cluster_map(const std::string &path, const ClusterMap &cm);
ClusterMap parse_cluster_map(std::istream &in);
ClusterMap read_cluster_map(const std::string &path);

} // namespace btcnet
