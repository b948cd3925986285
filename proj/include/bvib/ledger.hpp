#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/sha256.hpp"

namespace bvib {

// One mutual-information record, as written by a server after a training
// step of its pair. (epoch, batch, pair_id) is unique within any ledger;
// round is the logical timestamp.
struct LedgerEntry {
    std::uint64_t epoch = 0;
    std::uint64_t batch = 0;
    std::int32_t pair_id = 0;
    double mi_upper_bits = 0.0;
    double mi_lower_bits = 0.0;
    std::uint64_t round = 0;

    bool operator==(const LedgerEntry&) const = default;
};

struct Block {
    std::uint64_t height = 0;
    Digest prev_hash{}; // all zero for the genesis block
    std::uint64_t round = 0;
    std::uint64_t term = 0;
    std::vector<LedgerEntry> entries;
    Digest hash{};

    bool operator==(const Block&) const = default;
};

struct Chain {
    std::vector<Block> blocks;

    std::size_t height() const { return blocks.size(); }
    const Block& tip() const { return blocks.back(); }
    bool empty() const { return blocks.empty(); }

    bool operator==(const Chain&) const = default;
};

// ---------------------------------------------------------------------------
// canonical serialization and hashing
// ---------------------------------------------------------------------------
// The hash input is the canonical serialization of every field except the
// hash itself, in this order:
//   height, round, term               u64 big-endian
//   prev_hash                         32 raw bytes
//   entry count                       u64 big-endian
//   per entry: epoch u64, batch u64, pair_id i32 (as u32), mi_upper_bits and
//   mi_lower_bits as IEEE-754 bit patterns (u64), round u64 -- all big-endian
// This layout is fixed; chains hashed on any platform agree byte for byte.

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64_bits(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

} // namespace detail

inline std::vector<std::uint8_t> serialize_block_body(const Block& b) {
    std::vector<std::uint8_t> out;
    out.reserve(64 + b.entries.size() * 44);
    detail::put_u64(out, b.height);
    detail::put_u64(out, b.round);
    detail::put_u64(out, b.term);
    out.insert(out.end(), b.prev_hash.begin(), b.prev_hash.end());
    detail::put_u64(out, b.entries.size());
    for (const LedgerEntry& e : b.entries) {
        detail::put_u64(out, e.epoch);
        detail::put_u64(out, e.batch);
        detail::put_u32(out, static_cast<std::uint32_t>(e.pair_id));
        detail::put_f64_bits(out, e.mi_upper_bits);
        detail::put_f64_bits(out, e.mi_lower_bits);
        detail::put_u64(out, e.round);
    }
    return out;
}

inline Digest hash_block(const Block& b) { return Sha256::hash(serialize_block_body(b)); }

// ---------------------------------------------------------------------------
// chain operations
// ---------------------------------------------------------------------------

enum class Role { leader, follower, candidate };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::leader: return "leader";
        case Role::follower: return "follower";
        case Role::candidate: return "candidate";
    }
    return "?";
}

// Creates block 0 with no entries and an all-zero predecessor hash.
inline void make_genesis(Chain& chain, std::uint64_t term, std::uint64_t round) {
    if (!chain.empty()) throw ProtocolError("make_genesis: chain already has a genesis block");
    Block b;
    b.height = 0;
    b.prev_hash.fill(0);
    b.round = round;
    b.term = term;
    b.hash = hash_block(b);
    chain.blocks.push_back(std::move(b));
}

// Appends a block of collected ledger entries to the tip. Only the current
// leader may append.
inline const Block& append_block(Chain& chain, std::vector<LedgerEntry> entries, std::uint64_t term,
                                 std::uint64_t round, Role caller_role) {
    if (caller_role != Role::leader) throw AuthorizationError("append_block: caller is not the leader");
    if (entries.empty()) throw ProtocolError("append_block: entries must be non-empty");
    if (chain.empty()) throw ProtocolError("append_block: no genesis block");
    Block b;
    b.height = chain.tip().height + 1;
    b.prev_hash = chain.tip().hash;
    b.round = round;
    b.term = term;
    b.entries = std::move(entries);
    b.hash = hash_block(b);
    chain.blocks.push_back(std::move(b));
    return chain.tip();
}

// Re-verifies every block: stored hash matches a recomputation and the
// prev_hash linkage holds. Returns the lowest failing height, or nullopt if
// the chain is intact.
inline std::optional<std::uint64_t> validate_chain(const Chain& chain) {
    Digest zero{};
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if (b.height != i) return i;
        if (hash_block(b) != b.hash) return i;
        const Digest& expected_prev = i == 0 ? zero : chain.blocks[i - 1].hash;
        if (b.prev_hash != expected_prev) return i;
    }
    return std::nullopt;
}

// Resolves disagreement between per-server chain copies: the version held by
// a strict majority of the given replicas wins. Returns the index of a
// replica holding the majority version, or nullopt when no strict majority
// exists.
inline std::optional<std::size_t> majority_replica(const std::vector<const Chain*>& replicas) {
    std::map<Digest, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < replicas.size(); ++i) {
        const std::vector<std::uint8_t> serialized = [&] {
            std::vector<std::uint8_t> bytes;
            for (const Block& b : replicas[i]->blocks) {
                const auto body = serialize_block_body(b);
                bytes.insert(bytes.end(), body.begin(), body.end());
                bytes.insert(bytes.end(), b.hash.begin(), b.hash.end());
            }
            return bytes;
        }();
        groups[Sha256::hash(serialized)].push_back(i);
    }
    for (const auto& [digest, members] : groups)
        if (members.size() * 2 > replicas.size()) return members.front();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

// Structured-text dump: one "block" line per block followed by one "entry"
// line per ledger entry. Reals are printed with 17 significant digits so the
// export is a faithful record of the committed values.
inline void export_chain(const Chain& chain, std::ostream& os) {
    char buf[512];
    for (const Block& b : chain.blocks) {
        std::snprintf(buf, sizeof(buf), "block height=%llu term=%llu round=%llu prev=%s hash=%s entries=%zu\n",
                      static_cast<unsigned long long>(b.height), static_cast<unsigned long long>(b.term),
                      static_cast<unsigned long long>(b.round), to_hex(b.prev_hash).c_str(), to_hex(b.hash).c_str(),
                      b.entries.size());
        os << buf;
        for (const LedgerEntry& e : b.entries) {
            std::snprintf(buf, sizeof(buf),
                          "  entry epoch=%llu batch=%llu pair=%d mi_upper_bits=%.17g mi_lower_bits=%.17g round=%llu\n",
                          static_cast<unsigned long long>(e.epoch), static_cast<unsigned long long>(e.batch),
                          e.pair_id, e.mi_upper_bits, e.mi_lower_bits, static_cast<unsigned long long>(e.round));
            os << buf;
        }
    }
}

} // namespace bvib
