#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/ledger.hpp"
#include "bvib/rng.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// node state and configuration
// ---------------------------------------------------------------------------

struct NodeState {
    int node_id = 0;
    Role role = Role::follower;
    std::uint64_t current_term = 0;
    bool alive = true;
    int missed_heartbeats = 0;
    std::vector<LedgerEntry> pending;
};

struct TermConfig {
    std::uint64_t term_length_rounds = 600; // re-election interval, healthy or not
    std::uint64_t heartbeat_interval = 1;   // rounds between leader heartbeats
    int missed_heartbeat_threshold = 3;     // misses before followers force an election

    void validate() const {
        if (term_length_rounds == 0 || heartbeat_interval == 0 || missed_heartbeat_threshold < 1)
            throw ConfigError("TermConfig: all fields must be positive");
    }
};

// Append-only structured event stream, used by tests and written to disk at
// the end of a run.
struct EventLog {
    std::vector<std::string> lines;

    template <typename... Args>
    void emit(const char* fmt, Args... args) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), fmt, args...);
        lines.emplace_back(buf);
    }

    bool contains(const std::string& needle) const {
        for (const auto& l : lines)
            if (l.find(needle) != std::string::npos) return true;
        return false;
    }

    std::size_t count_containing(const std::string& needle) const {
        std::size_t n = 0;
        for (const auto& l : lines)
            if (l.find(needle) != std::string::npos) ++n;
        return n;
    }
};

// ---------------------------------------------------------------------------
// server cluster
// ---------------------------------------------------------------------------

struct CommitResult {
    bool committed = false;
    std::uint64_t height = 0; // tip height when committed
    int received = 0;         // follower ledgers received
    int quorum = 0;           // ledgers required
};

// The Raft-lite server group: roles, the term timer, heartbeat bookkeeping,
// quorum-gated block commitment, and one chain replica per server. All
// transitions happen at round boundaries under the orchestrator's single
// logical thread.
class ServerCluster {
public:
    ServerCluster(int num_servers, TermConfig term, EventLog* log) : term_cfg_(term), log_(log) {
        term_cfg_.validate();
        if (num_servers < 1) throw ConfigError("ServerCluster: need at least one server");
        nodes_.resize(static_cast<std::size_t>(num_servers));
        replicas_.resize(static_cast<std::size_t>(num_servers));
        for (int i = 0; i < num_servers; ++i) nodes_[static_cast<std::size_t>(i)].node_id = i;
    }

    int size() const { return static_cast<int>(nodes_.size()); }
    NodeState& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const NodeState& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    Chain& replica(int id) { return replicas_[static_cast<std::size_t>(id)]; }
    const Chain& replica(int id) const { return replicas_[static_cast<std::size_t>(id)]; }
    std::optional<int> leader_id() const { return leader_; }
    std::uint64_t term() const { return cluster_term_; }
    std::uint64_t term_start_round() const { return term_start_round_; }
    bool total_failure() const { return total_failure_; }

    bool leader_alive() const { return leader_.has_value() && node(*leader_).alive; }

    int alive_count() const {
        int n = 0;
        for (const auto& s : nodes_)
            if (s.alive) ++n;
        return n;
    }

    // Applies externally decided liveness (the attack module's output).
    // A server coming back from paralysis rejoins as a follower in the
    // current term and copies the cluster's current chain.
    void sync_alive(const std::vector<bool>& alive, std::uint64_t round) {
        if (alive.size() != nodes_.size()) throw ConfigError("sync_alive: size mismatch");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            NodeState& s = nodes_[i];
            if (s.alive && !alive[i]) {
                s.alive = false;
                // a paralyzed leader loses its leadership; it rejoins as a
                // follower once it comes back
                if (leader_ == s.node_id) leader_.reset();
                if (log_) log_->emit("PARALYZE round=%llu node=server:%d", ull(round), s.node_id);
            } else if (!s.alive && alive[i]) {
                s.alive = true;
                s.role = Role::follower;
                s.current_term = cluster_term_;
                s.missed_heartbeats = 0;
                s.pending.clear();
                catch_up(static_cast<int>(i));
                if (log_) log_->emit("REVIVE round=%llu node=server:%d", ull(round), s.node_id);
            }
        }
    }

    // Election mechanism: every alive server becomes a candidate and casts
    // one uniformly random vote over the alive candidates (self-votes
    // allowed). Plurality wins; ties go to the lowest node id. Returns the
    // new leader, or nullopt on total failure (no alive server).
    std::optional<int> start_election(RngStream& rng, std::uint64_t round) {
        std::vector<int> candidates;
        for (const auto& s : nodes_)
            if (s.alive) candidates.push_back(s.node_id);
        if (candidates.empty()) {
            total_failure_ = true;
            if (log_) log_->emit("TOTAL_FAILURE round=%llu", ull(round));
            return std::nullopt;
        }
        for (int id : candidates) node(id).role = Role::candidate;

        std::vector<int> votes(candidates.size(), 0);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto pick = static_cast<std::size_t>(rng.next_below(candidates.size()));
            votes[pick] += 1;
        }
        std::size_t winner = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (votes[i] > votes[winner]) winner = i; // ties keep the lower id

        cluster_term_ += 1;
        term_start_round_ = round;
        leader_ = candidates[winner];
        for (int id : candidates) {
            NodeState& s = node(id);
            s.role = id == *leader_ ? Role::leader : Role::follower;
            s.current_term = cluster_term_;
            s.missed_heartbeats = 0;
        }
        if (log_)
            log_->emit("ELECTION round=%llu term=%llu winner=%d votes=%d", ull(round), ull(cluster_term_), *leader_,
                       votes[winner]);
        return leader_;
    }

    // One heartbeat round. An alive leader resets every alive follower's
    // miss counter; a silent (paralyzed or absent) leader lets the counters
    // grow, and once any alive follower hits the threshold a single election
    // fires. Returns true if an election happened.
    bool heartbeat_tick(RngStream& rng, std::uint64_t round) {
        if (round % term_cfg_.heartbeat_interval != 0) return false;
        if (leader_alive()) {
            for (auto& s : nodes_)
                if (s.alive && s.role == Role::follower) s.missed_heartbeats = 0;
            return false;
        }
        bool trigger = false;
        for (auto& s : nodes_) {
            if (!s.alive || s.role == Role::leader) continue;
            s.missed_heartbeats += 1;
            if (log_) log_->emit("HEARTBEAT_MISS round=%llu node=%d missed=%d", ull(round), s.node_id,
                                 s.missed_heartbeats);
            if (s.missed_heartbeats >= term_cfg_.missed_heartbeat_threshold) trigger = true;
        }
        if (trigger) {
            start_election(rng, round);
            return true;
        }
        return false;
    }

    bool term_expired(std::uint64_t round) const {
        return leader_.has_value() && round - term_start_round_ >= term_cfg_.term_length_rounds;
    }

    // Leader's end-of-round collection. Alive followers respond with their
    // pending ledgers; fewer than a strict majority of the follower count
    // aborts the round and every pending entry from it is discarded.
    CommitResult collect_and_commit(std::uint64_t round) {
        if (!leader_alive()) throw ProtocolError("collect_and_commit: no alive leader");
        NodeState& leader = node(*leader_);

        const int followers = size() - 1;
        const int quorum = followers / 2 + 1;
        int received = 0;
        std::vector<LedgerEntry> entries;
        for (auto& s : nodes_) {
            if (s.node_id == leader.node_id || !s.alive) continue;
            received += 1;
        }

        CommitResult result;
        result.received = received;
        result.quorum = followers == 0 ? 0 : quorum;
        if (followers > 0 && received < quorum) {
            for (auto& s : nodes_) s.pending.clear();
            if (log_)
                log_->emit("ABORT round=%llu received=%d quorum=%d", ull(round), received, quorum);
            return result;
        }

        // Collect in ascending node-id order: the leader's own entries plus
        // every responding follower's.
        for (auto& s : nodes_) {
            if (!s.alive) continue;
            entries.insert(entries.end(), s.pending.begin(), s.pending.end());
            s.pending.clear();
        }
        if (entries.empty()) {
            // Nothing trained this round (every paired device was down);
            // quorum was met but there is no block to write.
            result.committed = true;
            result.height = replica(*leader_).empty() ? 0 : replica(*leader_).tip().height;
            if (log_) log_->emit("COMMIT round=%llu height=%llu empty=1", ull(round), ull(result.height));
            return result;
        }
        const Block& block = append_block(replica(*leader_), std::move(entries), cluster_term_, round, Role::leader);
        broadcast_tip();
        result.committed = true;
        result.height = block.height;
        if (log_) log_->emit("COMMIT round=%llu height=%llu", ull(round), ull(result.height));
        return result;
    }

    // Leader bootstraps the chain with the genesis block and replicates it.
    void create_genesis(std::uint64_t round) {
        if (!leader_alive()) throw ProtocolError("create_genesis: no alive leader");
        make_genesis(replica(*leader_), cluster_term_, round);
        broadcast_tip();
        if (log_) log_->emit("GENESIS round=%llu term=%llu", ull(round), ull(cluster_term_));
    }

    // Replicas of every alive server after this call hold the leader's tip.
    void broadcast_tip() {
        const Chain& source = replica(*leader_);
        for (auto& s : nodes_) {
            if (!s.alive || s.node_id == *leader_) continue;
            Chain& target = replica(s.node_id);
            if (target.height() + 1 == source.height() && !target.empty() &&
                target.tip().hash == source.tip().prev_hash) {
                target.blocks.push_back(source.tip());
            } else if (target != source) {
                target = source; // full resync after divergence
            }
        }
    }

private:
    static unsigned long long ull(std::uint64_t v) { return static_cast<unsigned long long>(v); }

    void catch_up(int id) {
        if (leader_.has_value() && node(*leader_).alive && *leader_ != id)
            replica(id) = replica(*leader_);
    }

    std::vector<NodeState> nodes_;
    std::vector<Chain> replicas_;
    TermConfig term_cfg_;
    EventLog* log_ = nullptr;
    std::optional<int> leader_;
    std::uint64_t cluster_term_ = 0;
    std::uint64_t term_start_round_ = 0;
    bool total_failure_ = false;
};

} // namespace bvib
