#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/flops.hpp"
#include "bvib/rng.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// roster: liveness of every simulated node
// ---------------------------------------------------------------------------

// Paralysis is binary and time-bounded: a node is down while
// round < paralyzed_until. Expiry is therefore implicit and leaves no sticky
// state behind.
struct Roster {
    std::vector<std::uint64_t> device_until;
    std::vector<std::uint64_t> server_until;

    Roster() = default;
    Roster(int devices, int servers)
        : device_until(static_cast<std::size_t>(devices), 0), server_until(static_cast<std::size_t>(servers), 0) {}

    int num_devices() const { return static_cast<int>(device_until.size()); }
    int num_servers() const { return static_cast<int>(server_until.size()); }

    bool device_alive(int i, std::uint64_t round) const {
        return device_until[static_cast<std::size_t>(i)] <= round;
    }
    bool server_alive(int i, std::uint64_t round) const {
        return server_until[static_cast<std::size_t>(i)] <= round;
    }

    void paralyze(NodeRef node, std::uint64_t until) {
        auto& bucket = node.kind == NodeKind::device ? device_until : server_until;
        auto& slot = bucket[static_cast<std::size_t>(node.index)];
        if (until > slot) slot = until;
    }

    int paralyzed_devices(std::uint64_t round) const {
        int n = 0;
        for (std::size_t i = 0; i < device_until.size(); ++i)
            if (device_until[i] > round) ++n;
        return n;
    }

    int paralyzed_servers(std::uint64_t round) const {
        int n = 0;
        for (std::size_t i = 0; i < server_until.size(); ++i)
            if (server_until[i] > round) ++n;
        return n;
    }

    std::vector<bool> server_alive_flags(std::uint64_t round) const {
        std::vector<bool> flags(server_until.size());
        for (std::size_t i = 0; i < server_until.size(); ++i) flags[i] = server_until[i] <= round;
        return flags;
    }
};

// ---------------------------------------------------------------------------
// attack configuration and injection
// ---------------------------------------------------------------------------

enum class TargetPolicy { uniform_any, leader_focused, devices_only, servers_only };

inline const char* target_policy_name(TargetPolicy p) {
    switch (p) {
        case TargetPolicy::uniform_any: return "uniform-any";
        case TargetPolicy::leader_focused: return "leader-focused";
        case TargetPolicy::devices_only: return "devices-only";
        case TargetPolicy::servers_only: return "servers-only";
    }
    return "?";
}

inline TargetPolicy parse_target_policy(const std::string& s) {
    if (s == "uniform-any") return TargetPolicy::uniform_any;
    if (s == "leader-focused") return TargetPolicy::leader_focused;
    if (s == "devices-only") return TargetPolicy::devices_only;
    if (s == "servers-only") return TargetPolicy::servers_only;
    throw ConfigError("unknown target policy: " + s);
}

struct AttackConfig {
    int num_malicious = 0;
    TargetPolicy policy = TargetPolicy::uniform_any;
    std::uint64_t paralysis_epochs = 1;
    bool reselect_each_epoch = true;

    void validate(int total_nodes) const {
        if (num_malicious < 0 || num_malicious > total_nodes)
            throw ConfigError("AttackConfig: num_malicious must be in [0, total node count]");
        if (paralysis_epochs < 1) throw ConfigError("AttackConfig: paralysis duration must be >= 1 epoch");
    }
};

// DoS fault injector. Each malicious node independently floods one target
// per epoch; hitting a node clears its alive flag for the configured number
// of epochs, measured in rounds so that rounds spent leaderless or aborted
// still age the paralysis out.
class AttackState {
public:
    explicit AttackState(AttackConfig cfg) : cfg_(cfg) {}

    const AttackConfig& config() const { return cfg_; }

    std::vector<NodeRef> inject(std::uint64_t epoch, RngStream& rng, Roster& roster, std::optional<int> leader,
                                std::uint64_t now_round, std::uint64_t rounds_per_epoch) {
        (void)epoch;
        std::vector<NodeRef> targets;
        if (cfg_.num_malicious <= 0) return targets;

        if (!cfg_.reselect_each_epoch && targets_chosen_) {
            targets = fixed_targets_;
        } else {
            targets.reserve(static_cast<std::size_t>(cfg_.num_malicious));
            for (int a = 0; a < cfg_.num_malicious; ++a) {
                auto t = pick_target(rng, roster, leader);
                if (t.has_value()) targets.push_back(*t);
            }
            if (!cfg_.reselect_each_epoch) {
                fixed_targets_ = targets;
                targets_chosen_ = true;
            }
        }

        // covers the next paralysis_epochs * rounds_per_epoch rounds, i.e.
        // rounds (now_round, now_round + duration]
        const std::uint64_t until = now_round + cfg_.paralysis_epochs * rounds_per_epoch + 1;
        for (NodeRef t : targets) roster.paralyze(t, until);
        return targets;
    }

private:
    std::optional<NodeRef> pick_target(RngStream& rng, const Roster& roster, std::optional<int> leader) const {
        const int d = roster.num_devices();
        const int s = roster.num_servers();
        switch (cfg_.policy) {
            case TargetPolicy::uniform_any: {
                if (d + s == 0) return std::nullopt;
                const auto idx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d + s)));
                return idx < d ? device_node(idx) : server_node(idx - d);
            }
            case TargetPolicy::devices_only:
                if (d == 0) return std::nullopt;
                return device_node(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d))));
            case TargetPolicy::servers_only:
                if (s == 0) return std::nullopt;
                return server_node(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(s))));
            case TargetPolicy::leader_focused:
                if (leader.has_value()) return server_node(*leader);
                if (s > 0) return server_node(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(s))));
                if (d > 0) return device_node(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d))));
                return std::nullopt;
        }
        return std::nullopt;
    }

    AttackConfig cfg_;
    std::vector<NodeRef> fixed_targets_;
    bool targets_chosen_ = false;
};

} // namespace bvib
