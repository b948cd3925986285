#pragma once

#include <cstdint>
#include <vector>

#include "bvib/errors.hpp"

namespace bvib {

enum class NodeKind : std::uint8_t { device = 0, server = 1 };

// Identifies a simulated node: device i or server i. In monolithic mode the
// single host is device 0.
struct NodeRef {
    NodeKind kind = NodeKind::device;
    int index = 0;

    bool operator==(const NodeRef&) const = default;
};

inline NodeRef device_node(int i) { return {NodeKind::device, i}; }
inline NodeRef server_node(int i) { return {NodeKind::server, i}; }

// Deterministic compute accounting. Only dense-layer multiply-accumulates
// are counted; a backward pass is booked at twice the forward cost of the
// same layer. The "CPU cycles" figures in reports are macs times a
// configurable cycles-per-MAC factor.
struct FlopCounter {
    std::uint64_t forward_macs = 0;
    std::uint64_t backward_macs = 0;
    std::vector<std::uint64_t> device_macs;
    std::vector<std::uint64_t> server_macs;

    FlopCounter() = default;
    FlopCounter(int num_devices, int num_servers)
        : device_macs(static_cast<std::size_t>(num_devices), 0),
          server_macs(static_cast<std::size_t>(num_servers), 0) {}

    void add_forward(NodeRef node, std::uint64_t macs) {
        forward_macs += macs;
        attribute(node, macs);
    }

    void add_backward(NodeRef node, std::uint64_t macs) {
        backward_macs += macs;
        attribute(node, macs);
    }

    std::uint64_t total_macs() const { return forward_macs + backward_macs; }

    std::uint64_t device_total() const {
        std::uint64_t t = 0;
        for (auto v : device_macs) t += v;
        return t;
    }

    std::uint64_t server_total() const {
        std::uint64_t t = 0;
        for (auto v : server_macs) t += v;
        return t;
    }

private:
    void attribute(NodeRef node, std::uint64_t macs) {
        auto& bucket = node.kind == NodeKind::device ? device_macs : server_macs;
        const auto idx = static_cast<std::size_t>(node.index);
        if (idx >= bucket.size()) bucket.resize(idx + 1, 0);
        bucket[idx] += macs;
    }
};

} // namespace bvib
