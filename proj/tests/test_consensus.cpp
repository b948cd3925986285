#include "test_helpers.hpp"

using namespace bvib;
using namespace bvib_test;

namespace {

TermConfig quick_term() {
    TermConfig t;
    t.term_length_rounds = 1000;
    t.heartbeat_interval = 1;
    t.missed_heartbeat_threshold = 3;
    return t;
}

LedgerEntry entry_for(int pair, std::uint64_t round) {
    return LedgerEntry{1, round, pair, 1.0 + pair, -0.5 - pair, round};
}

void fill_pending(ServerCluster& cluster, std::uint64_t round) {
    for (int i = 0; i < cluster.size(); ++i)
        if (cluster.node(i).alive) cluster.node(i).pending.push_back(entry_for(i, round));
}

std::vector<bool> all_alive(int n) { return std::vector<bool>(static_cast<std::size_t>(n), true); }

} // namespace

TEST_CASE("start_election") {
    EventLog log;

    SECTION("a single alive server leads") {
        ServerCluster cluster(1, quick_term(), &log);
        RngStream rng(1);
        REQUIRE(cluster.start_election(rng, 0) == 0);
        REQUIRE(cluster.node(0).role == Role::leader);
        REQUIRE(cluster.term() == 1);
    }

    SECTION("matches an independent replay of the vote stream") {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            // oracle: replay the same stream by hand
            RngStream replay(seed);
            const int v0 = static_cast<int>(replay.next_below(2));
            const int v1 = static_cast<int>(replay.next_below(2));
            int tally[2] = {0, 0};
            tally[v0] += 1;
            tally[v1] += 1;
            const int expected = tally[1] > tally[0] ? 1 : 0; // plurality, tie to lower id

            ServerCluster cluster(2, quick_term(), &log);
            RngStream rng(seed);
            REQUIRE(cluster.start_election(rng, 0) == expected);
        }
    }

    SECTION("self-vote ties break to the lower node id") {
        // find a seed whose replay has each server voting for itself
        std::uint64_t tie_seed = 0;
        for (std::uint64_t seed = 0;; ++seed) {
            RngStream replay(seed);
            if (replay.next_below(2) == 0 && replay.next_below(2) == 1) {
                tie_seed = seed;
                break;
            }
        }
        ServerCluster cluster(2, quick_term(), &log);
        RngStream rng(tie_seed);
        REQUIRE(cluster.start_election(rng, 0) == 0);
    }

    SECTION("a unanimous vote for node 1 elects node 1 with 2 votes") {
        std::uint64_t seed = 0;
        for (std::uint64_t s = 0;; ++s) {
            RngStream replay(s);
            if (replay.next_below(2) == 1 && replay.next_below(2) == 1) {
                seed = s;
                break;
            }
        }
        EventLog log2;
        ServerCluster cluster(2, quick_term(), &log2);
        RngStream rng(seed);
        REQUIRE(cluster.start_election(rng, 5) == 1);
        REQUIRE(log2.contains("winner=1 votes=2"));
    }

    SECTION("paralyzed servers neither vote nor win") {
        ServerCluster cluster(5, quick_term(), &log);
        std::vector<bool> alive = all_alive(5);
        alive[0] = alive[1] = false;
        cluster.sync_alive(alive, 0);
        RngStream rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const auto leader = cluster.start_election(rng, 0);
            REQUIRE(leader.has_value());
            REQUIRE(*leader >= 2);
        }
    }

    SECTION("losers revert to follower and the term increments") {
        ServerCluster cluster(4, quick_term(), &log);
        RngStream rng(9);
        cluster.start_election(rng, 0);
        cluster.start_election(rng, 1);
        REQUIRE(cluster.term() == 2);
        int leaders = 0;
        for (int i = 0; i < 4; ++i) {
            if (cluster.node(i).role == Role::leader) ++leaders;
            REQUIRE(cluster.node(i).current_term == 2);
        }
        REQUIRE(leaders == 1);
    }

    SECTION("no alive server is a total failure") {
        ServerCluster cluster(3, quick_term(), &log);
        cluster.sync_alive(std::vector<bool>(3, false), 0);
        RngStream rng(11);
        REQUIRE_FALSE(cluster.start_election(rng, 0).has_value());
        REQUIRE(cluster.total_failure());
    }
}

TEST_CASE("heartbeat_tick") {
    EventLog log;
    ServerCluster cluster(4, quick_term(), &log);
    RngStream rng(13);
    cluster.start_election(rng, 0);
    const int first_leader = *cluster.leader_id();

    SECTION("alive leader resets follower miss counters") {
        for (int i = 0; i < 4; ++i)
            if (i != first_leader) cluster.node(i).missed_heartbeats = 2;
        cluster.heartbeat_tick(rng, 1);
        for (int i = 0; i < 4; ++i)
            if (i != first_leader) REQUIRE(cluster.node(i).missed_heartbeats == 0);
    }

    SECTION("a silent leader triggers exactly one election at the threshold") {
        std::vector<bool> alive = all_alive(4);
        alive[static_cast<std::size_t>(first_leader)] = false;
        cluster.sync_alive(alive, 1);

        const auto elections_before = log.count_containing("ELECTION");
        REQUIRE_FALSE(cluster.heartbeat_tick(rng, 1));
        REQUIRE_FALSE(cluster.heartbeat_tick(rng, 2));
        REQUIRE(cluster.heartbeat_tick(rng, 3)); // third miss hits the threshold
        REQUIRE(log.count_containing("ELECTION") == elections_before + 1);
        REQUIRE(cluster.leader_alive());
        REQUIRE(*cluster.leader_id() != first_leader);
    }
}

TEST_CASE("collect_and_commit") {
    EventLog log;

    SECTION("five of nine followers is a quorum, four is not") {
        ServerCluster cluster(10, quick_term(), &log);
        RngStream rng(17);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        const int leader = *cluster.leader_id();

        // 5 responding followers
        std::vector<bool> alive = all_alive(10);
        int down = 0;
        for (int i = 0; i < 10 && down < 4; ++i) {
            if (i == leader) continue;
            alive[static_cast<std::size_t>(i)] = false;
            ++down;
        }
        cluster.sync_alive(alive, 1);
        fill_pending(cluster, 1);
        const CommitResult ok = cluster.collect_and_commit(1);
        REQUIRE(ok.committed);
        REQUIRE(ok.received == 5);
        REQUIRE(ok.quorum == 5);
        REQUIRE(cluster.replica(leader).height() == 2);

        // the block holds exactly the responders' entries plus the leader's
        const Block& committed_block = cluster.replica(leader).tip();
        REQUIRE(committed_block.entries.size() == 6);
        for (const LedgerEntry& e : committed_block.entries) REQUIRE(alive[static_cast<std::size_t>(e.pair_id)]);
        for (int i = 0; i < 10; ++i) REQUIRE(cluster.node(i).pending.empty());

        // 4 responding followers
        for (int i = 0; i < 10; ++i) {
            if (i == leader || !alive[static_cast<std::size_t>(i)]) continue;
            alive[static_cast<std::size_t>(i)] = false;
            break;
        }
        cluster.sync_alive(alive, 2);
        fill_pending(cluster, 2);
        const CommitResult bad = cluster.collect_and_commit(2);
        REQUIRE_FALSE(bad.committed);
        REQUIRE(bad.received == 4);
        REQUIRE(log.contains("ABORT round=2 received=4 quorum=5"));
    }

    SECTION("a single server commits alone") {
        ServerCluster cluster(1, quick_term(), &log);
        RngStream rng(19);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        fill_pending(cluster, 1);
        const CommitResult r = cluster.collect_and_commit(1);
        REQUIRE(r.committed);
        REQUIRE(r.quorum == 0);
        REQUIRE(cluster.replica(0).height() == 2);
    }

    SECTION("aborted entries never reach a committed block") {
        ServerCluster cluster(5, quick_term(), &log);
        RngStream rng(23);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        const int leader = *cluster.leader_id();

        // force an abort: only one follower stays up (quorum is 3)
        std::vector<bool> alive(5, false);
        alive[static_cast<std::size_t>(leader)] = true;
        alive[static_cast<std::size_t>(leader == 0 ? 1 : 0)] = true;
        cluster.sync_alive(alive, 1);
        fill_pending(cluster, 1);
        std::vector<LedgerEntry> aborted;
        for (int i = 0; i < 5; ++i)
            for (const auto& e : cluster.node(i).pending) aborted.push_back(e);
        REQUIRE_FALSE(cluster.collect_and_commit(1).committed);

        // recover and commit several rounds
        cluster.sync_alive(all_alive(5), 2);
        for (std::uint64_t r = 2; r < 6; ++r) {
            fill_pending(cluster, r);
            REQUIRE(cluster.collect_and_commit(r).committed);
        }
        for (const Block& b : cluster.replica(leader).blocks)
            for (const LedgerEntry& committed : b.entries)
                for (const LedgerEntry& lost : aborted) REQUIRE_FALSE(committed == lost);
    }

    SECTION("alive replicas share one tip after every commit") {
        ServerCluster cluster(6, quick_term(), &log);
        RngStream rng(29);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        std::vector<bool> alive = all_alive(6);
        alive[2] = false;
        cluster.sync_alive(alive, 1);

        for (std::uint64_t r = 1; r <= 4; ++r) {
            fill_pending(cluster, r);
            REQUIRE(cluster.collect_and_commit(r).committed);
            const Digest tip = cluster.replica(*cluster.leader_id()).tip().hash;
            for (int i = 0; i < 6; ++i)
                if (cluster.node(i).alive) REQUIRE(cluster.replica(i).tip().hash == tip);
        }
        // node 2 slept through 4 commits and resyncs on revival
        REQUIRE(cluster.replica(2).height() == 1);
        cluster.sync_alive(all_alive(6), 5);
        REQUIRE(cluster.replica(2).height() == 5);
        REQUIRE(validate_chain(cluster.replica(2)) == std::nullopt);
    }
}

TEST_CASE("at most one alive leader at any round") {
    EventLog log;
    ServerCluster cluster(7, quick_term(), &log);
    RngStream rng(31);
    RngStream chaos(32);
    cluster.start_election(rng, 0);

    for (std::uint64_t round = 1; round < 200; ++round) {
        std::vector<bool> alive(7);
        int alive_count = 0;
        for (std::size_t i = 0; i < 7; ++i) {
            alive[i] = chaos.next_unit() > 0.25;
            alive_count += alive[i] ? 1 : 0;
        }
        if (alive_count == 0) alive[chaos.next_below(7)] = true;
        cluster.sync_alive(alive, round);
        cluster.heartbeat_tick(rng, round);

        int alive_leaders = 0;
        for (int i = 0; i < 7; ++i)
            if (cluster.node(i).alive && cluster.node(i).role == Role::leader) ++alive_leaders;
        REQUIRE(alive_leaders <= 1);
    }
}

TEST_CASE("term timer forces re-election with a healthy leader") {
    EventLog log;
    TermConfig term = quick_term();
    term.term_length_rounds = 10;
    ServerCluster cluster(3, term, &log);
    RngStream rng(37);
    cluster.start_election(rng, 0);
    REQUIRE_FALSE(cluster.term_expired(5));
    REQUIRE(cluster.term_expired(10));
    cluster.start_election(rng, 10);
    REQUIRE(cluster.term() == 2);
    REQUIRE_FALSE(cluster.term_expired(11));
}
