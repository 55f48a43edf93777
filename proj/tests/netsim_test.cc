#include "cpark/netsim.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <vector>

namespace cpark {
namespace {

std::vector<int> payload(int n, int round) { return std::vector<int>(static_cast<std::size_t>(n), round); }

TEST(Network, LosslessDeliversEverything) {
    Network net(ChannelModel{0.0, 200.0, 5}, 10);
    Mailbox<int> box(10, -1);
    for (int round = 0; round < 50; ++round) {
        const auto p = payload(10, round);
        const auto delivered = net.deliver_round(std::span<const int>(p), box, Direction::Downlink, round);
        EXPECT_EQ(std::count(delivered.begin(), delivered.end(), true), 10);
        net.end_round();
    }
    EXPECT_EQ(net.stats().stale_reads, 0);
    EXPECT_EQ(box.value(3), 49);
    EXPECT_EQ(box.stamp(3), 49);
    EXPECT_DOUBLE_EQ(net.stats().simulated_delay_ms, 50 * 200.0);
}

TEST(Network, TotalLossKeepsInitialContent) {
    Network net(ChannelModel{1.0, 200.0, 5}, 4);
    Mailbox<int> box(4, 7);
    for (int round = 0; round < 20; ++round) {
        const auto p = payload(4, round);
        net.deliver_round(std::span<const int>(p), box, Direction::Uplink, round);
        net.end_round();
    }
    for (int e = 0; e < 4; ++e) {
        EXPECT_EQ(box.value(e), 7);
        EXPECT_EQ(box.stamp(e), -1);
    }
    EXPECT_DOUBLE_EQ(stale_fraction(net.stats()), 1.0);
}

TEST(Network, SeededLossReplaysExactly) {
    auto run = [](std::uint64_t seed) {
        Network net(ChannelModel{0.5, 200.0, seed}, 16);
        Mailbox<int> box(16, 0);
        for (int round = 0; round < 40; ++round) {
            const auto p = payload(16, round);
            net.deliver_round(std::span<const int>(p), box, Direction::Downlink, round);
            net.deliver_round(std::span<const int>(p), box, Direction::Uplink, round);
            net.end_round();
        }
        return net.drop_bitmap();
    };
    EXPECT_EQ(run(9), run(9));
    EXPECT_NE(run(9), run(10));
}

TEST(Network, DropRateMatchesProbability) {
    for (double p : {0.1, 0.4, 0.8}) {
        Network net(ChannelModel{p, 200.0, 77}, 100);
        long long drops = 0;
        for (int round = 0; round < 200; ++round)
            for (int e = 0; e < 100; ++e) drops += net.dropped(round, Direction::Uplink, e);
        EXPECT_NEAR(static_cast<double>(drops) / 20000.0, p, 0.02);
    }
}

TEST(Network, DirectionsDropIndependently) {
    Network net(ChannelModel{0.5, 200.0, 3}, 50);
    int differ = 0;
    for (int round = 0; round < 40; ++round)
        for (int e = 0; e < 50; ++e)
            differ += net.dropped(round, Direction::Downlink, e) != net.dropped(round, Direction::Uplink, e);
    EXPECT_GT(differ, 600);
    EXPECT_LT(differ, 1400);
}

TEST(Network, BitmapFormat) {
    Network net(ChannelModel{1.0, 0.0, 1}, 3);
    Mailbox<int> box(3, 0);
    const auto p = payload(3, 0);
    net.deliver_round(std::span<const int>(p), box, Direction::Downlink, 0);
    net.deliver_round(std::span<const int>(p), box, Direction::Uplink, 0);
    EXPECT_EQ(net.drop_bitmap(), "0 down 111\n0 up 111\n");
}

TEST(Network, RejectsBadChannel) {
    EXPECT_THROW(Network(ChannelModel{1.5, 200.0, 0}, 3), InvalidConfig);
    EXPECT_THROW(Network(ChannelModel{-0.1, 200.0, 0}, 3), InvalidConfig);
    EXPECT_THROW(Network(ChannelModel{0.1, -1.0, 0}, 3), InvalidConfig);
    Network net(ChannelModel{}, 3);
    Mailbox<int> box(2, 0);
    const auto p = payload(3, 0);
    EXPECT_THROW(net.deliver_round(std::span<const int>(p), box, Direction::Uplink, 0), Error);
}

}  // namespace
}  // namespace cpark
