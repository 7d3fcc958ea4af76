#include <gtest/gtest.h>

#include <vector>

#include "golearn/rng.hpp"

using namespace golearn;

TEST(Rng, SameStreamReproducesDraws) {
    NormalSource a(RngStream{42, 7});
    NormalSource b(RngStream{42, 7});
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DistinctStreamsDiffer) {
    NormalSource a(RngStream{42, 7});
    NormalSource b(RngStream{42, 8});
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a() == b();
    EXPECT_EQ(equal, 0);
}

TEST(Rng, ForIndexXorsSeed) {
    const RngStream s = RngStream::for_index(100, 5);
    EXPECT_EQ(s.seed, 100u);
    EXPECT_EQ(s.stream_id, 100u ^ 5u);
}

TEST(Rng, ChildIsDeterministicAndDistinct) {
    const RngStream s{1, 2};
    EXPECT_EQ(s.child(3), s.child(3));
    EXPECT_NE(s.child(3), s.child(4));
}

TEST(Rng, Mix64Avalanches) {
    EXPECT_NE(mix64(0), mix64(1));
    EXPECT_EQ(mix64(12345), mix64(12345));
}

TEST(Rng, NormalMomentsAreStandard) {
    NormalSource n(RngStream{9, 0});
    const int count = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < count; ++i) {
        const double v = n();
        s1 += v;
        s2 += v * v;
    }
    EXPECT_NEAR(s1 / count, 0.0, 3.0 / std::sqrt(count));
    EXPECT_NEAR(s2 / count, 1.0, 3.0 * std::sqrt(2.0 / count));
}
