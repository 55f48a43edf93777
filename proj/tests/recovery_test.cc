#include "cpark/recovery.hpp"

#include <gtest/gtest.h>

#include "cpark/subproblem.hpp"
#include "test_util.hpp"

namespace cpark {
namespace {

using testing::InstanceBuilder;

TEST(RecoverPrimal, FeasibleInputIsUntouched) {
    InstanceBuilder b(4);
    b.facility(1);
    b.av(1, 5);
    const Instance inst = b.build();
    Assignment a(1);
    a[0] = {0, {2, 3}};
    const RecoveryResult r = recover_primal(inst, a);
    EXPECT_EQ(r.assignment, a);
    EXPECT_TRUE(r.trace.empty());
}

TEST(RecoverPrimal, OverflowShrinksTheShorterWindow) {
    InstanceBuilder b(6);
    b.facility(1);
    b.av(1, 7);  // window [1, 6]
    b.av(3, 7);  // window [3, 6]
    const Instance inst = b.build();
    Assignment a(2);
    a[0] = {0, {1, 2, 3}};
    a[1] = {0, {3, 4, 5, 6}};
    const RecoveryResult r = recover_primal(inst, a);
    ASSERT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.trace.moves[0], (RepairMove{MoveKind::OverflowRemove, 1, 0, 0, {4, 5, 6}}));
    EXPECT_EQ(objective(r.assignment), 6);
    EXPECT_TRUE(check_feasibility(inst, r.assignment).empty());
}

TEST(RecoverPrimal, OverflowReassignsWhenStayWouldBreak) {
    InstanceBuilder b(4);
    b.facility(1);
    b.facility(2);
    b.av(1, 5);
    b.av(1, 5);
    b.plan(0, 0, 0, 0, 4).plan(1, 0, 0, 0, 4).plan(0, 1, 0, 0, 3).plan(1, 1, 0, 0, 3);
    const Instance inst = b.build();
    Assignment a(2);
    a[0] = {0, {1, 2, 3, 4}};
    a[1] = {0, {1, 2, 3, 4}};
    const RecoveryResult r = recover_primal(inst, a);
    ASSERT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.trace.moves[0], (RepairMove{MoveKind::Reassign, 0, 0, 1, {1, 2, 3}}));
    EXPECT_TRUE(check_feasibility(inst, r.assignment).empty());
}

TEST(RecoverPrimal, DeficitPullsTheLongestFreeWindow) {
    InstanceBuilder b(6);
    b.facility(2, {0, 0, 1, 0, 0, 0});
    b.facility(2);
    b.av(1, 7);  // window [1, 6]
    b.av(2, 5);  // window [2, 4]
    const Instance inst = b.build();
    Assignment a(2);
    a[0] = {1, {1, 2}};
    a[1] = {1, {2, 3}};
    const RecoveryResult r = recover_primal(inst, a);
    ASSERT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.trace.moves[0], (RepairMove{MoveKind::DeficitMove, 0, 1, 0, {1, 2, 3, 4, 5, 6}}));
    EXPECT_EQ(objective(r.assignment), 8);
}

TEST(RecoverPrimal, UnfixableDeficitFailsWithTrace) {
    InstanceBuilder b(4);
    b.facility(2, {2, 0, 0, 0});
    b.facility(2, {0, 1, 0, 0});
    b.av(1, 5);
    b.av(3, 5);  // cannot reach slot 1
    const Instance inst = b.build();
    Assignment a(2);
    a[0] = {1, {2}};
    a[1] = {1, {3, 4}};
    try {
        recover_primal(inst, a);
        FAIL() << "expected RecoveryFailed";
    } catch (const RecoveryFailed& e) {
        EXPECT_EQ(e.exit_code(), ExitCode::Infeasible);
        ASSERT_FALSE(e.trace().empty());
        EXPECT_EQ(e.trace().moves.back().kind, MoveKind::Stuck);
        EXPECT_EQ(e.facility(), 0);
        EXPECT_EQ(e.slot(), 1);
    }
}

TEST(RecoverPrimal, PerAvViolationIsRejected) {
    InstanceBuilder b(4);
    b.facility(2);
    b.av(2, 5);
    const Instance inst = b.build();
    Assignment a(1);
    a[0] = {0, {1}};
    EXPECT_THROW(recover_primal(inst, a), RecoveryFailed);
}

TEST(RecoverPrimal, TraceReplaysAndOutputIsFeasible) {
    Rng rng(41);
    int repaired = 0;
    int failed = 0;
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
        const Instance inst = generate_instance(testing::small_config(10, 3, 12, seed));
        const PriceVector p = testing::random_prices(inst, rng);
        Assignment a(inst.num_avs());
        for (AvId k = 0; k < inst.num_avs(); ++k) {
            const SubproblemResult s = solve_subproblem(k, inst, p);
            a[k] = {s.facility, s.slots};
        }
        try {
            const RecoveryResult r = recover_primal(inst, a);
            EXPECT_TRUE(check_feasibility(inst, r.assignment).empty()) << "seed " << seed;
            EXPECT_EQ(replay(a, r.trace), r.assignment);
            for (const RepairMove& m : r.trace.moves) EXPECT_NE(m.kind, MoveKind::Stuck);
            ++repaired;
        } catch (const RecoveryFailed& e) {
            EXPECT_FALSE(e.trace().empty());
            ++failed;
        }
    }
    EXPECT_GT(repaired, 40);
    (void)failed;
}

TEST(RepairTrace, Csv) {
    RepairTrace t;
    t.moves.push_back({MoveKind::Reassign, 2, 0, 1, {3, 4}});
    t.moves.push_back({MoveKind::Stuck, -1, 1, 1, {5}});
    EXPECT_EQ(to_csv(t), "step,kind,av,from,to,slots\n0,Reassign,2,0,1,3 4\n1,Stuck,-1,1,1,5\n");
}

}  // namespace
}  // namespace cpark
