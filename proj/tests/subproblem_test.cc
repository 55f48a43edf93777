#include "cpark/subproblem.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cpark {
namespace {

using testing::InstanceBuilder;

TEST(Subproblem, ZeroPricesTakeTheWholeWindow) {
    InstanceBuilder b(10);
    b.facility(3);
    b.facility(3);
    const AvId k = b.av(2, 8);
    b.plan(k, 0, 1, 1, 2).plan(k, 1, 0, 0, 2);  // windows [3, 6] and [2, 7]
    const Instance inst = b.build();
    const SubproblemResult r = solve_subproblem(k, inst, PriceVector::zeros(inst));
    EXPECT_EQ(r.facility, 1);
    EXPECT_EQ(r.slots, (std::vector<Slot>{2, 3, 4, 5, 6, 7}));
    EXPECT_DOUBLE_EQ(r.value, 6.0);
}

TEST(Subproblem, NegativeSlotsOnlyToReachMinimumStay) {
    InstanceBuilder b(6);
    b.facility(3);
    const AvId k = b.av(1, 7);
    b.plan(k, 0, 0, 0, 3);
    const Instance inst = b.build();
    PriceVector p = PriceVector::zeros(inst);
    p.hi(0, 1) = 3.0;   // -2
    p.hi(0, 2) = 1.5;   // -0.5
    p.hi(0, 3) = 1.25;  // -0.25
    p.hi(0, 4) = 1.5;   // -0.5
    p.hi(0, 5) = 2.0;   // -1
    p.hi(0, 6) = 0.5;   // 0.5
    const SubproblemResult r = solve_subproblem(k, inst, p);
    EXPECT_EQ(r.slots, (std::vector<Slot>{2, 3, 6}));  // slot 2 beats slot 4 on the tie
    EXPECT_DOUBLE_EQ(r.value, -0.25);
}

TEST(Subproblem, ZeroCoefficientSlotsAreKept) {
    InstanceBuilder b(4);
    b.facility(3);
    const AvId k = b.av(1, 5);
    const Instance inst = b.build();
    PriceVector p = PriceVector::zeros(inst);
    p.hi(0, 2) = 1.0;
    p.hi(0, 3) = 2.0;
    const SubproblemResult r = solve_subproblem(k, inst, p);
    EXPECT_EQ(r.slots, (std::vector<Slot>{1, 2, 4}));
    EXPECT_DOUBLE_EQ(r.value, 2.0);
}

TEST(Subproblem, DemandPricesRaiseTheValue) {
    InstanceBuilder b(4);
    b.facility(3);
    b.facility(3);
    const AvId k = b.av(1, 5);
    const Instance inst = b.build();
    PriceVector p = PriceVector::zeros(inst);
    p.lo(1, 4) = 0.5;
    const SubproblemResult r = solve_subproblem(k, inst, p);
    EXPECT_EQ(r.facility, 1);
    EXPECT_DOUBLE_EQ(r.value, 4.5);
}

TEST(Subproblem, EqualValuesPickLowestFacility) {
    InstanceBuilder b(4);
    b.facility(3);
    b.facility(3);
    b.facility(3);
    const AvId k = b.av(1, 5);
    b.legs_km(k, 0, 3.0, 3.0);  // too far
    const Instance inst = b.build();
    EXPECT_EQ(solve_subproblem(k, inst, PriceVector::zeros(inst)).facility, 1);
}

TEST(Subproblem, NoFeasibleFacilityThrows) {
    InstanceBuilder b(4);
    b.facility(3);
    const AvId k = b.av(1, 3);
    b.plan(k, 0, 0, 0, 3);  // window [1, 2]
    const Instance inst = b.build();
    EXPECT_THROW(solve_subproblem(k, inst, PriceVector::zeros(inst)), AvInfeasible);
    EXPECT_THROW(brute_subproblem(k, inst, PriceVector::zeros(inst)), AvInfeasible);
    try {
        solve_subproblem(k, inst, PriceVector::zeros(inst));
    } catch (const AvInfeasible& e) {
        EXPECT_EQ(e.av(), k);
        EXPECT_EQ(e.exit_code(), ExitCode::Infeasible);
    }
}

TEST(Subproblem, BruteForceRefusesLongWindows) {
    InstanceBuilder b(30);
    b.facility(3);
    b.av(1, 31);
    const Instance inst = b.build();
    EXPECT_THROW(brute_subproblem(0, inst, PriceVector::zeros(inst)), OracleLimit);
}

TEST(Subproblem, MatchesExhaustiveSearch) {
    Rng rng(2024);
    int trials = 0;
    for (std::uint64_t seed = 1; trials < 1200; ++seed) {
        const Instance inst = generate_instance(testing::small_config(6, 3, 12, seed));
        for (int round = 0; round < 4; ++round) {
            const PriceVector p = testing::random_prices(inst, rng);
            for (AvId k = 0; k < inst.num_avs(); ++k, ++trials) {
                const SubproblemResult fast = solve_subproblem(k, inst, p);
                const SubproblemResult slow = brute_subproblem(k, inst, p);
                ASSERT_EQ(fast, slow) << "seed " << seed << " av " << k;
            }
        }
    }
}

TEST(Subproblem, LowerPricesNeverLowerTheValue) {
    Rng rng(8);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Instance inst = generate_instance(testing::small_config(5, 2, 16, seed));
        const PriceVector p = testing::random_prices(inst, rng);
        PriceVector cheaper = p;
        for (FacilityId f = 0; f < inst.num_facilities(); ++f)
            for (Slot t = 1; t <= inst.slots(); ++t)
                if (rng.uniform_int(0, 1) == 1) cheaper.hi(f, t) = std::max(0.0, cheaper.hi(f, t) - 0.5);
        for (AvId k = 0; k < inst.num_avs(); ++k)
            EXPECT_GE(solve_subproblem(k, inst, cheaper).value, solve_subproblem(k, inst, p).value);
    }
}

TEST(Subproblem, CsvRow) {
    SubproblemResult r{3, 1, {4, 5, 7}, 2.5};
    EXPECT_EQ(subproblem_csv_header(), "av,facility,slots,value");
    EXPECT_EQ(to_csv(r), "3,1,4 5 7,2.5");
}

}  // namespace
}  // namespace cpark
