#include <gtest/gtest.h>

#include "conexp/properties.hpp"

using namespace conexp;
using namespace conexp::properties;

TEST(Properties, ClosureHoldsOnSmallRanges) {
    for (const auto& r : closure_suites({Beta(1, 2), Beta(3, 7)}, 3)) {
        EXPECT_GT(r.checked, 0) << r.name;
        EXPECT_TRUE(r.pass()) << r.name << ": " << (r.examples.empty() ? "" : r.examples.front().detail);
    }
}

TEST(Properties, MutatedPredicateIsCaught) {
    const auto r = closure_suites({Beta(2, 3)}, 2, Predicates::mutated());
    EXPECT_GT(r[0].failures, 0);
    ASSERT_FALSE(r[0].examples.empty());
    EXPECT_NE(r[0].examples.front().detail.find("m=1"), std::string::npos);
}

TEST(Properties, InversionAndLogIdentity) {
    gen::Rng rng(3);
    EXPECT_TRUE(inversion_suite(rng, 100, 10).pass());
    const auto l = log_identity_suite({Beta(1, 3), Beta(5, 7)}, 20);
    EXPECT_EQ(l.checked, 40);
    EXPECT_TRUE(l.pass());
}

TEST(Properties, BootstrapSuitesAndSeedReproducibility) {
    gen::Rng a(9), b(9);
    const auto ra = bootstrap_suites(a, 10), rb = bootstrap_suites(b, 10);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        EXPECT_TRUE(ra[i].pass()) << ra[i].name;
        EXPECT_EQ(ra[i].checked, rb[i].checked);
    }
    gen::Rng c(4), d(4);
    EXPECT_EQ(random_betas(c, 10), random_betas(d, 10));
}
