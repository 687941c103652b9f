#include <gtest/gtest.h>

#include "conexp/rational_function.hpp"
#include "support.hpp"

using conexp::IntPoly;
using conexp::RationalFunction;

namespace {

RationalFunction b() { return RationalFunction::beta(); }

}  // namespace

TEST(IntPoly, ExactQuotient) {
    const IntPoly p = IntPoly::linear(2, 3) * IntPoly::linear(1, -1);  // (2b+3)(b-1)
    auto q = p.exact_quotient(IntPoly::linear(2, 3));
    ASSERT_TRUE(q);
    EXPECT_EQ(*q, IntPoly::linear(1, -1));
    EXPECT_FALSE(p.exact_quotient(IntPoly::linear(1, 5)));
}

TEST(RationalFunction, CancelsCommonFactors) {
    const RationalFunction x = (b() * b() - RationalFunction(1)) / (b() - RationalFunction(1));
    EXPECT_EQ(x, b() + RationalFunction(1));
    EXPECT_TRUE(x.expanded_denominator() == IntPoly::constant(1));
}

TEST(RationalFunction, InverseSplitsRationalRoots) {
    // ((2b + 1)^2 - 1) / b^2 = 4 (b + 1) / b, the Laplacian weight at a=2, k=1, l=1.
    const RationalFunction sigma = RationalFunction(2) + RationalFunction(1) / b();
    const RationalFunction w = sigma * sigma - RationalFunction(1) / (b() * b());
    EXPECT_EQ(w, RationalFunction(4) * (b() + RationalFunction(1)) / b());
    const RationalFunction inv = RationalFunction(1) / w;
    EXPECT_EQ(inv * w, RationalFunction(1));
    EXPECT_DOUBLE_EQ(inv.evaluate(0.5), 0.5 / (4 * 1.5));
}

TEST(RationalFunction, ZeroDivisionThrows) {
    EXPECT_THROW(RationalFunction(1) / RationalFunction(0), std::domain_error);
    EXPECT_THROW(RationalFunction(1, 0), std::domain_error);
}

TEST(RationalFunction, FieldLawsOnRandomElements) {
    conexp::testing::Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const auto x = conexp::testing::random_field_element(rng);
        const auto y = conexp::testing::random_field_element(rng);
        const auto z = conexp::testing::random_field_element(rng);
        EXPECT_EQ(x * (y + z), x * y + x * z);
        EXPECT_EQ((x / y) * y, x);
        EXPECT_EQ(x - x, RationalFunction(0));
        EXPECT_EQ(x + y, y + x);
        const mpq_class at(2, 7);
        EXPECT_EQ((x * y).evaluate(at), x.evaluate(at) * y.evaluate(at));
    }
}

TEST(RationalFunction, RationalConstants) {
    const RationalFunction q(6, -4);
    ASSERT_TRUE(q.is_rational());
    EXPECT_EQ(q.as_rational(), mpq_class(-3, 2));
    EXPECT_THROW(b().as_rational(), std::domain_error);
}
