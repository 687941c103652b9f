#include <gtest/gtest.h>

#include <sstream>

#include "conexp/serialize.hpp"
#include "support.hpp"

using namespace conexp;

TEST(Serialize, ExactRoundTrip) {
    conexp::testing::Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const Beta b = conexp::testing::random_beta(rng);
        auto e = conexp::testing::random_exact_expansion(rng, b, 6, 5).truncated(Order::at(8, 1));
        e.add_term(TermIndex{2, 1, 0, 1, Parity::Sin}, RationalFunction(3, 7), 1);
        const json j = to_json(e);
        const auto back = expansion_from_json<RationalFunction>(json::parse(j.dump()));
        EXPECT_EQ(back, e);
        EXPECT_EQ(to_json(back).dump(), j.dump());
    }
}

TEST(Serialize, LargeIntegersAsStrings) {
    const Beta b(1, 2);
    const mpz_class big("123456789012345678901234567890");
    const auto e = Expansion<RationalFunction>::constant(b, RationalFunction(mpq_class(big, 7)));
    const json j = to_json(e);
    EXPECT_TRUE(j["terms"][0]["coeff"]["num"][0].is_string());
    EXPECT_EQ(expansion_from_json<RationalFunction>(j), e);
}

TEST(Serialize, FloatRoundTripAndUnitFolding) {
    const Beta b(2, 3);
    Expansion<double> e(b, Order::at(4));
    e.add_term(TermIndex{2, 0, 0, 0}, 0.125);
    e.add_term(TermIndex{0, 1, 0, 1}, -1.0 / 3);
    EXPECT_EQ(expansion_from_json<double>(json::parse(to_json(e).dump())), e);
    json j = to_json(e);
    for (auto& t : j["terms"])
        if (t["a"] == 0) t["u_power"] = 1;
    const auto f = expansion_from_json<double>(j);
    EXPECT_DOUBLE_EQ(f.coefficient(TermIndex{0, 1, 0, 1}), -1.0 / 3 * std::pow(2.0 / 3, 1.5));
}

TEST(Serialize, InfiniteOrderAndRationalStrings) {
    const json j = json::parse(R"({"beta":"1/2","order":"inf","terms":[{"a":2,"k":0,"coeff":"3/4"}]})");
    const auto e = expansion_from_json<RationalFunction>(j);
    EXPECT_TRUE(e.order().infinite);
    EXPECT_EQ(e.coefficient(TermIndex{2, 0, 0, 0}), RationalFunction(3, 4));
}

TEST(Serialize, Errors) {
    EXPECT_THROW(expansion_from_json<RationalFunction>(json::parse(R"({"order":"inf"})")), FormatError);
    EXPECT_THROW(expansion_from_json<RationalFunction>(json::parse(R"({"beta":"3/2"})")), InvalidBeta);
    EXPECT_THROW(expansion_from_json<RationalFunction>(
                     json::parse(R"({"beta":"1/2","terms":[{"a":0,"k":0,"l":0,"parity":"sin","coeff":1}]})")),
                 FormatError);
    EXPECT_THROW(expansion_from_json<RationalFunction>(
                     json::parse(R"({"beta":"1/2","terms":[{"a":0,"k":0,"coeff":{"num":[1],"den":[0]}}]})")),
                 FormatError);
    EXPECT_THROW(expansion_from_json<double>(
                     json::parse(R"({"beta":"1/2","terms":[{"a":0,"k":0,"coeff":{"num":[1],"den":[2]}}]})")),
                 FormatError);
}

TEST(Serialize, CsvTable) {
    const Beta b(1, 2);
    auto e = Expansion<RationalFunction>::monomial(b, TermIndex{0, 1, 0, 1}, RationalFunction(1, 2), 1);
    std::ostringstream os;
    write_csv_table(os, e);
    EXPECT_NE(os.str().find("2,0,1,0,1,cos,1,"), std::string::npos);
}
