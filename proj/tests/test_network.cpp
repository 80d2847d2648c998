#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "relibat/network.hpp"
#include "support.hpp"

using namespace relibat;
using testing_support::bridge;
using testing_support::from_mask;

TEST(ParseNetwork, BridgeTopology)
{
    const Network net = bridge();
    EXPECT_EQ(net.node_count(), 4u);
    ASSERT_EQ(net.arc_count(), 5u);
    const std::vector<Arc> expected = {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}};
    for (std::size_t i = 0; i < 5; ++i)
    {
        EXPECT_EQ(net.arc(i).u, expected[i].u);
        EXPECT_EQ(net.arc(i).v, expected[i].v);
    }
    EXPECT_EQ(net.source(), 1u);
    EXPECT_EQ(net.sink(), 4u);
    EXPECT_FALSE(net.initial_reliability().has_value());
}

TEST(ParseNetwork, SmallestNetwork)
{
    const Network net = parse_network("2 1\n1 2\n");
    EXPECT_EQ(net.node_count(), 2u);
    EXPECT_EQ(net.arc_count(), 1u);
}

TEST(ParseNetwork, CommentsBlankLinesAndProbabilities)
{
    const Network net = parse_network("# header comment\n\n3 2  # nodes arcs\n1 2 0.9\n\n2 3 0.25\n");
    ASSERT_TRUE(net.initial_reliability().has_value());
    EXPECT_EQ(*net.initial_reliability(), (std::vector<double>{0.9, 0.25}));
}

TEST(ParseNetwork, SelfLoopReportsLine)
{
    try
    {
        parse_network("2 2\n1 2\n1 1\n");
        FAIL() << "self-loop accepted";
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
    }
}

TEST(ParseNetwork, RejectsMalformedInput)
{
    EXPECT_THROW(parse_network("3 2\n1 2\n2 1\n"), ParseError);          // duplicate unordered pair
    EXPECT_THROW(parse_network("3 2\n1 2\n2 4\n"), ParseError);          // node out of range
    EXPECT_THROW(parse_network("3 2\n1 2\n2 x\n"), ParseError);          // not a number
    EXPECT_THROW(parse_network("3 2\n1 2\n"), ParseError);               // too few arcs
    EXPECT_THROW(parse_network("3 1\n1 2\n2 3\n"), ParseError);          // too many arcs
    EXPECT_THROW(parse_network("3 2\n1 2 0.5\n2 3\n"), ParseError);      // p0 on some arcs only
    EXPECT_THROW(parse_network("3 2\n1 2 1.5\n2 3 0.5\n"), ParseError);  // p0 out of range
    EXPECT_THROW(parse_network("4 2\n1 2\n2 4\n"), ParseError);          // node 3 isolated
    EXPECT_THROW(parse_network(""), ParseError);
}

TEST(ParseNetwork, ErrorLineNumbersCountCommentsAndBlanks)
{
    try
    {
        parse_network("# c\n\n3 2\n1 2\n\n2 9\n");
        FAIL();
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.line(), 6u);
    }
}

TEST(LoadNetwork, ReadsFileAndReportsMissing)
{
    const auto dir = testing_support::scratch_dir("network");
    const auto path = (dir / "b.net").string();
    std::ofstream(path) << "4 5\n1 2\n1 3\n2 3\n2 4\n3 4\n";
    EXPECT_EQ(load_network(path).arc_count(), 5u);
    EXPECT_THROW(load_network((dir / "missing.net").string()), std::runtime_error);
}

TEST(Network, IncidenceListsCoverEveryArcTwice)
{
    const Network net = bridge();
    std::vector<int> seen(net.arc_count(), 0);
    for (std::uint32_t v = 1; v <= net.node_count(); ++v)
    {
        for (const auto& inc : net.incident(v))
        {
            const Arc& a = net.arc(inc.arc);
            EXPECT_TRUE((a.u == v && a.v == inc.node) || (a.v == v && a.u == inc.node));
            ++seen[inc.arc];
        }
    }
    for (int count : seen)
    {
        EXPECT_EQ(count, 2);
    }
}

TEST(VectorProbability, ProductRule)
{
    const std::vector<double> p = {0.9, 0.8};
    EXPECT_NEAR(vector_probability(StateVector{1, 0}, p), 0.18, 1e-15);
    EXPECT_NEAR(vector_probability(StateVector{1, 1}, p), 0.72, 1e-15);
    EXPECT_EQ(vector_probability(StateVector{1, 1, 1}, std::vector<double>{1.0, 1.0, 1.0}), 1.0);
    EXPECT_THROW(vector_probability(StateVector{1, 1, 1}, p), std::invalid_argument);
}

TEST(SupervectorProbability, PrefixProduct)
{
    const std::vector<double> p = {0.9, 0.8, 0.7, 0.6, 0.5};
    EXPECT_NEAR(supervector_probability(Supervector{0, 1}, p), 0.08, 1e-15);
    EXPECT_EQ(supervector_probability(Supervector{}, p), 1.0);
    const StateVector x{1, 0, 1, 1, 0};
    EXPECT_EQ(supervector_probability(Supervector(x.bits()), p), vector_probability(x, p));
    EXPECT_THROW(supervector_probability(Supervector{1, 1, 1}, std::vector<double>{0.5, 0.5}),
                 std::invalid_argument);
}

TEST(VectorProbability, SumsToOneOverAllStates)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t m = 1; m <= 12; ++m)
    {
        std::vector<double> p(m);
        for (auto& v : p)
        {
            v = u(rng);
        }
        double total = 0.0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask)
        {
            total += vector_probability(from_mask(mask, m), p);
        }
        EXPECT_NEAR(total, 1.0, 1e-12) << "m=" << m;

        double super_total = 0.0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask)
        {
            super_total += supervector_probability(Supervector(from_mask(mask, m).bits()), p);
        }
        EXPECT_NEAR(super_total, 1.0, 1e-12);
    }
}

TEST(VectorProbability, InvariantUnderFlipAndComplement)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const std::size_t m = 1 + rng() % 10;
        std::vector<double> p(m);
        for (auto& v : p)
        {
            v = u(rng);
        }
        StateVector x = from_mask(rng(), m);
        const double before = vector_probability(x, p);
        const std::size_t i = rng() % m;
        x.set(i, !x[i]);
        p[i] = 1.0 - p[i];
        EXPECT_NEAR(vector_probability(x, p), before, 1e-15);
    }
}

TEST(TimeDistribution, RowsIncludeInitialStep)
{
    TimeDistribution d(3, 2);
    EXPECT_EQ(d.steps(), 3u);
    d.row(3)[1] = 0.25;
    EXPECT_EQ(d.at(3, 1), 0.25);
    EXPECT_THROW(d.row(4), std::out_of_range);
}

TEST(BinaryVector, RejectsNonBinaryEntries)
{
    EXPECT_THROW((StateVector{0, 2}), std::invalid_argument);
    EXPECT_EQ((StateVector{1, 0, 1}).to_string(), "101");
}
