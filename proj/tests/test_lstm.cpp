#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "relibat/lstm.hpp"
#include "relibat/rng.hpp"

using namespace relibat;

namespace {

SequenceBlock random_block(std::size_t steps, std::size_t features, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    SequenceBlock b;
    b.steps = steps;
    b.features = features;
    b.inputs.resize(steps * features);
    for (auto& x : b.inputs)
    {
        x = u(rng);
    }
    b.target = u(rng);
    return b;
}

LstmParams random_params(std::size_t eta, std::size_t h, std::mt19937_64& rng, double scale = 0.8)
{
    LstmParams p(eta, h);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& v : p.values())
    {
        v = u(rng);
    }
    return p;
}

}  // namespace

TEST(ParamCount, MatchesLayerFormula)
{
    const auto a = param_count(31, 10);
    EXPECT_EQ(a.first_layer, 1680u);
    EXPECT_EQ(a.second_layer, 11u);
    EXPECT_EQ(a.total, 1691u);
    EXPECT_EQ(param_count(171, 10).total, 7291u);
    EXPECT_EQ(param_count(1226, 10).first_layer, 49480u);
    EXPECT_EQ(param_count(1226, 10).total, 49491u);
    EXPECT_EQ(LstmParams(31, 10).size(), 1691u);
}

TEST(LstmParams, LayoutAndNames)
{
    LstmParams p(2, 3);
    EXPECT_EQ(p.input_weights(Gate::Forget).size(), 6u);
    EXPECT_EQ(p.recurrent_weights(Gate::Cell).size(), 9u);
    EXPECT_EQ(p.bias(Gate::Output).size(), 3u);
    EXPECT_EQ(p.output_weights().size(), 3u);
    EXPECT_EQ(p.parameter_name(0), "W_x_f[0,0]");
    EXPECT_EQ(p.parameter_name(p.size() - 1), "b_out");
    p.output_bias() = 0.25;
    EXPECT_EQ(p.values().back(), 0.25);
}

TEST(LstmParams, InitializationBoundsAndDeterminism)
{
    const auto p = LstmParams::initialize(6, 10, 3);
    EXPECT_EQ(p, LstmParams::initialize(6, 10, 3));
    EXPECT_NE(p, LstmParams::initialize(6, 10, 4));
    const double bound = 1.0 / std::sqrt(10.0);
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        for (double b : p.bias(static_cast<Gate>(g)))
        {
            EXPECT_EQ(b, 0.0);
        }
        for (double w : p.input_weights(static_cast<Gate>(g)))
        {
            EXPECT_LE(std::abs(w), bound);
        }
    }
    EXPECT_EQ(p.output_bias(), 0.0);
}

TEST(CellForward, ZeroParameters)
{
    const LstmParams p(3, 2);
    const auto step = cell_forward(p, std::vector<double>{0.3, -1.0, 2.0}, CellState::zero(2));
    for (std::size_t j = 0; j < 2; ++j)
    {
        EXPECT_EQ(step.gates.forget[j], 0.5);
        EXPECT_EQ(step.gates.input[j], 0.5);
        EXPECT_EQ(step.gates.output[j], 0.5);
        EXPECT_EQ(step.gates.candidate[j], 0.0);
        EXPECT_EQ(step.state.cell[j], 0.0);
        EXPECT_EQ(step.state.hidden[j], 0.0);
    }
}

TEST(CellForward, SaturatedForgetGateKeepsCell)
{
    LstmParams p(1, 1);
    p.bias(Gate::Forget)[0] = 20.0;
    p.bias(Gate::Input)[0] = -40.0;
    const CellState prev{{0.1}, {0.7}};
    const auto step = cell_forward(p, std::vector<double>{0.4}, prev);
    EXPECT_NEAR(step.gates.forget[0], 1.0, 1e-8);
    EXPECT_NEAR(step.state.cell[0], 0.7, 1e-8);
}

TEST(CellForward, ScalarHandEvaluation)
{
    LstmParams p(1, 1);
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        p.input_weights(static_cast<Gate>(g))[0] = 1.0;
        p.recurrent_weights(static_cast<Gate>(g))[0] = 1.0;
    }
    const auto step = cell_forward(p, std::vector<double>{1.0}, CellState::zero(1));
    const double s = 1.0 / (1.0 + std::exp(-1.0));
    EXPECT_NEAR(step.gates.forget[0], 0.731059, 1e-6);
    EXPECT_NEAR(step.gates.candidate[0], 0.761594, 1e-6);
    // C = sigma(1) * tanh(1) = 0.556770, H = sigma(1) * tanh(C) = 0.369606
    EXPECT_NEAR(step.state.cell[0], 0.556770, 1e-6);
    EXPECT_NEAR(step.state.hidden[0], 0.369606, 1e-6);
    EXPECT_DOUBLE_EQ(step.state.cell[0], s * std::tanh(1.0));
}

TEST(CellForward, GateRangesOnRandomInputs)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto p = random_params(4, 5, rng, 3.0);
        CellState state = CellState::zero(5);
        const auto block = random_block(6, 4, rng);
        for (std::size_t s = 0; s < 6; ++s)
        {
            const auto step = cell_forward(p, block.row(s), state);
            for (std::size_t j = 0; j < 5; ++j)
            {
                EXPECT_GE(step.gates.forget[j], 0.0);
                EXPECT_LE(step.gates.forget[j], 1.0);
                EXPECT_GE(step.gates.input[j], 0.0);
                EXPECT_LE(step.gates.input[j], 1.0);
                EXPECT_GE(step.gates.output[j], 0.0);
                EXPECT_LE(step.gates.output[j], 1.0);
                EXPECT_LE(std::abs(step.gates.candidate[j]), 1.0);
                EXPECT_LT(std::abs(step.state.hidden[j]), 1.0);
            }
            state = step.state;
        }
    }
}

TEST(CellForward, ShapeMismatch)
{
    const LstmParams p(3, 2);
    EXPECT_THROW(cell_forward(p, std::vector<double>{1.0}, CellState::zero(2)), std::invalid_argument);
    EXPECT_THROW(cell_forward(p, std::vector<double>{1, 2, 3}, CellState::zero(3)), std::invalid_argument);
}

TEST(Predict, ZeroParametersGiveOutputBias)
{
    LstmParams p(2, 3);
    p.output_bias() = -0.125;
    std::mt19937_64 rng(2);
    EXPECT_EQ(predict(p, random_block(5, 2, rng)), -0.125);
    EXPECT_THROW(predict_window(p, std::vector<double>(9, 0.0), 5), std::invalid_argument);
}

TEST(Predict, UnrollsRepeatedSteps)
{
    std::mt19937_64 rng(3);
    const auto p = random_params(2, 3, rng);
    const std::vector<double> row = {0.2, -0.1};
    std::vector<double> window;
    CellState state = CellState::zero(3);
    for (int s = 0; s < 5; ++s)
    {
        window.insert(window.end(), row.begin(), row.end());
        state = cell_forward(p, row, state).state;
    }
    double expected = p.output_bias();
    for (std::size_t j = 0; j < 3; ++j)
    {
        expected += p.output_weights()[j] * state.hidden[j];
    }
    EXPECT_DOUBLE_EQ(predict_window(p, window, 5), expected);
}

TEST(Loss, MeanSquaredError)
{
    LstmParams p(1, 1);
    std::vector<SequenceBlock> blocks(2);
    for (auto& b : blocks)
    {
        b.steps = 1;
        b.features = 1;
        b.inputs = {0.0};
    }
    blocks[0].target = 0.0;
    EXPECT_EQ(loss(p, std::span(blocks).first(1)), 0.0);
    blocks[0].target = -0.1;
    EXPECT_NEAR(loss(p, std::span(blocks).first(1)), 0.01, 1e-15);
    blocks[1].target = -0.3;
    EXPECT_NEAR(loss(p, blocks), 0.05, 1e-15);
    EXPECT_THROW(loss(p, std::span<const SequenceBlock>()), std::invalid_argument);
}

TEST(Gradients, ZeroAtPerfectFitAndOutputBiasClosedForm)
{
    std::mt19937_64 rng(4);
    const auto p = random_params(3, 2, rng);
    std::vector<SequenceBlock> blocks;
    for (int k = 0; k < 4; ++k)
    {
        blocks.push_back(random_block(5, 3, rng));
    }
    double mean_error = 0.0;
    for (const auto& b : blocks)
    {
        mean_error += predict(p, b) - b.target;
    }
    mean_error /= blocks.size();
    EXPECT_NEAR(gradients(p, blocks).back(), 2.0 * mean_error, 1e-14);

    for (auto& b : blocks)
    {
        b.target = predict(p, b);
    }
    for (double g : gradients(p, blocks))
    {
        EXPECT_EQ(g, 0.0);
    }
}

TEST(Gradients, MatchCentralDifferences)
{
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial)
    {
        const std::size_t eta = 1 + rng() % 4;
        const std::size_t h = 1 + rng() % 3;
        const std::size_t count = 1 + rng() % 7;
        LstmParams p = random_params(eta, h, rng);
        std::vector<SequenceBlock> blocks;
        for (std::size_t k = 0; k < count; ++k)
        {
            blocks.push_back(random_block(5, eta, rng));
        }
        const auto g = gradients(p, blocks);
        for (std::size_t j = 0; j < p.size(); ++j)
        {
            const double saved = p.values()[j];
            const double step = 1e-5;
            p.values()[j] = saved + step;
            const double up = loss(p, blocks);
            p.values()[j] = saved - step;
            const double down = loss(p, blocks);
            p.values()[j] = saved;
            const double numeric = (up - down) / (2 * step);
            const double scale = std::max({std::abs(numeric), std::abs(g[j]), 1e-6});
            worst = std::max(worst, std::abs(numeric - g[j]) / scale);
        }
    }
    EXPECT_LE(worst, 1e-5);
}

TEST(Gradients, WorkerCountDoesNotChangeBits)
{
    std::mt19937_64 rng(6);
    const auto p = random_params(4, 3, rng);
    std::vector<SequenceBlock> blocks;
    for (int k = 0; k < 37; ++k)
    {
        blocks.push_back(random_block(5, 4, rng));
    }
    EXPECT_EQ(gradients(p, blocks, 1), gradients(p, blocks, 8));
}

TEST(Gradients, NonFiniteIsNamed)
{
    std::mt19937_64 rng(7);
    auto p = random_params(2, 2, rng);
    p.output_weights()[1] = std::numeric_limits<double>::infinity();
    std::vector<SequenceBlock> blocks{random_block(5, 2, rng)};
    try
    {
        gradients(p, blocks);
        FAIL() << "non-finite gradient accepted";
    }
    catch (const NumericalError& e)
    {
        EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
    }
}

TEST(Adam, FirstStepByHand)
{
    AdamState adam(1);
    std::vector<double> x = {0.0};
    adam.step(x, std::vector<double>{1.0});
    EXPECT_EQ(adam.steps(), 1u);
    EXPECT_NEAR(adam.first_moment()[0], 0.1, 1e-15);
    EXPECT_NEAR(adam.second_moment()[0], 0.001, 1e-15);
    EXPECT_NEAR(x[0], -0.001 / std::sqrt(1.0 + 1e-8), 1e-18);
    EXPECT_NEAR(x[0], -0.000999999995, 1e-15);
}

TEST(Adam, ZeroGradientLeavesParameters)
{
    AdamState adam(3);
    std::vector<double> x = {0.5, -1.0, 2.0};
    adam.step(x, std::vector<double>(3, 0.0));
    EXPECT_EQ(x, (std::vector<double>{0.5, -1.0, 2.0}));
}

TEST(Adam, StepOpposesGradientAndIsScaleFree)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> g(50);
    for (auto& v : g)
    {
        v = n(rng);
    }
    std::vector<double> scaled(g);
    for (auto& v : scaled)
    {
        v *= 1000.0;
    }
    AdamState a(50), b(50);
    std::vector<double> x(50, 0.0), y(50, 0.0);
    a.step(x, g);
    b.step(y, scaled);
    for (std::size_t i = 0; i < 50; ++i)
    {
        EXPECT_LT(x[i] * g[i], 0.0);
        // m_hat / sqrt(v_hat + eps) is scale-free except for eps
        const double eps_effect = 0.001 * (1.0 - std::abs(g[i]) / std::sqrt(g[i] * g[i] + 1e-8));
        EXPECT_NEAR(x[i], y[i], eps_effect + 1e-15);
        EXPECT_GE(a.second_moment()[i], 0.0);
    }
}

TEST(Train, ZeroEpochsReturnsInitialParameters)
{
    std::mt19937_64 rng(9);
    std::vector<SequenceBlock> blocks{random_block(5, 3, rng), random_block(5, 3, rng)};
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 12;
    const auto r = train(blocks, {}, cfg);
    EXPECT_TRUE(r.history.empty());
    EXPECT_EQ(r.params, LstmParams::initialize(3, cfg.hidden_dim, 12));
}

TEST(Train, FullBatchMatchesManualAdamLoop)
{
    std::mt19937_64 rng(10);
    std::vector<SequenceBlock> blocks;
    for (int k = 0; k < 6; ++k)
    {
        blocks.push_back(random_block(5, 2, rng));
    }
    TrainConfig cfg;
    cfg.hidden_dim = 3;
    cfg.epochs = 4;
    cfg.batch_size = 100;
    cfg.patience = 0;
    cfg.seed = 1;
    const auto r = train(blocks, {}, cfg);

    auto p = LstmParams::initialize(2, 3, 1);
    AdamState adam(p.size(), cfg.adam);
    for (int e = 0; e < 4; ++e)
    {
        adam.step(p.values(), gradients(p, blocks));
    }
    EXPECT_EQ(r.params, p);
    ASSERT_EQ(r.history.size(), 4u);
    EXPECT_EQ(r.history.back().train, loss(p, blocks));
    EXPECT_TRUE(std::isnan(r.history.back().test));
}

TEST(Train, DeterministicAndLossFalls)
{
    std::mt19937_64 rng(11);
    std::vector<SequenceBlock> train_blocks, test_blocks;
    for (int k = 0; k < 40; ++k)
    {
        auto b = random_block(5, 3, rng);
        b.target = 0.3 * b.row(4)[0] - 0.2 * b.row(3)[1];
        (k < 36 ? train_blocks : test_blocks).push_back(b);
    }
    TrainConfig cfg;
    cfg.hidden_dim = 4;
    cfg.epochs = 150;
    cfg.batch_size = 8;
    cfg.adam.learning_rate = 0.01;
    cfg.seed = 3;
    const auto a = train(train_blocks, test_blocks, cfg);
    cfg.workers = 4;
    const auto b = train(train_blocks, test_blocks, cfg);
    EXPECT_EQ(a.params, b.params);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
    {
        EXPECT_EQ(a.history[i].train, b.history[i].train);
        EXPECT_EQ(a.history[i].test, b.history[i].test);
        EXPECT_EQ(a.history[i].epoch, i + 1);
    }
    EXPECT_LT(a.history.back().train, 0.25 * a.history.front().train);
    EXPECT_FALSE(std::isnan(a.history.back().test));
}

TEST(Train, EarlyStopWhenLossStalls)
{
    // a constant target reachable through the output bias alone
    std::mt19937_64 rng(12);
    std::vector<SequenceBlock> blocks;
    for (int k = 0; k < 4; ++k)
    {
        auto b = random_block(5, 1, rng);
        std::fill(b.inputs.begin(), b.inputs.end(), 0.0);
        b.target = 0.0;
        blocks.push_back(b);
    }
    TrainConfig cfg;
    cfg.hidden_dim = 2;
    cfg.epochs = 500;
    cfg.patience = 20;
    const auto r = train(blocks, {}, cfg);
    EXPECT_LT(r.history.size(), 500u);
    EXPECT_GE(r.history.size(), 21u);
}

TEST(Train, RejectsBadInput)
{
    TrainConfig cfg;
    EXPECT_THROW(train({}, {}, cfg), std::invalid_argument);
    std::mt19937_64 rng(13);
    std::vector<SequenceBlock> blocks{random_block(5, 2, rng)};
    cfg.batch_size = 0;
    EXPECT_THROW(train(blocks, {}, cfg), std::invalid_argument);
}

TEST(Train, NonFiniteLossAborts)
{
    std::mt19937_64 rng(14);
    std::vector<SequenceBlock> blocks{random_block(5, 2, rng)};
    blocks[0].target = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.hidden_dim = 2;
    cfg.epochs = 3;
    EXPECT_THROW(train(blocks, {}, cfg), NumericalError);
}
