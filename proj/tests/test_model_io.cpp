#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "relibat/model_io.hpp"

using namespace relibat;

namespace {

LstmModel sample_model()
{
    LstmModel m;
    m.params = LstmParams::initialize(3, 4, 77);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& v : m.params.values())
    {
        v += u(rng) * 1e-3;
    }
    m.window = 5;
    m.adam = {0.002, 0.85, 0.995, 1e-7};
    m.normalization = {{0.5, 0.1, 0.9}, {0.3, 0.2, 0.2}, {1.0 / 3.0, 0.01, 0.99}};
    return m;
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact)
{
    const auto m = sample_model();
    std::stringstream buffer;
    write_model(buffer, m);
    const auto back = read_model(buffer);
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.window, m.window);
    EXPECT_EQ(back.adam.learning_rate, m.adam.learning_rate);
    EXPECT_EQ(back.adam.epsilon, m.adam.epsilon);
    ASSERT_EQ(back.normalization.size(), 3u);
    EXPECT_EQ(back.normalization[2].mean, 1.0 / 3.0);
    EXPECT_EQ(back.target_stats().max, 0.99);
}

TEST(ModelIo, ParameterCountSurvivesSerialization)
{
    std::stringstream buffer;
    write_model(buffer, sample_model());
    std::size_t counted = 0;
    std::string line;
    bool in_tensor = false;
    while (std::getline(buffer, line))
    {
        std::istringstream fields(line);
        std::string first;
        fields >> first;
        if (first == "tensor")
        {
            in_tensor = true;
            continue;
        }
        if (first == "end")
        {
            break;
        }
        if (in_tensor)
        {
            ++counted;
            std::string rest;
            while (fields >> rest)
            {
                ++counted;
            }
        }
    }
    EXPECT_EQ(counted, param_count(3, 4).total);
}

TEST(ModelIo, ErrorsCarryLineNumbers)
{
    std::stringstream buffer;
    write_model(buffer, sample_model());
    std::string text = buffer.str();
    const auto pos = text.find("tensor W_h_f");
    text.replace(pos, 12, "tensor W_h_x");
    std::stringstream broken(text);
    try
    {
        read_model(broken);
        FAIL();
    }
    catch (const std::runtime_error& e)
    {
        EXPECT_NE(std::string(e.what()).find("model line"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("W_h_f"), std::string::npos);
    }

    std::stringstream version("relibat-lstm 9\n");
    EXPECT_THROW(read_model(version), std::runtime_error);
    std::stringstream truncated(buffer.str().substr(0, buffer.str().size() / 2));
    EXPECT_THROW(read_model(truncated), std::runtime_error);
}

TEST(ModelIo, NormalizationMustMatchInputs)
{
    auto m = sample_model();
    m.normalization.pop_back();
    std::stringstream buffer;
    EXPECT_THROW(write_model(buffer, m), std::invalid_argument);
}
