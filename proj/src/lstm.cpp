#include "relibat/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relibat/parallel.hpp"
#include "relibat/rng.hpp"

namespace relibat {

namespace {

constexpr const char* kGateSuffix[kGateCount] = {"f", "i", "o", "c"};

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t gate_index(Gate g) noexcept { return static_cast<std::size_t>(g); }

// Everything BPTT needs from one forward step.
struct StepCache
{
    std::span<const double> x;
    std::vector<double> h_prev, c_prev;
    std::vector<double> f, i, o, n;
    std::vector<double> c, tanh_c, h;
};

void check_rows(const LstmParams& params, std::span<const double> rows, std::size_t steps)
{
    if (steps == 0 || rows.size() != steps * params.input_dim())
    {
        throw std::invalid_argument("window has " + std::to_string(rows.size()) + " values; expected " +
                                    std::to_string(steps) + " rows of " + std::to_string(params.input_dim()) +
                                    " features");
    }
}

void forward_step(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                  std::span<const double> c_prev, StepCache& out)
{
    const std::size_t h = p.hidden_dim();
    const std::size_t eta = p.input_dim();
    std::vector<double>* gates[kGateCount] = {&out.f, &out.i, &out.o, &out.n};
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        const auto wx = p.input_weights(static_cast<Gate>(g));
        const auto wh = p.recurrent_weights(static_cast<Gate>(g));
        const auto b = p.bias(static_cast<Gate>(g));
        auto& act = *gates[g];
        act.resize(h);
        for (std::size_t r = 0; r < h; ++r)
        {
            double z = b[r];
            const double* wx_row = wx.data() + r * eta;
            for (std::size_t k = 0; k < eta; ++k)
            {
                z += wx_row[k] * x[k];
            }
            const double* wh_row = wh.data() + r * h;
            for (std::size_t k = 0; k < h; ++k)
            {
                z += wh_row[k] * h_prev[k];
            }
            act[r] = g == gate_index(Gate::Cell) ? std::tanh(z) : sigmoid(z);
        }
    }
    out.x = x;
    out.h_prev.assign(h_prev.begin(), h_prev.end());
    out.c_prev.assign(c_prev.begin(), c_prev.end());
    out.c.resize(h);
    out.tanh_c.resize(h);
    out.h.resize(h);
    for (std::size_t r = 0; r < h; ++r)
    {
        out.c[r] = out.f[r] * c_prev[r] + out.i[r] * out.n[r];
        out.tanh_c[r] = std::tanh(out.c[r]);
        out.h[r] = out.o[r] * out.tanh_c[r];
    }
}

double forward_window(const LstmParams& p, std::span<const double> rows, std::size_t steps,
                      std::vector<StepCache>& cache)
{
    const std::size_t h = p.hidden_dim();
    const std::size_t eta = p.input_dim();
    cache.resize(steps);
    std::vector<double> zero(h, 0.0);
    for (std::size_t t = 0; t < steps; ++t)
    {
        const auto x = rows.subspan(t * eta, eta);
        if (t == 0)
        {
            forward_step(p, x, zero, zero, cache[t]);
        }
        else
        {
            forward_step(p, x, cache[t - 1].h, cache[t - 1].c, cache[t]);
        }
    }
    const auto w_out = p.output_weights();
    double y = p.output_bias();
    for (std::size_t r = 0; r < h; ++r)
    {
        y += w_out[r] * cache[steps - 1].h[r];
    }
    return y;
}

// Adds d(scale * y)/d(params) to grad, where y is the window's prediction.
void backward_window(const LstmParams& p, const std::vector<StepCache>& cache, double scale,
                     std::vector<double>& grad)
{
    const std::size_t h = p.hidden_dim();
    const std::size_t eta = p.input_dim();
    const std::size_t n = p.size();
    const auto values = p.values();
    const auto offset_of = [&values](std::span<const double> block) {
        return static_cast<std::size_t>(block.data() - values.data());
    };

    const std::size_t out_w = offset_of(p.output_weights());
    const auto& last = cache.back();
    std::vector<double> dh(h), dc(h, 0.0);
    for (std::size_t r = 0; r < h; ++r)
    {
        grad[out_w + r] += scale * last.h[r];
        dh[r] = scale * p.output_weights()[r];
    }
    grad[n - 1] += scale;

    std::vector<double> dz[kGateCount];
    for (auto& v : dz)
    {
        v.resize(h);
    }
    std::vector<double> dh_prev(h);
    for (std::size_t t = cache.size(); t-- > 0;)
    {
        const auto& s = cache[t];
        for (std::size_t r = 0; r < h; ++r)
        {
            const double d_o = dh[r] * s.tanh_c[r];
            dc[r] += dh[r] * s.o[r] * (1.0 - s.tanh_c[r] * s.tanh_c[r]);
            const double d_f = dc[r] * s.c_prev[r];
            const double d_i = dc[r] * s.n[r];
            const double d_n = dc[r] * s.i[r];
            dz[0][r] = d_f * s.f[r] * (1.0 - s.f[r]);
            dz[1][r] = d_i * s.i[r] * (1.0 - s.i[r]);
            dz[2][r] = d_o * s.o[r] * (1.0 - s.o[r]);
            dz[3][r] = d_n * (1.0 - s.n[r] * s.n[r]);
            dc[r] *= s.f[r];
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t g = 0; g < kGateCount; ++g)
        {
            const Gate gate = static_cast<Gate>(g);
            const std::size_t wx_off = offset_of(p.input_weights(gate));
            const std::size_t wh_off = offset_of(p.recurrent_weights(gate));
            const std::size_t b_off = offset_of(p.bias(gate));
            const auto wh = p.recurrent_weights(gate);
            for (std::size_t r = 0; r < h; ++r)
            {
                const double z = dz[g][r];
                if (z == 0.0)
                {
                    continue;
                }
                double* gx = grad.data() + wx_off + r * eta;
                for (std::size_t k = 0; k < eta; ++k)
                {
                    gx[k] += z * s.x[k];
                }
                double* gh = grad.data() + wh_off + r * h;
                const double* wh_row = wh.data() + r * h;
                for (std::size_t k = 0; k < h; ++k)
                {
                    gh[k] += z * s.h_prev[k];
                    dh_prev[k] += z * wh_row[k];
                }
                grad[b_off + r] += z;
            }
        }
        dh.swap(dh_prev);
    }
}

void check_blocks(const LstmParams& params, std::span<const SequenceBlock> blocks)
{
    if (blocks.empty())
    {
        throw std::invalid_argument("block set is empty");
    }
    for (const auto& b : blocks)
    {
        if (b.features != params.input_dim())
        {
            throw std::invalid_argument("block has " + std::to_string(b.features) + " features, model expects " +
                                        std::to_string(params.input_dim()));
        }
        check_rows(params, b.inputs, b.steps);
    }
}

}  // namespace

ParamCount param_count(std::size_t input_dim, std::size_t hidden_dim)
{
    ParamCount count;
    count.first_layer = 4 * hidden_dim * (input_dim + hidden_dim + 1);
    count.second_layer = hidden_dim + 1;
    count.total = count.first_layer + count.second_layer;
    return count;
}

LstmParams::LstmParams(std::size_t input_dim, std::size_t hidden_dim)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), values_(param_count(input_dim, hidden_dim).total, 0.0)
{
    if (input_dim == 0 || hidden_dim == 0)
    {
        throw std::invalid_argument("LSTM dimensions must be positive");
    }
}

LstmParams LstmParams::initialize(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed)
{
    LstmParams p(input_dim, hidden_dim);
    Xoshiro256 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    const auto draw = [&] { return bound * (2.0 * rng.uniform() - 1.0); };
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        for (auto& w : p.input_weights(static_cast<Gate>(g)))
        {
            w = draw();
        }
        for (auto& w : p.recurrent_weights(static_cast<Gate>(g)))
        {
            w = draw();
        }
    }
    for (auto& w : p.output_weights())
    {
        w = draw();
    }
    return p;
}

std::size_t LstmParams::input_offset(Gate g) const noexcept
{
    return gate_index(g) * hidden_dim_ * input_dim_;
}

std::size_t LstmParams::recurrent_offset(Gate g) const noexcept
{
    return kGateCount * hidden_dim_ * input_dim_ + gate_index(g) * hidden_dim_ * hidden_dim_;
}

std::size_t LstmParams::bias_offset(Gate g) const noexcept
{
    return kGateCount * hidden_dim_ * (input_dim_ + hidden_dim_) + gate_index(g) * hidden_dim_;
}

std::size_t LstmParams::output_offset() const noexcept
{
    return kGateCount * hidden_dim_ * (input_dim_ + hidden_dim_ + 1);
}

std::span<double> LstmParams::input_weights(Gate g)
{
    return std::span<double>(values_).subspan(input_offset(g), hidden_dim_ * input_dim_);
}
std::span<const double> LstmParams::input_weights(Gate g) const
{
    return std::span<const double>(values_).subspan(input_offset(g), hidden_dim_ * input_dim_);
}
std::span<double> LstmParams::recurrent_weights(Gate g)
{
    return std::span<double>(values_).subspan(recurrent_offset(g), hidden_dim_ * hidden_dim_);
}
std::span<const double> LstmParams::recurrent_weights(Gate g) const
{
    return std::span<const double>(values_).subspan(recurrent_offset(g), hidden_dim_ * hidden_dim_);
}
std::span<double> LstmParams::bias(Gate g)
{
    return std::span<double>(values_).subspan(bias_offset(g), hidden_dim_);
}
std::span<const double> LstmParams::bias(Gate g) const
{
    return std::span<const double>(values_).subspan(bias_offset(g), hidden_dim_);
}
std::span<double> LstmParams::output_weights()
{
    return std::span<double>(values_).subspan(output_offset(), hidden_dim_);
}
std::span<const double> LstmParams::output_weights() const
{
    return std::span<const double>(values_).subspan(output_offset(), hidden_dim_);
}

std::string LstmParams::parameter_name(std::size_t i) const
{
    if (i >= values_.size())
    {
        throw std::out_of_range("parameter index out of range");
    }
    const auto matrix = [](const char* prefix, std::size_t gate, std::size_t local, std::size_t cols) {
        return std::string(prefix) + kGateSuffix[gate] + "[" + std::to_string(local / cols) + "," +
               std::to_string(local % cols) + "]";
    };
    const std::size_t wx_size = hidden_dim_ * input_dim_;
    const std::size_t wh_size = hidden_dim_ * hidden_dim_;
    if (i < kGateCount * wx_size)
    {
        return matrix("W_x_", i / wx_size, i % wx_size, input_dim_);
    }
    i -= kGateCount * wx_size;
    if (i < kGateCount * wh_size)
    {
        return matrix("W_h_", i / wh_size, i % wh_size, hidden_dim_);
    }
    i -= kGateCount * wh_size;
    if (i < kGateCount * hidden_dim_)
    {
        return std::string("b_") + kGateSuffix[i / hidden_dim_] + "[" + std::to_string(i % hidden_dim_) + "]";
    }
    i -= kGateCount * hidden_dim_;
    if (i < hidden_dim_)
    {
        return "w_out[" + std::to_string(i) + "]";
    }
    return "b_out";
}

CellStep cell_forward(const LstmParams& params, std::span<const double> x, const CellState& prev)
{
    if (x.size() != params.input_dim() || prev.hidden.size() != params.hidden_dim() ||
        prev.cell.size() != params.hidden_dim())
    {
        throw std::invalid_argument("cell input or state shape does not match the parameters");
    }
    StepCache s;
    forward_step(params, x, prev.hidden, prev.cell, s);
    CellStep step;
    step.state.hidden = std::move(s.h);
    step.state.cell = std::move(s.c);
    step.gates.forget = std::move(s.f);
    step.gates.input = std::move(s.i);
    step.gates.output = std::move(s.o);
    step.gates.candidate = std::move(s.n);
    return step;
}

double predict_window(const LstmParams& params, std::span<const double> rows, std::size_t steps)
{
    check_rows(params, rows, steps);
    std::vector<StepCache> cache;
    return forward_window(params, rows, steps, cache);
}

double predict(const LstmParams& params, const SequenceBlock& block)
{
    if (block.features != params.input_dim())
    {
        throw std::invalid_argument("block has " + std::to_string(block.features) + " features, model expects " +
                                    std::to_string(params.input_dim()));
    }
    return predict_window(params, block.inputs, block.steps);
}

double loss(const LstmParams& params, std::span<const SequenceBlock> blocks)
{
    check_blocks(params, blocks);
    std::vector<StepCache> cache;
    double sum = 0.0;
    for (const auto& b : blocks)
    {
        const double err = forward_window(params, b.inputs, b.steps, cache) - b.target;
        sum += err * err;
    }
    return sum / static_cast<double>(blocks.size());
}

std::vector<double> gradients(const LstmParams& params, std::span<const SequenceBlock> blocks, unsigned workers)
{
    check_blocks(params, blocks);
    const double inv_count = 1.0 / static_cast<double>(blocks.size());
    const std::size_t n = params.size();

    // each block gets its own partial so the summation order never depends on the worker count
    std::vector<std::vector<double>> partial(blocks.size());
    parallel_for(blocks.size(), workers, [&](std::size_t k) {
        std::vector<StepCache> cache;
        partial[k].assign(n, 0.0);
        const auto& b = blocks[k];
        const double y = forward_window(params, b.inputs, b.steps, cache);
        backward_window(params, cache, 2.0 * (y - b.target) * inv_count, partial[k]);
    });
    std::vector<double> grad(n, 0.0);
    for (const auto& part : partial)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            grad[j] += part[j];
        }
    }

    for (std::size_t j = 0; j < n; ++j)
    {
        if (!std::isfinite(grad[j]))
        {
            throw NumericalError("non-finite gradient for " + params.parameter_name(j));
        }
    }
    return grad;
}

AdamState::AdamState(std::size_t size, AdamConfig config) : config_(config), m_(size, 0.0), v_(size, 0.0)
{
    if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0))
    {
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
    }
    if (!(config_.epsilon > 0.0) || !(config_.learning_rate >= 0.0))
    {
        throw std::invalid_argument("Adam epsilon must be positive and the learning rate non-negative");
    }
}

void AdamState::step(std::span<double> params, std::span<const double> grad)
{
    if (params.size() != m_.size() || grad.size() != m_.size())
    {
        throw std::invalid_argument("Adam state, parameter and gradient sizes differ");
    }
    ++step_;
    const double tau = static_cast<double>(step_);
    const double correction1 = 1.0 - std::pow(config_.beta1, tau);
    const double correction2 = 1.0 - std::pow(config_.beta2, tau);
    for (std::size_t j = 0; j < params.size(); ++j)
    {
        m_[j] = config_.beta1 * m_[j] + (1.0 - config_.beta1) * grad[j];
        v_[j] = config_.beta2 * v_[j] + (1.0 - config_.beta2) * grad[j] * grad[j];
        const double m_hat = m_[j] / correction1;
        const double v_hat = v_[j] / correction2;
        params[j] -= config_.learning_rate * m_hat / std::sqrt(v_hat + config_.epsilon);
    }
}

TrainResult train(std::span<const SequenceBlock> train_blocks, std::span<const SequenceBlock> test_blocks,
                  const TrainConfig& config)
{
    if (train_blocks.empty())
    {
        throw std::invalid_argument("no training blocks");
    }
    if (config.batch_size == 0)
    {
        throw std::invalid_argument("batch size must be at least 1");
    }
    TrainResult result;
    result.params = LstmParams::initialize(train_blocks.front().features, config.hidden_dim, config.seed);
    check_blocks(result.params, train_blocks);
    if (!test_blocks.empty())
    {
        check_blocks(result.params, test_blocks);
    }

    AdamState adam(result.params.size(), config.adam);
    std::vector<double> best;  // running minimum of the training loss, per epoch
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch)
    {
        for (std::size_t start = 0; start < train_blocks.size(); start += config.batch_size)
        {
            const std::size_t count = std::min(config.batch_size, train_blocks.size() - start);
            const auto grad = gradients(result.params, train_blocks.subspan(start, count), config.workers);
            adam.step(result.params.values(), grad);
        }

        EpochLoss entry;
        entry.epoch = epoch;
        entry.train = loss(result.params, train_blocks);
        if (!std::isfinite(entry.train))
        {
            throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
        }
        entry.test = test_blocks.empty() ? std::numeric_limits<double>::quiet_NaN() : loss(result.params, test_blocks);
        result.history.push_back(entry);

        best.push_back(best.empty() ? entry.train : std::min(best.back(), entry.train));
        if (config.patience > 0 && best.size() > config.patience)
        {
            const double improvement = best[best.size() - 1 - config.patience] - best.back();
            if (improvement < config.min_improvement)
            {
                break;
            }
        }
    }
    return result;
}

}  // namespace relibat
