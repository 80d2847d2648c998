#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relibat/block.hpp"

namespace relibat {

/// Raised when a loss, gradient or parameter stops being finite.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class Gate : std::size_t
{
    Forget = 0,
    Input = 1,
    Output = 2,
    Cell = 3,  ///< candidate N_t
};

inline constexpr std::size_t kGateCount = 4;

struct ParamCount
{
    std::size_t first_layer = 0;   ///< 4 h (eta + h + 1)
    std::size_t second_layer = 0;  ///< h + 1
    std::size_t total = 0;
};

ParamCount param_count(std::size_t input_dim, std::size_t hidden_dim);

/**
 * Single-layer LSTM regressor parameters stored in one flat vector:
 *
 *   W_x (4 gates, each h x eta) | W_h (4 gates, each h x h) | b (4 gates, each h) | w_out (h) | b_out
 *
 * Gate order is forget, input, output, cell. Matrices are row-major.
 */
class LstmParams
{
  public:
    LstmParams() = default;
    LstmParams(std::size_t input_dim, std::size_t hidden_dim);

    /// Weights uniform on [-1/sqrt(h), 1/sqrt(h)], biases zero.
    static LstmParams initialize(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t hidden_dim() const noexcept { return hidden_dim_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<double> input_weights(Gate g);
    std::span<const double> input_weights(Gate g) const;
    std::span<double> recurrent_weights(Gate g);
    std::span<const double> recurrent_weights(Gate g) const;
    std::span<double> bias(Gate g);
    std::span<const double> bias(Gate g) const;
    std::span<double> output_weights();
    std::span<const double> output_weights() const;
    double& output_bias() { return values_.back(); }
    double output_bias() const { return values_.back(); }

    /// Readable name of flat coordinate i, e.g. "W_h_o[2,0]".
    std::string parameter_name(std::size_t i) const;

    friend bool operator==(const LstmParams&, const LstmParams&) = default;

  private:
    std::size_t input_offset(Gate g) const noexcept;
    std::size_t recurrent_offset(Gate g) const noexcept;
    std::size_t bias_offset(Gate g) const noexcept;
    std::size_t output_offset() const noexcept;

    std::size_t input_dim_ = 0;
    std::size_t hidden_dim_ = 0;
    std::vector<double> values_;
};

struct CellState
{
    std::vector<double> hidden;  ///< H_t
    std::vector<double> cell;    ///< C_t

    static CellState zero(std::size_t hidden_dim)
    {
        return {std::vector<double>(hidden_dim, 0.0), std::vector<double>(hidden_dim, 0.0)};
    }
};

struct GateTrace
{
    std::vector<double> forget;     ///< F_t
    std::vector<double> input;      ///< I_t
    std::vector<double> output;     ///< O_t
    std::vector<double> candidate;  ///< N_t
};

struct CellStep
{
    CellState state;
    GateTrace gates;
};

/// One LSTM step: F, I, O = sigmoid(affine), N = tanh(affine), C = F*C_prev + I*N, H = O*tanh(C).
CellStep cell_forward(const LstmParams& params, std::span<const double> x, const CellState& prev);

/// Runs the cell over `steps` rows from a zero state and returns w_out . H_last + b_out.
double predict_window(const LstmParams& params, std::span<const double> rows, std::size_t steps);
double predict(const LstmParams& params, const SequenceBlock& block);

/// Mean squared error over the blocks.
double loss(const LstmParams& params, std::span<const SequenceBlock> blocks);

/// Exact gradient of loss() by backpropagation through time, same layout as the parameters.
/// Per-block gradients may be computed on `workers` threads; they are summed in block order.
std::vector<double> gradients(const LstmParams& params, std::span<const SequenceBlock> blocks,
                              unsigned workers = 1);

struct AdamConfig
{
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/**
 * Adam with bias-corrected moments. The update is
 *
 *   x -= lr * m_hat / sqrt(v_hat + eps)
 *
 * with eps inside the square root.
 */
class AdamState
{
  public:
    AdamState(std::size_t size, AdamConfig config = {});

    void step(std::span<double> params, std::span<const double> grad);

    std::uint64_t steps() const noexcept { return step_; }
    const AdamConfig& config() const noexcept { return config_; }
    std::span<const double> first_moment() const noexcept { return m_; }
    std::span<const double> second_moment() const noexcept { return v_; }

  private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t step_ = 0;
};

struct TrainConfig
{
    std::size_t hidden_dim = 10;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    AdamConfig adam;
    /// Stop once the best training loss improved by less than min_improvement over
    /// this many epochs. 0 disables early stopping.
    std::size_t patience = 20;
    double min_improvement = 1e-10;
    unsigned workers = 1;
};

struct EpochLoss
{
    std::size_t epoch = 0;
    double train = 0.0;
    double test = 0.0;  ///< NaN when there is no test set
};

struct TrainResult
{
    LstmParams params;
    std::vector<EpochLoss> history;
};

/// Mini-batch Adam over consecutive (unshuffled) batches. The seed only drives initialization.
TrainResult train(std::span<const SequenceBlock> train_blocks, std::span<const SequenceBlock> test_blocks,
                  const TrainConfig& config);

}  // namespace relibat
