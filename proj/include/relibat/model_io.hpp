#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "relibat/dataset.hpp"
#include "relibat/lstm.hpp"

namespace relibat {

/// A trained regressor plus what is needed to feed it raw data and read its output.
struct LstmModel
{
    LstmParams params;
    std::size_t window = 5;
    AdamConfig adam;
    std::vector<ColumnStats> normalization;  ///< one per input feature; the last is R*

    const ColumnStats& target_stats() const { return normalization.back(); }
};

inline constexpr int kModelFormatVersion = 1;

/**
 * Text model file:
 *
 *   relibat-lstm 1
 *   input_dim <eta>
 *   hidden_dim <h>
 *   window <w>
 *   adam <lr> <beta1> <beta2> <eps>
 *   norm <mean> <min> <max>          (eta lines, feature order)
 *   tensor <name> <rows> <cols>      (then rows lines of cols values)
 *   ...
 *   end
 *
 * Tensors: W_x_f, W_x_i, W_x_o, W_x_c (h x eta), W_h_* (h x h), b_* (1 x h), w_out (1 x h),
 * b_out (1 x 1). Numbers are written in shortest round-trip form, so save/load is exact.
 */
void write_model(std::ostream& out, const LstmModel& model);
LstmModel read_model(std::istream& in);

void save_model(const std::string& path, const LstmModel& model);
LstmModel load_model(const std::string& path);

}  // namespace relibat
