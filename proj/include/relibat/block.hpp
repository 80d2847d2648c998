#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relibat {

/// One many-to-one training example: `steps` consecutive feature rows and the value to predict.
struct SequenceBlock
{
    std::vector<double> inputs;  ///< steps x features, row-major
    std::size_t steps = 0;
    std::size_t features = 0;
    double target = 0.0;
    std::size_t target_time = 0;  ///< time index of the row the target comes from

    std::span<const double> row(std::size_t step) const
    {
        return std::span<const double>(inputs).subspan(step * features, features);
    }
};

}  // namespace relibat
