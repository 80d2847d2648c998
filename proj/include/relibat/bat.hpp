#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "relibat/network.hpp"

namespace relibat {

/**
 * Binary-addition-tree enumeration of all 2^width binary vectors.
 *
 * The cursor starts on the all-zero vector and each advance() adds (1, 0, ..., 0) with
 * coordinate 0 as the least significant bit: if the first coordinate is 0 it becomes 1;
 * otherwise the leading run of ones is cleared and the next coordinate is set. Only the
 * current vector is stored.
 */
class BatCursor
{
  public:
    explicit BatCursor(std::size_t width) : bits_(width, 0)
    {
        if (width == 0)
        {
            throw std::invalid_argument("BAT width must be at least 1");
        }
    }

    std::span<const std::uint8_t> current() const noexcept { return bits_; }
    std::size_t width() const noexcept { return bits_.size(); }
    bool exhausted() const noexcept { return exhausted_; }

    /// Zero-based number of the current emission; equals the integer the vector encodes.
    std::uint64_t index() const noexcept { return index_; }

    /// Moves to the next vector. Returns false, and marks the cursor exhausted, after (1, ..., 1).
    bool advance() noexcept
    {
        if (exhausted_)
        {
            return false;
        }
        for (auto& bit : bits_)
        {
            if (bit == 0)
            {
                bit = 1;
                ++index_;
                return true;
            }
            bit = 0;
        }
        // carried out of the last coordinate: restore (1, ..., 1) and stop
        for (auto& bit : bits_)
        {
            bit = 1;
        }
        exhausted_ = true;
        return false;
    }

    template <class Vec = StateVector>
    Vec vector() const
    {
        return Vec(current());
    }

    /// Advances and returns the new vector, or nothing once the stream is exhausted.
    template <class Vec = StateVector>
    std::optional<Vec> next()
    {
        if (!advance())
        {
            return std::nullopt;
        }
        return Vec(current());
    }

  private:
    std::vector<std::uint8_t> bits_;
    std::uint64_t index_ = 0;
    bool exhausted_ = false;
};

}  // namespace relibat
