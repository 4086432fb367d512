#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pams {

/// Binary antenna activation vector with a cached number of set bits.
class ActivationPattern {
  public:
    ActivationPattern() = default;

    explicit ActivationPattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        recount();
    }

    static ActivationPattern zeros(std::size_t n) {
        return ActivationPattern(std::vector<std::uint8_t>(n, 0));
    }

    static ActivationPattern all_ones(std::size_t n) {
        return ActivationPattern(std::vector<std::uint8_t>(n, 1));
    }

    static ActivationPattern single(std::size_t n, std::size_t on_index) {
        std::vector<std::uint8_t> b(n, 0);
        b[on_index] = 1;
        return ActivationPattern(std::move(b));
    }

    /// Pattern whose bit n is bit n of `index`; index 0 is the all-off pattern.
    static ActivationPattern from_index(std::size_t n, std::uint64_t index) {
        std::vector<std::uint8_t> b(n, 0);
        for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((index >> i) & 1u);
        return ActivationPattern(std::move(b));
    }

    std::size_t size() const { return bits_.size(); }
    std::size_t popcount() const { return popcount_; }
    bool on(std::size_t n) const { return bits_[n] != 0; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    void set(std::size_t n, bool value) {
        if (bits_[n] != static_cast<std::uint8_t>(value)) {
            bits_[n] = static_cast<std::uint8_t>(value);
            popcount_ += value ? 1 : -1;
        }
    }

    bool operator==(const ActivationPattern& other) const { return bits_ == other.bits_; }

  private:
    void recount() {
        popcount_ = 0;
        for (auto b : bits_) popcount_ += (b != 0);
    }

    std::vector<std::uint8_t> bits_;
    std::size_t popcount_ = 0;
};

} // namespace pams
