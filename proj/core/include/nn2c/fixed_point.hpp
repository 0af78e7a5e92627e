#pragma once

#include <cstdint>
#include <span>

namespace nn2c {

// Fixed-point format: signed two's-complement integer code with an implied
// binary point, value = raw * 2^-frac_bits. total_bits == 1 is the binary
// format whose codes {0,1} decode to {-1,+1}.
struct FxFormat {
    int total_bits = 8;
    int frac_bits = 0;

    bool is_binary() const { return total_bits == 1; }

    int64_t raw_min() const {
        return is_binary() ? 0 : -(int64_t(1) << (total_bits - 1));
    }
    int64_t raw_max() const {
        return is_binary() ? 1 : (int64_t(1) << (total_bits - 1)) - 1;
    }
    bool holds_raw(int64_t raw) const {
        return raw >= raw_min() && raw <= raw_max();
    }
    // Valid formats: 1 <= total <= 32, 0 <= frac < total (binary: frac == 0).
    bool valid() const {
        if (total_bits < 1 || total_bits > 32) return false;
        if (frac_bits < 0 || frac_bits >= total_bits) return false;
        if (is_binary() && frac_bits != 0) return false;
        return true;
    }

    friend bool operator==(const FxFormat&, const FxFormat&) = default;
};

inline FxFormat binary_format() { return FxFormat{1, 0}; }

// One value: raw code plus its format. Binary raws are {0,1}.
struct FxValue {
    int32_t raw = 0;
    FxFormat fmt;

    friend bool operator==(const FxValue&, const FxValue&) = default;
};

enum class ActFn { None, ReLU, BinarySign };

// Decode a raw code to its real value (binary: {0,1} -> {-1,+1}).
double decode(int64_t raw, const FxFormat& fmt);
inline double decode(const FxValue& v) { return decode(v.raw, v.fmt); }

// Effective fractional scale of an operand: binary values are +-1 integers.
inline int effective_frac(const FxFormat& fmt) {
    return fmt.is_binary() ? 0 : fmt.frac_bits;
}

// raw = floor(x * 2^frac), then saturate. Truncation is toward -inf.
FxValue quantize_real(double x, const FxFormat& fmt);

// Realign a raw value from scale 2^-src_frac to dst's scale, truncating the
// discarded fraction toward -inf, then saturate to dst's range.
FxValue rescale(int64_t raw, int src_frac, const FxFormat& dst);

// acc += a.raw * w.raw, exact. The accumulator scale is the caller's
// responsibility (a.frac + w.frac). 48 accumulator bits are guaranteed by
// the model validation bound, so int64 never overflows here.
inline int64_t mac(int64_t acc, const FxValue& a, const FxValue& w) {
    return acc + int64_t(a.raw) * int64_t(w.raw);
}

// +-1 dot product of two packed bit vectors (LSB-first within each word):
// 2*popcount(~(a ^ w) & mask(n)) - n.
int64_t xnor_popcount_dot(std::span<const uint64_t> a,
                          std::span<const uint64_t> w, int64_t n);

// Variant with an explicit validity mask; invalid positions contribute 0.
// Used for zero-padding in binary layers.
int64_t xnor_popcount_dot_masked(std::span<const uint64_t> a,
                                 std::span<const uint64_t> w,
                                 std::span<const uint64_t> mask);

// Finish one accumulated output: activation then narrowing.
//   None       -> rescale(acc) into dst
//   ReLU       -> rescale(max(0, acc)) into dst
//   BinarySign -> bit = (acc >= threshold), dst must be binary
FxValue apply_activation(int64_t acc, int acc_frac, ActFn fn,
                         const FxFormat& dst, int64_t threshold);

// Divide an accumulated sum by a small positive count without a divider:
// multiply by the 16-fraction-bit reciprocal floor(2^16/divisor) and
// truncate (arithmetic shift). Exact for power-of-two divisors.
int64_t reciprocal_divide(int64_t acc, int divisor);

}  // namespace nn2c
