#include "nn2c/fixed_point.hpp"

#include <bit>
#include <cassert>
#include <cmath>

namespace nn2c {

double decode(int64_t raw, const FxFormat& fmt) {
    if (fmt.is_binary()) return raw ? 1.0 : -1.0;
    return std::ldexp(double(raw), -fmt.frac_bits);
}

FxValue quantize_real(double x, const FxFormat& fmt) {
    assert(!fmt.is_binary());
    const double scaled = std::floor(std::ldexp(x, fmt.frac_bits));
    const double lo = double(fmt.raw_min());
    const double hi = double(fmt.raw_max());
    // Clamp in the double domain so huge inputs cannot overflow the cast.
    double r = scaled;
    if (!(r > lo)) r = lo;
    if (!(r < hi)) r = hi;
    return FxValue{int32_t(r), fmt};
}

static int64_t saturate(int64_t raw, const FxFormat& fmt) {
    if (raw < fmt.raw_min()) return fmt.raw_min();
    if (raw > fmt.raw_max()) return fmt.raw_max();
    return raw;
}

FxValue rescale(int64_t raw, int src_frac, const FxFormat& dst) {
    const int shift = src_frac - dst.frac_bits;
    int64_t r;
    if (shift >= 0) {
        // Arithmetic right shift truncates toward -inf.
        r = (shift >= 63) ? (raw < 0 ? -1 : 0) : (raw >> shift);
    } else {
        const int up = -shift;
        __int128 wide = __int128(raw) << up;
        if (wide > dst.raw_max()) return FxValue{int32_t(dst.raw_max()), dst};
        if (wide < dst.raw_min()) return FxValue{int32_t(dst.raw_min()), dst};
        r = int64_t(wide);
    }
    return FxValue{int32_t(saturate(r, dst)), dst};
}

int64_t xnor_popcount_dot(std::span<const uint64_t> a,
                          std::span<const uint64_t> w, int64_t n) {
    assert(int64_t(a.size()) * 64 >= n && int64_t(w.size()) * 64 >= n);
    int64_t pop = 0;
    const size_t full = size_t(n / 64);
    for (size_t i = 0; i < full; ++i) pop += std::popcount(~(a[i] ^ w[i]));
    const int rem = int(n % 64);
    if (rem) {
        const uint64_t mask = (uint64_t(1) << rem) - 1;
        pop += std::popcount(~(a[full] ^ w[full]) & mask);
    }
    return 2 * pop - n;
}

int64_t xnor_popcount_dot_masked(std::span<const uint64_t> a,
                                 std::span<const uint64_t> w,
                                 std::span<const uint64_t> mask) {
    int64_t pop = 0, valid = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        pop += std::popcount(~(a[i] ^ w[i]) & mask[i]);
        valid += std::popcount(mask[i]);
    }
    return 2 * pop - valid;
}

FxValue apply_activation(int64_t acc, int acc_frac, ActFn fn,
                         const FxFormat& dst, int64_t threshold) {
    switch (fn) {
        case ActFn::None:
            return rescale(acc, acc_frac, dst);
        case ActFn::ReLU:
            return rescale(acc < 0 ? 0 : acc, acc_frac, dst);
        case ActFn::BinarySign:
            assert(dst.is_binary());
            return FxValue{acc >= threshold ? 1 : 0, dst};
    }
    return FxValue{0, dst};
}

int64_t reciprocal_divide(int64_t acc, int divisor) {
    assert(divisor > 0);
    const int64_t recip = (int64_t(1) << 16) / divisor;
    // 48-bit accumulators times a 17-bit constant need the wide product.
    return int64_t((__int128(acc) * recip) >> 16);
}

}  // namespace nn2c
