#pragma once

#include <cstdint>
#include <vector>

#include "nn2c/fixed_point.hpp"

namespace nn2c {

// Quantized tensor: raw codes in channel-first storage order (c fastest,
// then x, then y) — the same order elements travel through the pipeline.
struct QTensor {
    int y = 0, x = 0, c = 0;
    FxFormat fmt;
    std::vector<int32_t> raw;

    static QTensor zeros(int y, int x, int c, FxFormat fmt) {
        QTensor t{y, x, c, fmt, {}};
        t.raw.assign(size_t(y) * x * c, 0);
        return t;
    }

    int64_t count() const { return int64_t(y) * x * c; }
    size_t index(int yy, int xx, int cc) const {
        return (size_t(yy) * x + xx) * c + cc;
    }
    int32_t at(int yy, int xx, int cc) const { return raw[index(yy, xx, cc)]; }
    int32_t& at(int yy, int xx, int cc) { return raw[index(yy, xx, cc)]; }

    friend bool operator==(const QTensor&, const QTensor&) = default;
};

// Real-valued tensor with the same storage order; the reference path.
struct RealTensor {
    int y = 0, x = 0, c = 0;
    std::vector<double> v;

    static RealTensor zeros(int y, int x, int c) {
        RealTensor t{y, x, c, {}};
        t.v.assign(size_t(y) * x * c, 0.0);
        return t;
    }

    int64_t count() const { return int64_t(y) * x * c; }
    size_t index(int yy, int xx, int cc) const {
        return (size_t(yy) * x + xx) * c + cc;
    }
    double at(int yy, int xx, int cc) const { return v[index(yy, xx, cc)]; }
    double& at(int yy, int xx, int cc) { return v[index(yy, xx, cc)]; }
};

inline RealTensor decode_tensor(const QTensor& q) {
    RealTensor r = RealTensor::zeros(q.y, q.x, q.c);
    for (size_t i = 0; i < q.raw.size(); ++i) r.v[i] = decode(q.raw[i], q.fmt);
    return r;
}

inline QTensor quantize_tensor(const RealTensor& r, FxFormat fmt) {
    QTensor q = QTensor::zeros(r.y, r.x, r.c, fmt);
    for (size_t i = 0; i < r.v.size(); ++i) {
        if (fmt.is_binary())
            q.raw[i] = r.v[i] >= 0 ? 1 : 0;
        else
            q.raw[i] = quantize_real(r.v[i], fmt).raw;
    }
    return q;
}

}  // namespace nn2c
