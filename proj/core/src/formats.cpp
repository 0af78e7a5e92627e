#include "nn2c/formats.hpp"

#include <cstring>
#include <fstream>

#include "nn2c/error.hpp"

namespace nn2c {

namespace {

constexpr char kParamMagic[4] = {'N', 'N', '2', 'C'};
constexpr char kTensorMagic[4] = {'N', 'N', 'T', 'F'};
constexpr uint32_t kVersion = 1;

int bytes_for_bits(int bits) { return bits <= 8 ? 1 : bits <= 16 ? 2 : 4; }

class Reader {
public:
    Reader(const std::vector<uint8_t>& buf, ErrorKind kind)
        : buf_(buf), kind_(kind) {}

    void magic(const char expect[4], const char* what) {
        if (buf_.size() - pos_ < 4 || std::memcmp(buf_.data() + pos_, expect, 4) != 0)
            throw Error(kind_, std::string("bad magic: not a ") + what + " container");
        pos_ += 4;
    }
    uint8_t u8() { return take(1)[0]; }
    uint32_t u32() {
        const uint8_t* p = take(4);
        return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
               uint32_t(p[3]) << 24;
    }
    uint64_t u64() {
        uint64_t lo = u32();
        uint64_t hi = u32();
        return lo | hi << 32;
    }
    int32_t i32() { return int32_t(u32()); }

    // Signed two's-complement value in 1, 2 or 4 bytes.
    int32_t narrow(int nbytes) {
        const uint8_t* p = take(nbytes);
        uint32_t v = 0;
        for (int i = 0; i < nbytes; ++i) v |= uint32_t(p[i]) << (8 * i);
        const int shift = 32 - 8 * nbytes;
        return int32_t(v << shift) >> shift;
    }

    const uint8_t* take(size_t n) {
        if (buf_.size() - pos_ < n)
            throw Error(kind_, "container truncated at byte " + std::to_string(pos_));
        const uint8_t* p = buf_.data() + pos_;
        pos_ += n;
        return p;
    }

    void expect_end() {
        if (pos_ != buf_.size())
            throw Error(kind_, std::to_string(buf_.size() - pos_) +
                                   " trailing bytes after payload");
    }

private:
    const std::vector<uint8_t>& buf_;
    ErrorKind kind_;
    size_t pos_ = 0;
};

class Writer {
public:
    void magic(const char m[4]) { buf_.insert(buf_.end(), m, m + 4); }
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        u32(uint32_t(v));
        u32(uint32_t(v >> 32));
    }
    void i32(int32_t v) { u32(uint32_t(v)); }
    void narrow(int32_t v, int nbytes) {
        for (int i = 0; i < nbytes; ++i) buf_.push_back(uint8_t(uint32_t(v) >> (8 * i)));
    }

    std::vector<uint8_t> finish() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

std::vector<int32_t> read_elements(Reader& r, uint64_t count, bool binary, int bits) {
    std::vector<int32_t> out;
    out.reserve(count);
    if (binary) {
        const uint64_t nbytes = (count + 7) / 8;
        const uint8_t* p = r.take(nbytes);
        for (uint64_t i = 0; i < count; ++i)
            out.push_back((p[i / 8] >> (i % 8)) & 1);  // LSB-first
    } else {
        const int nb = bytes_for_bits(bits);
        for (uint64_t i = 0; i < count; ++i) out.push_back(r.narrow(nb));
    }
    return out;
}

void write_elements(Writer& w, const std::vector<int32_t>& vals, bool binary, int bits) {
    if (binary) {
        uint8_t cur = 0;
        int nbits = 0;
        for (int32_t v : vals) {
            cur |= uint8_t(v & 1) << nbits;
            if (++nbits == 8) {
                w.u8(cur);
                cur = 0;
                nbits = 0;
            }
        }
        if (nbits) w.u8(cur);
    } else {
        const int nb = bytes_for_bits(bits);
        for (int32_t v : vals) w.narrow(v, nb);
    }
}

}  // namespace

ParamSet load_params(const std::vector<uint8_t>& bytes, const ModelGraph& graph) {
    Reader r(bytes, ErrorKind::Format);
    r.magic(kParamMagic, "parameter");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw Error(ErrorKind::Format,
                    "unsupported parameter container version " + std::to_string(version));
    const uint32_t layer_count = r.u32();
    if (layer_count != graph.layers.size())
        throw Error(ErrorKind::Format,
                    "container holds " + std::to_string(layer_count) +
                        " layers, graph has " + std::to_string(graph.layers.size()));

    ParamSet ps;
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const uint8_t flags = r.u8();
        const bool binary = flags & 1;
        const bool has_bias = flags & 2;
        if (l.kind != LayerKind::AvgPool && binary != l.w_fmt.is_binary())
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) +
                            ": binary-weight flag disagrees with the architecture");
        if (has_bias != l.has_bias)
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) +
                            ": bias flag disagrees with the architecture");

        const uint64_t wc = r.u64();
        if (int64_t(wc) != l.weight_count())
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) + ": expected " +
                            std::to_string(l.weight_count()) + " weights, container has " +
                            std::to_string(wc));
        LayerParams lp;
        lp.weights = read_elements(r, wc, binary, l.w_fmt.total_bits);

        const uint64_t bc = r.u64();
        if (int64_t(bc) != (l.has_bias ? l.c_out : 0))
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) + ": expected " +
                            std::to_string(l.has_bias ? l.c_out : 0) +
                            " bias values, container has " + std::to_string(bc));
        for (uint64_t b = 0; b < bc; ++b) lp.bias.push_back(r.i32());
        ps.layers.push_back(std::move(lp));
    }
    r.expect_end();
    validate_params(graph, ps);
    return ps;
}

std::vector<uint8_t> save_params(const ModelGraph& graph, const ParamSet& params) {
    validate_params(graph, params);
    Writer w;
    w.magic(kParamMagic);
    w.u32(kVersion);
    w.u32(uint32_t(graph.layers.size()));
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerParams& p = params.layers[i];
        const bool binary = l.kind != LayerKind::AvgPool && l.w_fmt.is_binary();
        w.u8(uint8_t((binary ? 1 : 0) | (l.has_bias ? 2 : 0)));
        w.u64(p.weights.size());
        write_elements(w, p.weights, binary, l.w_fmt.total_bits);
        w.u64(p.bias.size());
        for (int32_t b : p.bias) w.i32(b);
    }
    return w.finish();
}

QTensor load_tensor(const std::vector<uint8_t>& bytes) {
    Reader r(bytes, ErrorKind::TensorFormat);
    r.magic(kTensorMagic, "tensor");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw Error(ErrorKind::TensorFormat,
                    "unsupported tensor container version " + std::to_string(version));
    QTensor t;
    t.y = int(r.u32());
    t.x = int(r.u32());
    t.c = int(r.u32());
    t.fmt.total_bits = r.u8();
    t.fmt.frac_bits = r.u8();
    if (t.y < 1 || t.x < 1 || t.c < 1)
        throw Error(ErrorKind::TensorFormat, "tensor dims must be positive");
    if (!t.fmt.valid())
        throw Error(ErrorKind::TensorFormat, "invalid tensor element format");
    t.raw = read_elements(r, uint64_t(t.count()), t.fmt.is_binary(), t.fmt.total_bits);
    r.expect_end();
    for (int32_t v : t.raw)
        if (!t.fmt.holds_raw(v))
            throw Error(ErrorKind::TensorFormat,
                        "tensor raw code out of range: " + std::to_string(v));
    return t;
}

std::vector<uint8_t> save_tensor(const QTensor& tensor) {
    Writer w;
    w.magic(kTensorMagic);
    w.u32(kVersion);
    w.u32(uint32_t(tensor.y));
    w.u32(uint32_t(tensor.x));
    w.u32(uint32_t(tensor.c));
    w.u8(uint8_t(tensor.fmt.total_bits));
    w.u8(uint8_t(tensor.fmt.frac_bits));
    write_elements(w, tensor.raw, tensor.fmt.is_binary(), tensor.fmt.total_bits);
    return w.finish();
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Format, "cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f),
                                std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Format, "cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Format, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Format, "cannot open " + path + " for writing");
    f << text;
}

}  // namespace nn2c
