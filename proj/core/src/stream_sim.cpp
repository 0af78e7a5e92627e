#include "nn2c/stream_sim.hpp"

#include <algorithm>
#include <cmath>

#include "nn2c/error.hpp"
#include "nn2c/layout.hpp"

namespace nn2c {

std::vector<WindowRef> window_sequence(const LayerSpec& l) {
    std::vector<WindowRef> seq;
    seq.reserve(size_t(l.out_positions()) * l.kernel_elems());
    for (int oy = 0; oy < l.y_out(); ++oy) {
        for (int ox = 0; ox < l.x_out(); ++ox) {
            for (int ky = 0; ky < l.k_y; ++ky) {
                for (int kx = 0; kx < l.k_x; ++kx) {
                    for (int ci = 0; ci < l.c_in; ++ci) {
                        WindowRef r;
                        r.out_x = ox;
                        r.out_y = oy;
                        r.in_y = oy * l.s_y - l.p_y + ky;
                        r.in_x = ox * l.s_x - l.p_x + kx;
                        r.c = ci;
                        r.padded = r.in_y < 0 || r.in_y >= l.y_in || r.in_x < 0 ||
                                   r.in_x >= l.x_in;
                        seq.push_back(r);
                    }
                }
            }
        }
    }
    return seq;
}

namespace {

struct KernelPos {
    int16_t ky, kx, ci;
};

// Immutable per-block configuration derived from graph + plan + params.
struct BlockConfig {
    LayerSpec layer;
    int pe = 1, simd = 1;
    int64_t kernel = 0;      // kernel_elems
    int64_t words = 0;       // kernel / simd
    int64_t groups = 0;      // ceil(c_out / pe)
    int64_t positions = 0;
    int rows = 0;            // row slots in the input buffer
    int64_t row_len = 0;     // x_in * c_in
    int64_t in_count = 0;    // y_in * row_len
    int64_t fifo_cap = 0;
    FxFormat in_fmt;
    int acc_frac = 0;
    bool bin_w = false, bin_a = false;
    bool is_pool = false;

    std::vector<KernelPos> kpos;      // kernel position -> (ky, kx, ci)
    std::vector<int32_t> wmem;        // [pe][groups*words][simd] raw weights
    std::vector<uint64_t> wbits;      // packed lanes, fully binary layers only
    int64_t wbit_stride = 0;          // words of 64 lanes per address
    std::vector<int64_t> bias;        // per c_out (threshold for binary_sign)

    // Linear input index of the last real element of a window; -1 when the
    // window is entirely padding.
    int64_t last_elem(int64_t pos) const {
        const int oy = int(pos / layer.x_out());
        const int ox = int(pos % layer.x_out());
        const int y0 = oy * layer.s_y - layer.p_y;
        const int x0 = ox * layer.s_x - layer.p_x;
        const int y_last = std::min(y0 + layer.k_y - 1, layer.y_in - 1);
        const int x_last = std::min(x0 + layer.k_x - 1, layer.x_in - 1);
        if (y_last < 0 || x_last < 0 || y0 >= layer.y_in || x0 >= layer.x_in)
            return -1;
        return (int64_t(y_last) * layer.x_in + x_last) * layer.c_in + layer.c_in - 1;
    }
    int base_row(int64_t pos) const {
        return int(pos / layer.x_out()) * layer.s_y - layer.p_y;
    }
    int group_channels(int64_t g) const {
        return int(std::min<int64_t>(pe, layer.c_out - g * pe));
    }
};

struct Fifo {
    std::vector<int32_t> buf;
    size_t head = 0;
    size_t count = 0;
    int64_t pushed = 0, popped = 0, max_occupancy = 0;

    void reset(int64_t capacity) {
        buf.assign(size_t(capacity), 0);
        head = count = 0;
        pushed = popped = max_occupancy = 0;
    }
    int64_t free_slots() const { return int64_t(buf.size()) - int64_t(count); }
    bool empty() const { return count == 0; }
    void push(int32_t v) {
        buf[(head + count) % buf.size()] = v;
        ++count;
        ++pushed;
        max_occupancy = std::max<int64_t>(max_occupancy, int64_t(count));
    }
    int32_t pop() {
        int32_t v = buf[head];
        head = (head + 1) % buf.size();
        --count;
        ++popped;
        return v;
    }
};

struct BlockState {
    std::vector<int32_t> rowbuf;
    int64_t written = 0;
    int64_t pos = 0;
    int64_t g = 0, w = 0;
    std::vector<int64_t> acc;
    Fifo out;
    LayerTiming timing;
    bool started = false;
    std::vector<int64_t> trace;

    // Per-cycle scratch: the simd window elements broadcast to all PEs.
    std::vector<int32_t> lane_val;
    std::vector<uint8_t> lane_ok;
    std::vector<uint64_t> abits, mbits;

    bool finished(const BlockConfig& c) const { return pos >= c.positions; }
};

}  // namespace

struct PipelineSim::Impl {
    ModelGraph graph;
    std::vector<BlockConfig> blocks;
    SimOptions options;
    int64_t deadlock_threshold = 0;
    std::vector<std::vector<int64_t>> last_traces;

    bool pe_step(const BlockConfig& c, BlockState& s, int64_t cycle);
    bool accept_step(const BlockConfig& c, BlockState& s, Fifo* upstream,
                     const QTensor* input, int64_t* next_input);
};

PipelineSim::PipelineSim(PipelineSim&&) noexcept = default;
PipelineSim& PipelineSim::operator=(PipelineSim&&) noexcept = default;
PipelineSim::~PipelineSim() = default;

PipelineSim::PipelineSim(const ModelGraph& graph, const AllocationPlan& plan,
                         const ParamSet& params, const SimOptions& options)
    : impl_(std::make_unique<Impl>()) {
    validate(graph);
    validate_params(graph, params);
    if (plan.layers.size() != graph.layers.size())
        throw Error(ErrorKind::Validation, "plan and graph layer counts differ");

    impl_->graph = graph;
    impl_->options = options;
    int64_t total_capacity = 0;

    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerAllocation& a = plan.layers[i];
        if (a.pe < 1 || a.pe > l.c_out || a.simd < 1 ||
            l.kernel_elems() % a.simd != 0)
            throw Error(ErrorKind::Validation,
                        "layer " + std::to_string(i) + ": allocation (" +
                            std::to_string(a.pe) + ", " + std::to_string(a.simd) +
                            ") violates the layer constraints");

        BlockConfig c;
        c.layer = l;
        c.pe = a.pe;
        c.simd = a.simd;
        c.kernel = l.kernel_elems();
        c.words = c.kernel / a.simd;
        c.groups = (l.c_out + a.pe - 1) / a.pe;
        c.positions = l.out_positions();
        c.rows = window_rows(l);
        c.row_len = int64_t(l.x_in) * l.c_in;
        c.in_count = int64_t(l.y_in) * c.row_len;
        c.fifo_cap = fifo_depth(l, options.fifo_depth_override);
        c.in_fmt = graph.in_fmt(i);
        c.is_pool = l.kind == LayerKind::AvgPool;
        c.bin_w = !c.is_pool && l.w_fmt.is_binary();
        c.bin_a = c.in_fmt.is_binary();
        c.acc_frac = effective_frac(c.in_fmt) +
                     (c.is_pool ? 0 : effective_frac(l.w_fmt));

        c.kpos.reserve(size_t(c.kernel));
        for (int64_t j = 0; j < c.kernel; ++j) {
            const int ky = int(j / (int64_t(l.k_x) * l.c_in));
            const int64_t rem = j % (int64_t(l.k_x) * l.c_in);
            c.kpos.push_back(KernelPos{int16_t(ky), int16_t(rem / l.c_in),
                                       int16_t(rem % l.c_in)});
        }

        // Weight memory: PE p, address g*words + w holds the simd weights
        // of kernel word w for output channel g*pe + p. Pooling blocks use
        // per-channel unit kernels.
        const LayerParams& lp = params.layers[i];
        const int64_t addrs = c.groups * c.words;
        c.wmem.assign(size_t(c.pe) * addrs * c.simd, 0);
        for (int p = 0; p < c.pe; ++p) {
            for (int64_t g = 0; g < c.groups; ++g) {
                const int64_t ch = g * c.pe + p;
                if (ch >= l.c_out) continue;
                for (int64_t w = 0; w < c.words; ++w) {
                    for (int lane = 0; lane < c.simd; ++lane) {
                        const KernelPos& kp = c.kpos[size_t(w * c.simd + lane)];
                        int32_t value;
                        if (c.is_pool)
                            value = kp.ci == ch ? 1 : 0;
                        else
                            value = lp.weight_at(l, int(ch), kp.ky, kp.kx, kp.ci);
                        c.wmem[size_t((p * addrs + g * c.words + w) * c.simd + lane)] =
                            value;
                    }
                }
            }
        }
        if (c.bin_w && c.bin_a) {
            c.wbit_stride = (c.simd + 63) / 64;
            c.wbits.assign(size_t(c.pe) * addrs * c.wbit_stride, 0);
            for (int p = 0; p < c.pe; ++p)
                for (int64_t addr = 0; addr < addrs; ++addr)
                    for (int lane = 0; lane < c.simd; ++lane) {
                        const int32_t raw =
                            c.wmem[size_t((p * addrs + addr) * c.simd + lane)];
                        if (raw & 1)
                            c.wbits[size_t((p * addrs + addr) * c.wbit_stride +
                                           lane / 64)] |= uint64_t(1) << (lane % 64);
                    }
        }

        c.bias.assign(size_t(l.c_out), 0);
        for (size_t b = 0; b < lp.bias.size(); ++b) c.bias[b] = lp.bias[b];

        total_capacity += c.fifo_cap + input_buffer_elems(l) + c.kernel;
        impl_->blocks.push_back(std::move(c));
    }
    impl_->deadlock_threshold = total_capacity + 16;
    impl_->last_traces.resize(graph.layers.size());
}

bool PipelineSim::Impl::accept_step(const BlockConfig& c, BlockState& s,
                                    Fifo* upstream, const QTensor* input,
                                    int64_t* next_input) {
    // One element per cycle from the upstream FIFO (or the injector).
    int32_t value;
    if (upstream) {
        if (upstream->empty()) return false;
        value = 0;  // popped below once admissible
    } else {
        if (*next_input >= int64_t(input->raw.size())) return false;
        value = input->raw[size_t(*next_input)];
    }

    if (s.written >= c.in_count) return false;  // stream fully consumed

    if (!s.finished(c)) {
        // A row may enter only while it stays within the reader's window
        // lookahead of `rows` rows.
        const int64_t row = s.written / c.row_len;
        if (row >= int64_t(c.base_row(s.pos)) + c.rows) return false;
    }
    if (upstream) value = upstream->pop();
    else ++*next_input;

    const int64_t row = s.written / c.row_len;
    const int64_t col = s.written % c.row_len;
    s.rowbuf[size_t((row % c.rows) * c.row_len + col)] = value;
    ++s.written;
    return true;
}

bool PipelineSim::Impl::pe_step(const BlockConfig& c, BlockState& s,
                                int64_t cycle) {
    if (s.finished(c)) return false;

    // The whole window must be resident before its words stream out.
    if (s.written < c.last_elem(s.pos) + 1) {
        if (s.started) ++s.timing.stall_in;
        return false;
    }
    const bool final_word = s.w == c.words - 1;
    const int burst = c.group_channels(s.g);
    if (final_word && s.out.free_slots() < burst) {
        if (s.started) ++s.timing.stall_out;
        return false;
    }

    // Gather the simd window elements once; every PE consumes the same data.
    const int oy = int(s.pos / c.layer.x_out());
    const int ox = int(s.pos % c.layer.x_out());
    const int y0 = oy * c.layer.s_y - c.layer.p_y;
    const int x0 = ox * c.layer.s_x - c.layer.p_x;

    const bool popcount_path = c.bin_w && c.bin_a && !options.binary_via_arith;
    if (popcount_path) {
        std::fill(s.abits.begin(), s.abits.end(), 0);
        std::fill(s.mbits.begin(), s.mbits.end(), 0);
    }
    for (int lane = 0; lane < c.simd; ++lane) {
        const KernelPos& kp = c.kpos[size_t(s.w * c.simd + lane)];
        const int y = y0 + kp.ky;
        const int x = x0 + kp.kx;
        const bool ok = y >= 0 && y < c.layer.y_in && x >= 0 && x < c.layer.x_in;
        s.lane_ok[size_t(lane)] = ok;
        s.lane_val[size_t(lane)] =
            ok ? s.rowbuf[size_t((y % c.rows) * c.row_len + int64_t(x) * c.layer.c_in +
                                 kp.ci)]
               : 0;
        if (popcount_path && ok) {
            if (s.lane_val[size_t(lane)] & 1)
                s.abits[size_t(lane / 64)] |= uint64_t(1) << (lane % 64);
            s.mbits[size_t(lane / 64)] |= uint64_t(1) << (lane % 64);
        }
    }

    const int64_t addrs = c.groups * c.words;
    const int64_t addr = s.g * c.words + s.w;
    for (int p = 0; p < c.pe; ++p) {
        if (s.g * c.pe + p >= c.layer.c_out) break;
        if (popcount_path) {
            const uint64_t* wb = &c.wbits[size_t((p * addrs + addr) * c.wbit_stride)];
            s.acc[size_t(p)] += xnor_popcount_dot_masked(
                std::span<const uint64_t>(s.abits.data(), size_t(c.wbit_stride)),
                std::span<const uint64_t>(wb, size_t(c.wbit_stride)),
                std::span<const uint64_t>(s.mbits.data(), size_t(c.wbit_stride)));
            continue;
        }
        const int32_t* wv = &c.wmem[size_t((p * addrs + addr) * c.simd)];
        int64_t acc = 0;
        for (int lane = 0; lane < c.simd; ++lane) {
            if (!s.lane_ok[size_t(lane)]) continue;  // zero padding contributes 0
            const int32_t a = s.lane_val[size_t(lane)];
            const int32_t w = wv[lane];
            if (c.bin_w && c.bin_a)
                acc += (a & 1) == (w & 1) ? 1 : -1;
            else if (c.bin_w)
                acc += (w & 1) ? a : -a;
            else if (c.bin_a)
                acc += (a & 1) ? w : -w;
            else
                acc += int64_t(a) * w;
        }
        s.acc[size_t(p)] += acc;
    }

    ++s.timing.busy;
    if (!s.started) {
        s.started = true;
        s.timing.first_busy = cycle;
    }

    if (!final_word) {
        ++s.w;
        return true;
    }

    // Final MAC of the kernel: bias/threshold, activation and emission all
    // land in this cycle.
    for (int p = 0; p < burst; ++p) {
        const int64_t ch = s.g * c.pe + p;
        int64_t acc = s.acc[size_t(p)];
        if (c.is_pool) acc = reciprocal_divide(acc, c.layer.k_x * c.layer.k_y);
        int64_t threshold = 0;
        if (c.layer.act_fn == ActFn::BinarySign)
            threshold = c.layer.has_bias ? c.bias[size_t(ch)] : 0;
        else if (c.layer.has_bias)
            acc += c.bias[size_t(ch)];
        const FxValue out =
            apply_activation(acc, c.acc_frac, c.layer.act_fn, c.layer.a_fmt, threshold);
        s.out.push(out.raw);
        if (options.trace_streams)
            s.trace.push_back(s.pos * c.layer.c_out + ch);
    }
    s.timing.last_emit = cycle;
    std::fill(s.acc.begin(), s.acc.end(), 0);
    s.w = 0;
    if (++s.g == c.groups) {
        s.g = 0;
        ++s.pos;
    }
    return true;
}

std::pair<QTensor, TimingReport> PipelineSim::run(const QTensor& input,
                                                  double clock_mhz) {
    Impl& im = *impl_;
    const ModelGraph& graph = im.graph;
    const LayerSpec& first = graph.layers.front();
    const LayerSpec& last = graph.layers.back();

    if (input.fmt != graph.input_fmt)
        throw Error(ErrorKind::TensorFormat,
                    "input tensor format does not match the graph input format");
    if (input.y != first.y_in || input.x != first.x_in || input.c != first.c_in)
        throw Error(ErrorKind::TensorFormat,
                    "input tensor dims do not match the first layer");

    const size_t n = im.blocks.size();
    std::vector<BlockState> state(n);
    for (size_t i = 0; i < n; ++i) {
        const BlockConfig& c = im.blocks[i];
        state[i].rowbuf.assign(size_t(c.rows) * c.row_len, 0);
        state[i].acc.assign(size_t(c.pe), 0);
        state[i].out.reset(c.fifo_cap);
        state[i].lane_val.assign(size_t(c.simd), 0);
        state[i].lane_ok.assign(size_t(c.simd), 0);
        const size_t words64 = size_t((c.simd + 63) / 64);
        state[i].abits.assign(words64, 0);
        state[i].mbits.assign(words64, 0);
    }

    QTensor out = QTensor::zeros(last.y_out(), last.x_out(), last.c_out, last.a_fmt);
    const int64_t expected = out.count();
    int64_t collected = 0;
    int64_t next_input = 0;
    int64_t cycle = 0, idle = 0;
    int64_t final_collect_cycle = 0;

    // A frame is quiescent once the result is complete and every stream is
    // fully drained (stride/padding tails can outlive the final output).
    auto quiescent = [&] {
        if (collected < expected) return false;
        for (size_t i = 0; i < n; ++i)
            if (!state[i].finished(im.blocks[i]) ||
                state[i].written < im.blocks[i].in_count || !state[i].out.empty())
                return false;
        return true;
    };

    while (!quiescent()) {
        ++cycle;
        bool progress = false;

        // Downstream first: a pop can free space for a push in this cycle.
        while (!state[n - 1].out.empty() && collected < expected) {
            out.raw[size_t(collected++)] = state[n - 1].out.pop();
            if (collected == expected) final_collect_cycle = cycle;
            progress = true;
        }
        for (size_t ri = n; ri-- > 0;) {
            progress |= im.pe_step(im.blocks[ri], state[ri], cycle);
            Fifo* upstream = ri == 0 ? nullptr : &state[ri - 1].out;
            progress |= im.accept_step(im.blocks[ri], state[ri], upstream,
                                       ri == 0 ? &input : nullptr,
                                       ri == 0 ? &next_input : nullptr);
        }

        if (progress) {
            idle = 0;
        } else if (++idle > im.deadlock_threshold) {
            throw Error(ErrorKind::Deadlock,
                        "pipeline made no progress for " + std::to_string(idle) +
                            " cycles (FIFO sizing bug)");
        }
    }

    TimingReport report;
    report.total_cycles = final_collect_cycle;
    report.clock_mhz = clock_mhz;
    report.ops = op_count(graph).ops();
    for (size_t i = 0; i < n; ++i) {
        LayerTiming t = state[i].timing;
        t.fifo_pushed = state[i].out.pushed;
        t.fifo_popped = state[i].out.popped;
        t.fifo_max_occupancy = state[i].out.max_occupancy;
        report.per_layer.push_back(t);
        im.last_traces[i] = std::move(state[i].trace);
    }
    return {std::move(out), std::move(report)};
}

size_t PipelineSim::layer_count() const { return impl_->blocks.size(); }

bool PipelineSim::has_window_buffer(size_t layer) const {
    return impl_->blocks[layer].layer.kind != LayerKind::FC;
}

int64_t PipelineSim::fifo_capacity(size_t layer) const {
    return impl_->blocks[layer].fifo_cap;
}

int64_t PipelineSim::input_buffer_capacity(size_t layer) const {
    const BlockConfig& c = impl_->blocks[layer];
    return int64_t(c.rows) * c.row_len;
}

std::vector<int32_t> PipelineSim::weight_word(size_t layer, int pe,
                                              int64_t address) const {
    const BlockConfig& c = impl_->blocks[layer];
    const int64_t addrs = c.groups * c.words;
    std::vector<int32_t> word(size_t(c.simd));
    for (int lane = 0; lane < c.simd; ++lane)
        word[size_t(lane)] = c.wmem[size_t((pe * addrs + address) * c.simd + lane)];
    return word;
}

const std::vector<int64_t>& PipelineSim::stream_trace(size_t layer) const {
    return impl_->last_traces[layer];
}

PipelineSim build_pipeline(const ModelGraph& graph, const AllocationPlan& plan,
                           const ParamSet& params, const SimOptions& options) {
    return PipelineSim(graph, plan, params, options);
}

TimingReport throughput_model(const ModelGraph& graph, const AllocationPlan& plan,
                              double clock_mhz) {
    TimingReport report;
    report.clock_mhz = clock_mhz;
    report.ops = op_count(graph).ops();

    const size_t n = graph.layers.size();
    std::vector<int64_t> cpp(n), busy(n);
    for (size_t i = 0; i < n; ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerAllocation& a = plan.layers[i];
        const int64_t groups = (l.c_out + a.pe - 1) / a.pe;
        cpp[i] = groups * (l.kernel_elems() / a.simd);
        busy[i] = l.out_positions() * cpp[i];
        LayerTiming t;
        t.busy = busy[i];
        report.per_layer.push_back(t);
    }

    if (n == 1) {
        // Exact: walk the position chain under the cycle contract. Element
        // e becomes visible at the start of cycle e + 2; the collector
        // drains one cycle after the final emission.
        const LayerSpec& l = graph.layers[0];
        BlockConfig c;
        c.layer = l;
        int64_t emit = 0;
        for (int64_t pos = 0; pos < l.out_positions(); ++pos) {
            const int64_t ready = c.last_elem(pos) + 2;
            const int64_t start = std::max(ready, emit + 1);
            emit = start + cpp[0] - 1;
        }
        report.total_cycles = emit + 1;
        return report;
    }

    // Steady state: the slowest layer paces the pipeline; startup adds the
    // time to fill each first window at the upstream emission rate.
    double fill = 0.0;
    double upstream_rate = 1.0;  // elements per cycle offered by the injector
    for (size_t i = 0; i < n; ++i) {
        const LayerSpec& l = graph.layers[i];
        BlockConfig c;
        c.layer = l;
        const double first_window = double(c.last_elem(0) + 1);
        fill += first_window / std::min(1.0, upstream_rate);
        upstream_rate =
            double(plan.layers[i].mac_units()) / double(l.kernel_elems());
    }
    report.total_cycles = int64_t(std::llround(fill)) +
                          *std::max_element(busy.begin(), busy.end()) + 1;
    return report;
}

}  // namespace nn2c
