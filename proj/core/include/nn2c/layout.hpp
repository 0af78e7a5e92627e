#pragma once

#include <cstdint>

#include "nn2c/model_ir.hpp"

namespace nn2c {

// Buffer sizing shared by the resource estimator and the simulator, so a
// plan's cost model and the instantiated pipeline always agree.

// Rows held by a sliding-window buffer: the k_y rows feeding the current
// output line plus s_y rows filling for the next one. FC blocks buffer the
// whole input vector instead (one kernel spans it).
inline int window_rows(const LayerSpec& l) {
    return l.kind == LayerKind::FC ? l.y_in : l.k_y + l.s_y;
}

// Elements of the block's input buffer (window rows, or the FC vector).
inline int64_t input_buffer_elems(const LayerSpec& l) {
    return int64_t(window_rows(l)) * l.x_in * l.c_in;
}

// Output FIFO depth in elements. Zero override means the default of two
// channel groups of the crossing stream.
inline int64_t fifo_depth(const LayerSpec& l, int64_t override_depth) {
    return override_depth > 0 ? override_depth : 2 * int64_t(l.c_out);
}

}  // namespace nn2c
