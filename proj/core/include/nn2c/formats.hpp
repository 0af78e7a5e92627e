#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn2c/model_ir.hpp"
#include "nn2c/tensor.hpp"

namespace nn2c {

// Binary container codecs. Both containers are little-endian with no
// alignment padding beyond what is stated.
//
// Parameter container ("NN2C", version 1):
//   magic[4] version:u32 layer_count:u32
//   per layer:
//     flags:u8 (bit0 = binary weights, bit1 = has_bias)
//     weight_count:u64, weight payload
//     bias_count:u64, bias payload (i32 each)
//   Fixed-point payloads use the smallest of {1,2,4} bytes that holds the
//   declared bit width, two's complement. Binary payloads are bit-packed
//   LSB-first and padded to a byte boundary.
//
// Tensor container ("NNTF", version 1):
//   magic[4] version:u32 y:u32 x:u32 c:u32 total_bits:u8 frac_bits:u8
//   payload in channel-first element order, encoded as above.

ParamSet load_params(const std::vector<uint8_t>& bytes, const ModelGraph& graph);
std::vector<uint8_t> save_params(const ModelGraph& graph, const ParamSet& params);

QTensor load_tensor(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> save_tensor(const QTensor& tensor);

// Whole-file helpers; errors carry the path in the message.
std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nn2c
