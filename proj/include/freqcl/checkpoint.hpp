#pragma once

#include <string>
#include <vector>

#include "freqcl/encoder.hpp"
#include "freqcl/tensor.hpp"

namespace freqcl {

// Binary tensor container, little-endian:
//   magic "FQCL" | version u32 = 1 | tensor count u32 |
//   per tensor: name length u16, UTF-8 name, rank u8, dims u32 x rank,
//               payload f32 x prod(dims)
// Trailing bytes are an error.
void write_tensor_file(const std::string& path, const std::vector<NamedTensor<float>>& tensors);
std::vector<NamedTensor<float>> read_tensor_file(const std::string& path);

void save_checkpoint(const Params<float>& params, const std::string& path);
Params<float> load_checkpoint(const std::string& path);

// Compares names and shapes against a freshly derived layout for cfg;
// throws FormatError naming the first offending tensor.
void validate_checkpoint_shapes(const Params<float>& params, const EncoderConfig& cfg);

}  // namespace freqcl
