#pragma once

#include <string>
#include <vector>

#include "cdcnet/tensor/tensor.hpp"

namespace cdcnet {

// Binary netpbm, maxval 255. Values outside [0,1] are clamped when
// writing; v maps to round(255 v).

/// P6 bytes -> [1,3,H,W]. Malformed input raises DataError with the byte offset.
Tensor<float> decode_ppm(const std::vector<unsigned char>& bytes);
/// P5 bytes -> [1,1,H,W].
Tensor<float> decode_pgm(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> encode_ppm(const Tensor<float>& rgb);
std::vector<unsigned char> encode_pgm(const Tensor<float>& gray);

Tensor<float> load_ppm(const std::string& path);
Tensor<float> load_pgm(const std::string& path);
void save_ppm(const Tensor<float>& rgb, const std::string& path);
void save_pgm(const Tensor<float>& gray, const std::string& path);

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace cdcnet
