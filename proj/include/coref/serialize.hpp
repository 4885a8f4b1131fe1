#pragma once
#include <string>

#include "coref/compress.hpp"

namespace coref {

void save_model(const std::string& path, const ModelParams& model);
void save_quantized(const std::string& path, const QuantizedModel& qm);

bool model_file_quantized(const std::string& path);

// Loads either container; a quantized file is dequantized transparently.
ModelParams load_model(const std::string& path);

QuantizedModel load_quantized(const std::string& path);

} // namespace coref
