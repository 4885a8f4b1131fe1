#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coref/model.hpp"

namespace coref {

struct QuantizedTensor {
    std::string name;
    size_t rows = 0, cols = 0;
    double scale = 1.0; // dequantized value = scale * int value
    std::vector<int8_t> q;
};

struct QuantizedModel {
    ModelDims dims;
    std::vector<std::string> vocab;
    uint64_t fingerprint = 0;
    std::vector<QuantizedTensor> tensors; // all_params order
};

struct SparsityMask {
    double target_sparsity = 0.0;
    // tensor name -> keep flags (0 = pruned), row-major; empty at target 0
    std::vector<std::pair<std::string, std::vector<char>>> masks;
};

// Names of the tensors global magnitude pruning applies to: the weight
// matrices. Biases and the embedding table are exempt.
std::vector<std::string> prunable_names(const ModelParams& model);

ModelParams prune(const ModelParams& model, double target_sparsity,
                  SparsityMask* mask_out = nullptr);

// Zeroes masked-out entries; call after every optimizer step when
// fine-tuning a pruned model.
void apply_mask(ModelParams& model, const SparsityMask& mask);

double sparsity_over_prunable(const ModelParams& model);

QuantizedModel quantize(const ModelParams& model);

ModelParams dequantize(const QuantizedModel& qm);

struct CompressedEval {
    double full_f1 = 0, compressed_f1 = 0, delta_f1 = 0;
    double full_tps = 0, compressed_tps = 0, throughput_ratio = 0;
};

CompressedEval eval_compressed(const ModelParams& full, const ModelParams& compressed,
                               const std::vector<Document>& docs);

} // namespace coref
