#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coref/document.hpp"
#include "coref/param.hpp"

namespace coref {

struct ModelDims {
    int d = 32;       // embedding and encoder width
    int d_att = 32;   // attention projection width
    int d_aff = 32;   // affinity head output width
    int depth = 2;    // encoder layers
    bool attention = true;
    double qk_gain = 3.0;     // init gain for the shared query/key draw
    int max_width = 2;        // enumerate-mode span width cap
    double keep_ratio = 0.4;  // enumerate-mode top fraction of n tokens
};

struct EmbeddingTable {
    std::vector<std::string> itos; // index 0 is the unknown token
    std::map<std::string, int> stoi;
    ParamTensor table; // |V| x d

    int lookup(const std::string& tok) const {
        auto it = stoi.find(tok);
        return it == stoi.end() ? 0 : it->second;
    }
};

struct EncoderLayer {
    ParamTensor W; // d x d
    ParamTensor b; // 1 x d
};

struct EncoderStack {
    std::vector<EncoderLayer> layers;
};

struct AttentionParams {
    ParamTensor Q, K; // d x d_att
    bool enabled = true;
};

struct AffinityHeads {
    ParamTensor Pu, Pv; // 3d x d_aff (antecedent and anaphor roles)
};

struct MentionScorerParams {
    ParamTensor w;    // 1 x 3d
    ParamTensor bias; // 1 x 1
    double keep_ratio = 0.4;
};

struct ModelParams {
    ModelDims dims;
    EmbeddingTable emb;
    EncoderStack stack;
    AttentionParams att;
    AffinityHeads aff;
    MentionScorerParams scorer;
    uint64_t fingerprint = 0;

    std::vector<ParamTensor*> all_params();
    std::vector<const ParamTensor*> all_params() const;
    std::string config_string() const;
};

constexpr const char* kUnkToken = "<unk>";

uint64_t fnv1a64(const std::string& s);

// Sorted unique tokens from the given documents, <unk> first.
std::vector<std::string> build_vocab(const std::vector<const Document*>& docs);

// Allocates named zero tensors for the given shape; no random draws.
ModelParams make_model_shell(const ModelDims& dims, const std::vector<std::string>& vocab);

ModelParams init_model(const ModelDims& dims, const std::vector<std::string>& vocab,
                       uint64_t seed);

// Deep copy of values only (grads and moments reset).
ModelParams clone_values(const ModelParams& model);

} // namespace coref
