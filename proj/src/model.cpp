#include "coref/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace coref {

std::vector<ParamTensor*> ModelParams::all_params() {
    std::vector<ParamTensor*> out;
    out.push_back(&emb.table);
    for (auto& l : stack.layers) {
        out.push_back(&l.W);
        out.push_back(&l.b);
    }
    out.push_back(&att.Q);
    out.push_back(&att.K);
    out.push_back(&aff.Pu);
    out.push_back(&aff.Pv);
    out.push_back(&scorer.w);
    out.push_back(&scorer.bias);
    return out;
}

std::vector<const ParamTensor*> ModelParams::all_params() const {
    auto mut = const_cast<ModelParams*>(this)->all_params();
    return {mut.begin(), mut.end()};
}

std::string ModelParams::config_string() const {
    std::ostringstream os;
    os << "d=" << dims.d << ";d_att=" << dims.d_att << ";d_aff=" << dims.d_aff
       << ";depth=" << dims.depth << ";attention=" << (dims.attention ? 1 : 0)
       << ";qk_gain=" << dims.qk_gain << ";max_width=" << dims.max_width
       << ";keep_ratio=" << dims.keep_ratio << ";vocab=" << emb.itos.size();
    return os.str();
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> build_vocab(const std::vector<const Document*>& docs) {
    std::set<std::string> uniq;
    for (const Document* d : docs)
        for (const auto& t : d->tokens) uniq.insert(t);
    std::vector<std::string> vocab;
    vocab.push_back(kUnkToken);
    for (const auto& t : uniq)
        if (t != kUnkToken) vocab.push_back(t);
    return vocab;
}

ModelParams make_model_shell(const ModelDims& dims, const std::vector<std::string>& vocab) {
    if (dims.d < 1 || dims.d_att < 1 || dims.d_aff < 1 || dims.depth < 0)
        throw data_error("invalid model dimensions");
    if (vocab.empty() || vocab[0] != kUnkToken)
        throw data_error("vocabulary must start with the unknown token");
    ModelParams model;
    model.dims = dims;
    model.emb.itos = vocab;
    for (size_t i = 0; i < vocab.size(); ++i) model.emb.stoi[vocab[i]] = int(i);

    size_t d = size_t(dims.d);
    model.emb.table = ParamTensor("embedding", vocab.size(), d);
    for (int l = 0; l < dims.depth; ++l) {
        EncoderLayer layer;
        layer.W = ParamTensor("encoder.W" + std::to_string(l), d, d);
        layer.b = ParamTensor("encoder.b" + std::to_string(l), 1, d);
        model.stack.layers.push_back(std::move(layer));
    }
    model.att.Q = ParamTensor("attention.Q", d, size_t(dims.d_att));
    model.att.K = ParamTensor("attention.K", d, size_t(dims.d_att));
    model.att.enabled = dims.attention;
    model.aff.Pu = ParamTensor("affinity.Pu", 3 * d, size_t(dims.d_aff));
    model.aff.Pv = ParamTensor("affinity.Pv", 3 * d, size_t(dims.d_aff));
    model.scorer.w = ParamTensor("scorer.w", 1, 3 * d);
    model.scorer.bias = ParamTensor("scorer.bias", 1, 1);
    model.scorer.keep_ratio = dims.keep_ratio;
    model.fingerprint = fnv1a64(model.config_string());
    return model;
}

ModelParams init_model(const ModelDims& dims, const std::vector<std::string>& vocab,
                       uint64_t seed) {
    ModelParams model = make_model_shell(dims, vocab);
    Rng rng(seed);
    glorot_init(model.emb.table, rng);
    for (auto& layer : model.stack.layers) glorot_init(layer.W, rng);
    // Query and key share one draw so token self-compatibility starts positive;
    // independent draws leave the attention rows near uniform for the whole of a
    // short low-rate run, which buries the span signal under the document mean.
    glorot_init(model.att.Q, rng, dims.qk_gain);
    model.att.K.value = model.att.Q.value;
    glorot_init(model.aff.Pu, rng);
    glorot_init(model.aff.Pv, rng);
    glorot_init(model.scorer.w, rng);
    return model;
}

ModelParams clone_values(const ModelParams& model) {
    ModelParams out;
    out.dims = model.dims;
    out.emb.itos = model.emb.itos;
    out.emb.stoi = model.emb.stoi;
    auto copy_tensor = [](const ParamTensor& src) {
        ParamTensor t(src.name, src.rows(), src.cols());
        t.value = src.value;
        return t;
    };
    out.emb.table = copy_tensor(model.emb.table);
    for (const auto& l : model.stack.layers) {
        EncoderLayer layer;
        layer.W = copy_tensor(l.W);
        layer.b = copy_tensor(l.b);
        out.stack.layers.push_back(std::move(layer));
    }
    out.att.Q = copy_tensor(model.att.Q);
    out.att.K = copy_tensor(model.att.K);
    out.att.enabled = model.att.enabled;
    out.aff.Pu = copy_tensor(model.aff.Pu);
    out.aff.Pv = copy_tensor(model.aff.Pv);
    out.scorer.w = copy_tensor(model.scorer.w);
    out.scorer.bias = copy_tensor(model.scorer.bias);
    out.scorer.keep_ratio = model.scorer.keep_ratio;
    out.fingerprint = model.fingerprint;
    return out;
}

} // namespace coref
