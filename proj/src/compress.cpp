#include "coref/compress.hpp"

#include <algorithm>
#include <cmath>

#include "coref/error.hpp"
#include "coref/eval.hpp"

namespace coref {

namespace {

std::vector<ParamTensor*> prunable_tensors(ModelParams& model) {
    std::vector<ParamTensor*> out;
    for (auto& l : model.stack.layers) out.push_back(&l.W);
    out.push_back(&model.att.Q);
    out.push_back(&model.att.K);
    out.push_back(&model.aff.Pu);
    out.push_back(&model.aff.Pv);
    out.push_back(&model.scorer.w);
    return out;
}

} // namespace

std::vector<std::string> prunable_names(const ModelParams& model) {
    auto tensors = prunable_tensors(const_cast<ModelParams&>(model));
    std::vector<std::string> names;
    for (auto* t : tensors) names.push_back(t->name);
    return names;
}

ModelParams prune(const ModelParams& model, double target_sparsity,
                  SparsityMask* mask_out) {
    if (!(target_sparsity >= 0.0 && target_sparsity < 1.0))
        throw data_error("target sparsity must lie in [0,1)");
    ModelParams out = model;
    if (mask_out) {
        mask_out->target_sparsity = target_sparsity;
        mask_out->masks.clear();
    }
    if (target_sparsity == 0.0) return out;

    auto tensors = prunable_tensors(out);
    struct Entry {
        double mag;
        size_t tensor, elem;
    };
    std::vector<Entry> entries;
    for (size_t t = 0; t < tensors.size(); ++t)
        for (size_t e = 0; e < tensors[t]->value.size(); ++e)
            entries.push_back({std::fabs(tensors[t]->value.a[e]), t, e});
    // stable on ties keeps traversal order, which makes pruning idempotent
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.mag < b.mag; });
    size_t k = size_t(std::ceil(target_sparsity * double(entries.size())));
    if (k > entries.size()) k = entries.size();

    std::vector<std::vector<char>> keep(tensors.size());
    for (size_t t = 0; t < tensors.size(); ++t)
        keep[t].assign(tensors[t]->value.size(), 1);
    for (size_t i = 0; i < k; ++i) {
        tensors[entries[i].tensor]->value.a[entries[i].elem] = 0.0;
        keep[entries[i].tensor][entries[i].elem] = 0;
    }
    if (mask_out)
        for (size_t t = 0; t < tensors.size(); ++t)
            mask_out->masks.emplace_back(tensors[t]->name, std::move(keep[t]));
    return out;
}

void apply_mask(ModelParams& model, const SparsityMask& mask) {
    auto params = model.all_params();
    for (const auto& [name, flags] : mask.masks) {
        ParamTensor* target = nullptr;
        for (ParamTensor* p : params)
            if (p->name == name) target = p;
        if (!target) throw data_error("mask names unknown tensor " + name);
        if (flags.size() != target->value.size())
            throw data_error("mask shape mismatch for tensor " + name);
        for (size_t i = 0; i < flags.size(); ++i)
            if (!flags[i]) target->value.a[i] = 0.0;
    }
}

double sparsity_over_prunable(const ModelParams& model) {
    auto tensors = prunable_tensors(const_cast<ModelParams&>(model));
    size_t zeros = 0, total = 0;
    for (auto* t : tensors) {
        total += t->value.size();
        for (double v : t->value.a)
            if (v == 0.0) ++zeros;
    }
    return total ? double(zeros) / double(total) : 0.0;
}

QuantizedModel quantize(const ModelParams& model) {
    QuantizedModel qm;
    qm.dims = model.dims;
    qm.vocab = model.emb.itos;
    qm.fingerprint = model.fingerprint;
    for (const ParamTensor* p : model.all_params()) {
        double mx = 0.0;
        for (double v : p->value.a) {
            if (!std::isfinite(v))
                throw numeric_error("non-finite weight in tensor " + p->name);
            mx = std::max(mx, std::fabs(v));
        }
        QuantizedTensor qt;
        qt.name = p->name;
        qt.rows = p->rows();
        qt.cols = p->cols();
        qt.scale = mx > 0.0 ? mx / 127.0 : 1.0;
        qt.q.resize(p->value.size());
        for (size_t i = 0; i < p->value.size(); ++i) {
            double q = std::nearbyint(p->value.a[i] / qt.scale); // ties to even
            if (q > 127.0) q = 127.0;
            if (q < -127.0) q = -127.0;
            qt.q[i] = int8_t(q);
        }
        qm.tensors.push_back(std::move(qt));
    }
    return qm;
}

ModelParams dequantize(const QuantizedModel& qm) {
    ModelParams model = make_model_shell(qm.dims, qm.vocab);
    model.fingerprint = qm.fingerprint;
    auto params = model.all_params();
    for (const auto& qt : qm.tensors) {
        ParamTensor* target = nullptr;
        for (ParamTensor* p : params)
            if (p->name == qt.name) target = p;
        if (!target) throw data_error("quantized tensor has no slot: " + qt.name);
        if (target->rows() != qt.rows || target->cols() != qt.cols)
            throw data_error("quantized tensor shape mismatch: " + qt.name);
        for (size_t i = 0; i < qt.q.size(); ++i)
            target->value.a[i] = qt.scale * double(qt.q[i]);
    }
    return model;
}

CompressedEval eval_compressed(const ModelParams& full, const ModelParams& compressed,
                               const std::vector<Document>& docs) {
    EvalReport a = evaluate(docs, full);
    EvalReport b = evaluate(docs, compressed);
    CompressedEval out;
    out.full_f1 = a.link_f1;
    out.compressed_f1 = b.link_f1;
    out.delta_f1 = (b.link_f1 - a.link_f1) * 100.0; // percentage points
    out.full_tps = a.tokens_per_second;
    out.compressed_tps = b.tokens_per_second;
    out.throughput_ratio = a.tokens_per_second > 0.0
                               ? b.tokens_per_second / a.tokens_per_second
                               : 0.0;
    return out;
}

} // namespace coref
