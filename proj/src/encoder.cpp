#include "coref/encoder.hpp"

namespace coref {

Matrix embed(const Document& doc, const EmbeddingTable& table, std::vector<int>* ids_out) {
    if (doc.tokens.empty()) throw data_error("embed: empty document " + doc.id);
    size_t n = doc.tokens.size(), d = table.table.cols();
    Matrix E(n, d);
    if (ids_out) ids_out->resize(n);
    for (size_t i = 0; i < n; ++i) {
        int row = table.lookup(doc.tokens[i]);
        if (ids_out) (*ids_out)[i] = row;
        const double* src = table.table.value.row(size_t(row));
        std::copy(src, src + d, E.row(i));
    }
    return E;
}

Matrix encode(const Matrix& E, const EncoderStack& stack, ForwardCache* cache) {
    if (cache) {
        cache->pre.clear();
        cache->H.clear();
        cache->H.push_back(E);
    }
    Matrix H = E;
    for (const auto& layer : stack.layers) {
        if (layer.W.cols() != H.cols)
            throw data_error("encode: layer input mismatch " + shape_str(layer.W.value) +
                             " vs " + shape_str(H));
        Matrix pre = matmul_nt(H, layer.W.value);
        for (size_t i = 0; i < pre.rows; ++i) {
            double* r = pre.row(i);
            for (size_t j = 0; j < pre.cols; ++j) r[j] += layer.b.value.a[j];
        }
        Matrix out(pre.rows, pre.cols);
        for (size_t k = 0; k < pre.size(); ++k) out.a[k] = pre.a[k] > 0.0 ? pre.a[k] : 0.0;
        if (cache) {
            cache->pre.push_back(pre);
            cache->H.push_back(out);
        }
        H = std::move(out);
    }
    return H;
}

Matrix attend(const Matrix& H, const AttentionParams& att, ForwardCache* cache) {
    if (H.rows == 0) throw data_error("attend: empty input");
    if (!att.enabled) {
        if (cache) cache->has_attention = false;
        return H;
    }
    Matrix Hq = matmul(H, att.Q.value);
    Matrix Hk = matmul(H, att.K.value);
    Matrix A = matmul_nt(Hq, Hk);
    for (size_t i = 0; i < A.rows; ++i) softmax_inplace(A.row(i), A.cols);
    Matrix R = matmul(A, H);
    if (cache) {
        cache->has_attention = true;
        cache->Hq = std::move(Hq);
        cache->Hk = std::move(Hk);
        cache->A = A;
    }
    return R;
}

Vector span_repr(const Matrix& R, const MentionSpan& span) {
    if (span.start < 0 || span.end >= int(R.rows) || span.start > span.end)
        throw data_error("span_repr: span out of range");
    size_t d = R.cols;
    Vector out(3 * d);
    const double* rs = R.row(size_t(span.start));
    const double* re = R.row(size_t(span.end));
    std::copy(rs, rs + d, out.begin());
    std::copy(re, re + d, out.begin() + d);
    double inv_w = 1.0 / double(span.width());
    for (int t = span.start; t <= span.end; ++t) {
        const double* rt = R.row(size_t(t));
        for (size_t j = 0; j < d; ++j) out[2 * d + j] += rt[j] * inv_w;
    }
    return out;
}

Matrix build_span_matrix(const Matrix& R, const std::vector<MentionSpan>& spans) {
    Matrix G(spans.size(), 3 * R.cols);
    for (size_t k = 0; k < spans.size(); ++k) {
        Vector g = span_repr(R, spans[k]);
        std::copy(g.begin(), g.end(), G.row(k));
    }
    return G;
}

void encoder_forward(const Document& doc, const ModelParams& model,
                     const std::vector<MentionSpan>& spans, ForwardCache& cache) {
    cache.E = embed(doc, model.emb, &cache.token_ids);
    Matrix H = encode(cache.E, model.stack, &cache);
    cache.R = attend(H, model.att, &cache);
    cache.spans = spans;
    cache.G = build_span_matrix(cache.R, spans);
}

void encoder_backward(ModelParams& model, const ForwardCache& cache,
                      const Matrix& dG, const Matrix& dR_extra) {
    if (cache.H.empty()) throw data_error("encoder_backward: forward cache missing");
    size_t n = cache.R.rows, d = cache.R.cols;

    // span grads scatter back onto R
    Matrix dR(n, d);
    if (dR_extra.size() > 0) {
        if (dR_extra.rows != n || dR_extra.cols != d)
            throw data_error("encoder_backward: dR_extra shape mismatch");
        dR = dR_extra;
    }
    if (dG.size() > 0) {
        if (dG.rows != cache.spans.size() || dG.cols != 3 * d)
            throw data_error("encoder_backward: dG shape mismatch");
        for (size_t k = 0; k < cache.spans.size(); ++k) {
            const MentionSpan& sp = cache.spans[k];
            const double* gk = dG.row(k);
            double* rs = dR.row(size_t(sp.start));
            for (size_t j = 0; j < d; ++j) rs[j] += gk[j];
            double* re = dR.row(size_t(sp.end));
            for (size_t j = 0; j < d; ++j) re[j] += gk[d + j];
            double inv_w = 1.0 / double(sp.width());
            for (int t = sp.start; t <= sp.end; ++t) {
                double* rt = dR.row(size_t(t));
                for (size_t j = 0; j < d; ++j) rt[j] += gk[2 * d + j] * inv_w;
            }
        }
    }

    const Matrix& HL = cache.H.back();
    Matrix dH(n, d);
    if (cache.has_attention) {
        // R = A H
        Matrix dA = matmul_nt(dR, HL);
        dH = matmul_tn(cache.A, dR);
        // softmax rows: dS_i = (dA_i - (dA_i . A_i)) * A_i
        Matrix dS(n, n);
        for (size_t i = 0; i < n; ++i) {
            const double* ai = cache.A.row(i);
            const double* dai = dA.row(i);
            double dot = 0.0;
            for (size_t j = 0; j < n; ++j) dot += dai[j] * ai[j];
            double* dsi = dS.row(i);
            for (size_t j = 0; j < n; ++j) dsi[j] = (dai[j] - dot) * ai[j];
        }
        // S = Hq Hk^T
        Matrix dHq = matmul(dS, cache.Hk);
        Matrix dHk = matmul_tn(dS, cache.Hq);
        Matrix dQ = matmul_tn(HL, dHq);
        Matrix dK = matmul_tn(HL, dHk);
        for (size_t k = 0; k < dQ.size(); ++k) model.att.Q.grad.a[k] += dQ.a[k];
        for (size_t k = 0; k < dK.size(); ++k) model.att.K.grad.a[k] += dK.a[k];
        Matrix dH_q = matmul_nt(dHq, model.att.Q.value);
        Matrix dH_k = matmul_nt(dHk, model.att.K.value);
        for (size_t k = 0; k < dH.size(); ++k) dH.a[k] += dH_q.a[k] + dH_k.a[k];
    } else {
        dH = dR;
    }

    // layers, last to first
    for (int l = int(model.stack.layers.size()) - 1; l >= 0; --l) {
        const Matrix& pre = cache.pre[size_t(l)];
        const Matrix& Hin = cache.H[size_t(l)];
        Matrix dPre(pre.rows, pre.cols);
        for (size_t k = 0; k < pre.size(); ++k) dPre.a[k] = pre.a[k] > 0.0 ? dH.a[k] : 0.0;
        EncoderLayer& layer = model.stack.layers[size_t(l)];
        Matrix dW = matmul_tn(dPre, Hin);
        for (size_t k = 0; k < dW.size(); ++k) layer.W.grad.a[k] += dW.a[k];
        for (size_t i = 0; i < dPre.rows; ++i) {
            const double* r = dPre.row(i);
            for (size_t j = 0; j < dPre.cols; ++j) layer.b.grad.a[j] += r[j];
        }
        dH = matmul(dPre, layer.W.value);
    }

    // embedding rows
    for (size_t i = 0; i < n; ++i) {
        double* gr = model.emb.table.grad.row(size_t(cache.token_ids[i]));
        const double* r = dH.row(i);
        for (size_t j = 0; j < d; ++j) gr[j] += r[j];
    }
}

} // namespace coref
