#pragma once
#include <vector>

#include "coref/document.hpp"
#include "coref/model.hpp"

namespace coref {

// Forward intermediates kept for the hand-written backward pass.
struct ForwardCache {
    std::vector<int> token_ids;
    Matrix E;                 // n x d embeddings
    std::vector<Matrix> pre;  // per layer, pre-activation
    std::vector<Matrix> H;    // H[0] = E, H[l] = relu(pre[l-1])
    Matrix Hq, Hk;            // H_L * Q, H_L * K (attention enabled only)
    Matrix A;                 // n x n attention rows
    Matrix R;                 // n x d refined representations
    std::vector<MentionSpan> spans;
    Matrix G;                 // m x 3d span representations
    bool has_attention = false;
};

Matrix embed(const Document& doc, const EmbeddingTable& table, std::vector<int>* ids_out = nullptr);

// H^0 = E, H^l = relu(H^{l-1} W_l^T + b_l); returns H^L
Matrix encode(const Matrix& E, const EncoderStack& stack, ForwardCache* cache = nullptr);

// scores S = (HQ)(HK)^T, rows softmaxed, R = A H; identity when disabled
Matrix attend(const Matrix& H, const AttentionParams& att, ForwardCache* cache = nullptr);

// concat(R_start, R_end, mean over span)
Vector span_repr(const Matrix& R, const MentionSpan& span);

Matrix build_span_matrix(const Matrix& R, const std::vector<MentionSpan>& spans);

// Full forward: embed -> encode -> attend -> span matrix for the given spans.
void encoder_forward(const Document& doc, const ModelParams& model,
                     const std::vector<MentionSpan>& spans, ForwardCache& cache);

// Accumulates parameter gradients from upstream span-representation grads dG
// (m x 3d) plus optional extra grads on R directly (n x d, may be empty).
void encoder_backward(ModelParams& model, const ForwardCache& cache,
                      const Matrix& dG, const Matrix& dR_extra = Matrix());

} // namespace coref
