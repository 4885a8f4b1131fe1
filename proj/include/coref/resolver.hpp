#pragma once
#include <vector>

#include "coref/encoder.hpp"

namespace coref {

// raw[j] holds scores for anaphor j over candidates [epsilon, mention 0 .. j-1];
// the dummy's raw score is exactly 0. attn[j] is the softmax of raw[j].
struct AffinityMatrix {
    int n = 0;
    std::vector<std::vector<double>> raw;
    std::vector<std::vector<double>> attn;
};

struct AffinityCache {
    Matrix U, V; // projected span representations, m x d_aff each
};

enum class MentionMode { gold, enumerate_spans };

std::vector<MentionSpan> candidate_mentions(const Document& doc, const Matrix& R,
                                            MentionMode mode,
                                            const MentionScorerParams& scorer,
                                            int max_width);

AffinityMatrix affinity(const Matrix& G, const AffinityHeads& heads, int d,
                        AffinityCache* cache = nullptr);

// Backward from per-anaphor raw-score grads into head grads and span-repr grads.
void affinity_backward(const std::vector<std::vector<double>>& draw,
                       const AffinityCache& cache, const Matrix& G,
                       AffinityHeads& heads, int d, Matrix& dG);

CorefLinkSet select_links(const AffinityMatrix& A);

// Exhaustive maximization over all feasible assignments; n <= 10.
CorefLinkSet brute_force_links(const AffinityMatrix& A);

// Sum of chosen attention values in anaphor order.
double link_objective(const AffinityMatrix& A, const CorefLinkSet& links);

ClusterSet clusters_from_links(const CorefLinkSet& links, int n,
                               bool include_singletons = false);

struct StageTimings {
    double embed_ms = 0, encode_ms = 0, attend_ms = 0, spans_ms = 0;
    double affinity_ms = 0, select_ms = 0, cluster_ms = 0;
    double tokens_per_second = 0;
};

struct ResolveResult {
    ClusterSet clusters;
    std::vector<MentionSpan> spans;
    CorefLinkSet links;
    StageTimings timings;
};

ResolveResult resolve(const Document& doc, const ModelParams& model,
                      MentionMode mode = MentionMode::gold);

} // namespace coref
