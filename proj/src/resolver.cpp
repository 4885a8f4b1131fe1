#include "coref/resolver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "coref/error.hpp"

namespace coref {

std::vector<MentionSpan> candidate_mentions(const Document& doc, const Matrix& R,
                                            MentionMode mode,
                                            const MentionScorerParams& scorer,
                                            int max_width) {
    if (mode == MentionMode::gold) return doc.mentions;

    int n = int(doc.tokens.size());
    struct Scored {
        double score;
        MentionSpan span;
    };
    std::vector<Scored> all;
    for (int s = 0; s < n; ++s) {
        for (int e = s; e < n && e - s + 1 <= max_width; ++e) {
            MentionSpan span{s, e};
            Vector g = span_repr(R, span);
            double sc = scorer.bias.value.a[0];
            for (size_t k = 0; k < g.size(); ++k) sc += scorer.w.value.a[k] * g[k];
            all.push_back({sc, span});
        }
    }
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.span.start != b.span.start) return a.span.start < b.span.start;
        return a.span.width() < b.span.width();
    });
    size_t keep = size_t(std::ceil(scorer.keep_ratio * n));
    if (keep > all.size()) keep = all.size();
    std::vector<MentionSpan> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(all[i].span);
    std::sort(out.begin(), out.end());
    return out;
}

AffinityMatrix affinity(const Matrix& G, const AffinityHeads& heads, int d,
                        AffinityCache* cache) {
    Matrix U = matmul(G, heads.Pu.value);
    Matrix V = matmul(G, heads.Pv.value);
    double scale = std::sqrt(double(d));

    AffinityMatrix A;
    A.n = int(G.rows);
    A.raw.resize(size_t(A.n));
    A.attn.resize(size_t(A.n));
    for (int j = 0; j < A.n; ++j) {
        auto& row = A.raw[size_t(j)];
        row.assign(size_t(j) + 1, 0.0); // slot 0 is the dummy, score exactly 0
        const double* vj = V.row(size_t(j));
        for (int i = 0; i < j; ++i) {
            const double* ui = U.row(size_t(i));
            double s = 0.0;
            for (size_t k = 0; k < U.cols; ++k) s += ui[k] * vj[k];
            row[size_t(i) + 1] = s / scale;
        }
        A.attn[size_t(j)] = softmax_row(row);
    }
    if (cache) {
        cache->U = std::move(U);
        cache->V = std::move(V);
    }
    return A;
}

void affinity_backward(const std::vector<std::vector<double>>& draw,
                       const AffinityCache& cache, const Matrix& G,
                       AffinityHeads& heads, int d, Matrix& dG) {
    size_t m = G.rows;
    double inv = 1.0 / std::sqrt(double(d));
    Matrix dU(m, cache.U.cols), dV(m, cache.V.cols);
    for (size_t j = 0; j < draw.size(); ++j) {
        const auto& row = draw[j];
        for (size_t i = 0; i + 1 < row.size(); ++i) {
            double g = row[i + 1] * inv; // slot 0 is the constant dummy
            if (g == 0.0) continue;
            const double* ui = cache.U.row(i);
            const double* vj = cache.V.row(j);
            double* dui = dU.row(i);
            double* dvj = dV.row(j);
            for (size_t k = 0; k < cache.U.cols; ++k) {
                dui[k] += g * vj[k];
                dvj[k] += g * ui[k];
            }
        }
    }
    Matrix dPu = matmul_tn(G, dU);
    Matrix dPv = matmul_tn(G, dV);
    for (size_t k = 0; k < dPu.size(); ++k) heads.Pu.grad.a[k] += dPu.a[k];
    for (size_t k = 0; k < dPv.size(); ++k) heads.Pv.grad.a[k] += dPv.a[k];
    Matrix dGu = matmul_nt(dU, heads.Pu.value);
    Matrix dGv = matmul_nt(dV, heads.Pv.value);
    for (size_t k = 0; k < dG.size(); ++k) dG.a[k] += dGu.a[k] + dGv.a[k];
}

CorefLinkSet select_links(const AffinityMatrix& A) {
    CorefLinkSet links;
    links.antecedent.resize(size_t(A.n));
    for (int j = 0; j < A.n; ++j) {
        const auto& attn = A.attn[size_t(j)];
        size_t best = 0; // ties keep the dummy, then the smallest index
        for (size_t k = 1; k < attn.size(); ++k)
            if (attn[k] > attn[best]) best = k;
        links.antecedent[size_t(j)] = int(best) - 1;
    }
    return links;
}

double link_objective(const AffinityMatrix& A, const CorefLinkSet& links) {
    if (int(links.antecedent.size()) != A.n)
        throw data_error("link set size does not match affinity matrix");
    double total = 0.0;
    for (int j = 0; j < A.n; ++j) {
        int a = links.antecedent[size_t(j)];
        if (a < -1 || a >= j) throw data_error("antecedent out of range");
        total += A.attn[size_t(j)][size_t(a) + 1];
    }
    return total;
}

namespace {

void bf_search(const AffinityMatrix& A, int j, double partial,
               std::vector<int>& choice, double& best, std::vector<int>& best_choice) {
    if (j == A.n) {
        if (partial > best) {
            best = partial;
            best_choice = choice;
        }
        return;
    }
    const auto& attn = A.attn[size_t(j)];
    for (size_t k = 0; k < attn.size(); ++k) {
        choice[size_t(j)] = int(k) - 1;
        bf_search(A, j + 1, partial + attn[k], choice, best, best_choice);
    }
}

} // namespace

CorefLinkSet brute_force_links(const AffinityMatrix& A) {
    if (A.n > 10) throw data_error("brute force search limited to 10 mentions");
    CorefLinkSet links;
    links.antecedent.assign(size_t(A.n), -1);
    if (A.n == 0) return links;
    std::vector<int> choice(size_t(A.n), -1);
    double best = -1.0;
    bf_search(A, 0, 0.0, choice, best, links.antecedent);
    return links;
}

ClusterSet clusters_from_links(const CorefLinkSet& links, int n,
                               bool include_singletons) {
    if (int(links.antecedent.size()) != n)
        throw data_error("link set size does not match mention count");
    std::vector<int> parent(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) parent[size_t(i)] = i;
    auto find = [&](int x) {
        while (parent[size_t(x)] != x) {
            parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
            x = parent[size_t(x)];
        }
        return x;
    };
    for (int j = 0; j < n; ++j) {
        int a = links.antecedent[size_t(j)];
        if (a < 0) continue;
        if (a >= j) throw data_error("antecedent out of range");
        int ra = find(a), rj = find(j);
        if (ra != rj) parent[size_t(rj)] = ra;
    }
    std::vector<int> slot(size_t(n), -1);
    std::vector<Cluster> groups;
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (slot[size_t(r)] < 0) {
            slot[size_t(r)] = int(groups.size());
            groups.emplace_back();
        }
        groups[size_t(slot[size_t(r)])].push_back(i);
    }
    ClusterSet out;
    for (auto& g : groups)
        if (include_singletons || g.size() >= 2) out.clusters.push_back(std::move(g));
    out.normalize();
    return out;
}

ResolveResult resolve(const Document& doc, const ModelParams& model, MentionMode mode) {
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    ResolveResult res;

    auto t0 = clock::now();
    std::vector<int> ids;
    Matrix E = embed(doc, model.emb, &ids);
    auto t1 = clock::now();
    ForwardCache cache;
    cache.token_ids = ids;
    Matrix H = encode(E, model.stack, &cache);
    auto t2 = clock::now();
    Matrix R = attend(H, model.att, &cache);
    auto t3 = clock::now();
    res.spans = candidate_mentions(doc, R, mode, model.scorer, model.dims.max_width);
    Matrix G = build_span_matrix(R, res.spans);
    auto t4 = clock::now();
    AffinityMatrix A = affinity(G, model.aff, model.dims.d);
    auto t5 = clock::now();
    res.links = select_links(A);
    auto t6 = clock::now();
    res.clusters = clusters_from_links(res.links, int(res.spans.size()));
    auto t7 = clock::now();

    res.timings.embed_ms = ms(t0, t1);
    res.timings.encode_ms = ms(t1, t2);
    res.timings.attend_ms = ms(t2, t3);
    res.timings.spans_ms = ms(t3, t4);
    res.timings.affinity_ms = ms(t4, t5);
    res.timings.select_ms = ms(t5, t6);
    res.timings.cluster_ms = ms(t6, t7);
    double total_s = std::chrono::duration<double>(t7 - t0).count();
    res.timings.tokens_per_second = total_s > 0.0 ? double(doc.tokens.size()) / total_s : 0.0;
    return res;
}

} // namespace coref
