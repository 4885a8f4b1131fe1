#include "coref/loss.hpp"

#include <cmath>

#include "coref/error.hpp"

namespace coref {

LossResult coref_loss(const AffinityMatrix& A, const ClusterSet& gold,
                      double alpha, double beta) {
    if (alpha <= 0.0 || beta <= 0.0) throw data_error("alpha and beta must be positive");
    int m = A.n;
    std::vector<int> cid(size_t(m), -1);
    for (size_t c = 0; c < gold.clusters.size(); ++c) {
        for (int idx : gold.clusters[c]) {
            if (idx < 0 || idx >= m) throw data_error("gold cluster index out of range");
            cid[size_t(idx)] = int(c);
        }
    }

    LossResult res;
    res.draw.resize(size_t(m));
    if (m == 0) return res;

    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        const auto& p = A.attn[size_t(j)];
        auto& g = res.draw[size_t(j)];
        g.assign(p.size(), 0.0);

        // slots 1+i whose mention shares j's gold cluster
        std::vector<char> in_gold(p.size(), 0);
        double s = 0.0;
        bool anaphoric = false;
        if (cid[size_t(j)] >= 0) {
            for (int i = 0; i < j; ++i) {
                if (cid[size_t(i)] == cid[size_t(j)]) {
                    in_gold[size_t(i) + 1] = 1;
                    s += p[size_t(i) + 1];
                    anaphoric = true;
                }
            }
        }
        double w = anaphoric ? alpha : beta;
        if (!anaphoric) {
            in_gold[0] = 1;
            s = p[0];
        } else {
            ++res.n_anaphoric;
        }

        if (s < kProbFloor) {
            total += -w * std::log(kProbFloor); // clamped: flat region, zero grad
            continue;
        }
        total += -w * std::log(s);
        for (size_t k = 0; k < p.size(); ++k)
            g[k] = w * (p[k] - (in_gold[k] ? p[k] / s : 0.0));
    }

    double inv_m = 1.0 / double(m);
    res.loss = total * inv_m;
    for (auto& row : res.draw)
        for (double& v : row) v *= inv_m;
    return res;
}

double span_hinge_loss(const std::vector<double>& scores,
                       const std::vector<bool>& is_gold,
                       std::vector<double>* dscores) {
    if (scores.size() != is_gold.size())
        throw data_error("hinge inputs must align");
    if (dscores) dscores->assign(scores.size(), 0.0);
    if (scores.empty()) return 0.0;
    double total = 0.0;
    double inv_n = 1.0 / double(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        double t = is_gold[i] ? 1.0 : -1.0;
        double margin = 1.0 - t * scores[i];
        if (margin > 0.0) {
            total += margin;
            if (dscores) (*dscores)[i] = -t * inv_n;
        }
    }
    return total * inv_n;
}

} // namespace coref
