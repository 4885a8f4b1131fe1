#include "coref/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>

#include "coref/encoder.hpp"
#include "coref/error.hpp"
#include "coref/eval.hpp"
#include "coref/resolver.hpp"

namespace coref {

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw data_error("epochs must be >= 1");
    if (cfg.batch_size < 1) throw data_error("batch_size must be >= 1");
    if (cfg.max_seq_len < 1) throw data_error("max_seq_len must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw data_error("learning_rate must be positive");
    if (!(cfg.alpha > 0.0) || !(cfg.beta > 0.0))
        throw data_error("alpha and beta must be positive");
}

double lr_at(const TrainConfig& cfg, int epoch, int step_in_epoch, int steps_per_epoch) {
    if (cfg.lr_schedule == LrSchedule::fixed) return cfg.learning_rate;
    double total = double(cfg.epochs) * double(steps_per_epoch);
    double done = double(epoch) * double(steps_per_epoch) + double(step_in_epoch);
    double progress = total > 0.0 ? done / total : 0.0;
    return cfg.learning_rate * (1.0 - progress);
}

namespace {

Document truncate_doc(const Document& doc, int max_len) {
    Document t;
    t.id = doc.id;
    t.tokens.assign(doc.tokens.begin(), doc.tokens.begin() + max_len);
    std::vector<int> remap(doc.mentions.size(), -1);
    for (size_t i = 0; i < doc.mentions.size(); ++i) {
        if (doc.mentions[i].end < max_len) {
            remap[i] = int(t.mentions.size());
            t.mentions.push_back(doc.mentions[i]);
        }
    }
    for (const auto& c : doc.gold_clusters.clusters) {
        Cluster nc;
        for (int idx : c)
            if (remap[size_t(idx)] >= 0) nc.push_back(remap[size_t(idx)]);
        if (!nc.empty()) t.gold_clusters.clusters.push_back(std::move(nc));
    }
    t.gold_clusters.normalize();
    return t;
}

// Forward + backward for one document; returns its loss contribution.
double doc_step(ModelParams& model, const Document& doc, const TrainConfig& cfg) {
    ForwardCache cache;
    encoder_forward(doc, model, doc.mentions, cache);
    AffinityCache acache;
    AffinityMatrix A = affinity(cache.G, model.aff, model.dims.d, &acache);
    LossResult loss = coref_loss(A, doc.gold_clusters, cfg.alpha, cfg.beta);

    Matrix dG(cache.G.rows, cache.G.cols);
    affinity_backward(loss.draw, acache, cache.G, model.aff, model.dims.d, dG);
    encoder_backward(model, cache, dG);

    double total = loss.loss;
    if (cfg.mode == MentionMode::enumerate_spans) {
        // joint detection hinge; gradients reach the scorer only
        int n = int(doc.tokens.size());
        std::vector<MentionSpan> spans;
        std::vector<double> scores;
        std::vector<bool> is_gold;
        for (int s = 0; s < n; ++s) {
            for (int e = s; e < n && e - s + 1 <= model.dims.max_width; ++e) {
                MentionSpan span{s, e};
                Vector g = span_repr(cache.R, span);
                double sc = model.scorer.bias.value.a[0];
                for (size_t k = 0; k < g.size(); ++k)
                    sc += model.scorer.w.value.a[k] * g[k];
                spans.push_back(span);
                scores.push_back(sc);
                is_gold.push_back(std::binary_search(doc.mentions.begin(),
                                                     doc.mentions.end(), span));
            }
        }
        std::vector<double> ds;
        total += span_hinge_loss(scores, is_gold, &ds);
        for (size_t i = 0; i < spans.size(); ++i) {
            if (ds[i] == 0.0) continue;
            Vector g = span_repr(cache.R, spans[i]);
            for (size_t k = 0; k < g.size(); ++k)
                model.scorer.w.grad.a[k] += ds[i] * g[k];
            model.scorer.bias.grad.a[0] += ds[i];
        }
    }
    return total;
}

} // namespace

TrainResult train_loop(ModelParams model, const std::vector<Document>& docs,
                       const CorpusSplit& split, const TrainConfig& cfg,
                       const SparsityMask* mask, std::ostream* log_stream) {
    validate_train_config(cfg);
    if (split.train.empty()) throw data_error("empty train split");
    std::ostream& log = log_stream ? *log_stream : std::cerr;

    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;
    auto lookup = [&by_id](const std::string& id) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw data_error("split references unknown id " + id);
        return it->second;
    };

    std::vector<Document> train_docs;
    for (const auto& id : split.train) {
        const Document* d = lookup(id);
        if (int(d->tokens.size()) > cfg.max_seq_len) {
            log << "warning: truncating document " << d->id << " from "
                << d->tokens.size() << " to " << cfg.max_seq_len << " tokens\n";
            train_docs.push_back(truncate_doc(*d, cfg.max_seq_len));
        } else {
            train_docs.push_back(*d);
        }
    }
    std::vector<Document> dev_docs;
    for (const auto& id : split.dev) dev_docs.push_back(*lookup(id));

    std::vector<ParamTensor*> params = model.all_params();
    if (cfg.freeze_embeddings)
        params.erase(std::remove(params.begin(), params.end(), &model.emb.table),
                     params.end());

    Rng shuffle_rng(cfg.seed ^ 0x517cc1b727220a95ULL);
    std::vector<size_t> order(train_docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    int steps_per_epoch = int((train_docs.size() + size_t(cfg.batch_size) - 1) /
                              size_t(cfg.batch_size));

    TrainResult result;
    long step_index = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;

        for (int b = 0; b < steps_per_epoch; ++b) {
            size_t lo = size_t(b) * size_t(cfg.batch_size);
            size_t hi = std::min(lo + size_t(cfg.batch_size), train_docs.size());
            double batch_loss = 0.0;
            for (size_t k = lo; k < hi; ++k)
                batch_loss += doc_step(model, train_docs[order[k]], cfg);
            if (!std::isfinite(batch_loss))
                throw numeric_error("non-finite loss in batch " + std::to_string(epoch) +
                                    ":" + std::to_string(b));
            epoch_loss += batch_loss;

            double inv = 1.0 / double(hi - lo);
            for (ParamTensor* p : params)
                for (double& g : p->grad.a) g *= inv;
            adamw_step(params, lr_at(cfg, epoch, b, steps_per_epoch), cfg.adamw,
                       ++step_index);
            if (cfg.freeze_embeddings) model.emb.table.zero_grad();
            if (mask) apply_mask(model, *mask);
        }

        EvalReport dev = evaluate(dev_docs, model, MentionMode::gold);
        TrainLogEntry entry;
        entry.epoch = epoch + 1;
        entry.train_loss = epoch_loss / double(train_docs.size());
        entry.dev_precision = dev.link_precision;
        entry.dev_recall = dev.link_recall;
        entry.dev_f1 = dev.link_f1;
        entry.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(entry);

        char line[192];
        std::snprintf(line, sizeof line,
                      "epoch=%d train_loss=%.6f dev_precision=%.6f dev_recall=%.6f "
                      "dev_f1=%.6f wall_seconds=%.3f\n",
                      entry.epoch, entry.train_loss, entry.dev_precision,
                      entry.dev_recall, entry.dev_f1, entry.wall_seconds);
        log << line;

        if (entry.dev_f1 > result.best_dev_f1) {
            result.best_dev_f1 = entry.dev_f1;
            result.best_epoch = entry.epoch;
            result.model = clone_values(model);
        }
    }
    if (result.best_epoch < 0) result.model = clone_values(model);
    return result;
}

TrainResult train(const std::vector<Document>& docs, const CorpusSplit& split,
                  const ModelDims& dims, const TrainConfig& cfg,
                  std::ostream* log_stream) {
    validate_train_config(cfg);
    if (split.train.empty()) throw data_error("empty train split");
    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;
    std::vector<const Document*> train_ptrs;
    for (const auto& id : split.train) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw data_error("split references unknown id " + id);
        train_ptrs.push_back(it->second);
    }
    ModelParams model = init_model(dims, build_vocab(train_ptrs), cfg.seed);
    return train_loop(std::move(model), docs, split, cfg, nullptr, log_stream);
}

} // namespace coref
