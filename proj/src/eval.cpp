#include "coref/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "coref/error.hpp"
#include "coref/resolver.hpp"

#include <json.hpp>

namespace coref {

double f1_of(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::vector<std::pair<int, int>> cluster_pairs(const ClusterSet& cs) {
    std::vector<std::pair<int, int>> out;
    for (const auto& c : cs.clusters) {
        for (size_t i = 0; i < c.size(); ++i) {
            for (size_t j = i + 1; j < c.size(); ++j) {
                int a = c[i], b = c[j];
                if (a > b) std::swap(a, b);
                out.emplace_back(a, b);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LinkCounts link_counts(const ClusterSet& predicted, const ClusterSet& gold) {
    auto pp = cluster_pairs(predicted);
    auto gp = cluster_pairs(gold);
    double tp = 0;
    size_t i = 0, j = 0;
    while (i < pp.size() && j < gp.size()) {
        if (pp[i] == gp[j]) {
            ++tp;
            ++i;
            ++j;
        } else if (pp[i] < gp[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return {tp, double(pp.size()) - tp, double(gp.size()) - tp};
}

namespace {

void check_universe(const ClusterSet& cs, int n, const char* which) {
    for (const auto& c : cs.clusters)
        for (int idx : c)
            if (idx < 0 || idx >= n)
                throw data_error(std::string("mention universe mismatch: ") + which +
                                 " cluster index " + std::to_string(idx) +
                                 " outside universe of " + std::to_string(n));
}

int max_index(const ClusterSet& cs) {
    int mx = -1;
    for (const auto& c : cs.clusters)
        for (int idx : c) mx = std::max(mx, idx);
    return mx;
}

// MUC half-score: links needed to rebuild each cluster of `from` given the
// partition induced by `by`; mentions absent from `by` count as singletons.
void muc_half(const ClusterSet& from, const ClusterSet& by, double& num, double& den) {
    int mx = std::max(max_index(from), max_index(by));
    std::vector<int> block(size_t(mx + 1), -1);
    for (size_t b = 0; b < by.clusters.size(); ++b)
        for (int idx : by.clusters[b]) block[size_t(idx)] = int(b);
    for (const auto& c : from.clusters) {
        std::vector<int> seen;
        int absent = 0;
        for (int idx : c) {
            int b = block[size_t(idx)];
            if (b < 0)
                ++absent;
            else
                seen.push_back(b);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        int partitions = int(seen.size()) + absent;
        num += double(int(c.size()) - partitions);
        den += double(int(c.size()) - 1);
    }
}

} // namespace

MucCounts muc_counts(const ClusterSet& predicted, const ClusterSet& gold) {
    MucCounts m;
    muc_half(gold, predicted, m.rec_num, m.rec_den);
    muc_half(predicted, gold, m.prec_num, m.prec_den);
    return m;
}

PRF link_prf(const ClusterSet& predicted, const ClusterSet& gold, int universe_size) {
    if (universe_size >= 0) {
        check_universe(predicted, universe_size, "predicted");
        check_universe(gold, universe_size, "gold");
    }
    LinkCounts c = link_counts(predicted, gold);
    PRF out;
    out.precision = (c.tp + c.fp) > 0 ? c.tp / (c.tp + c.fp) : 1.0;
    out.recall = (c.tp + c.fn) > 0 ? c.tp / (c.tp + c.fn) : 1.0;
    out.f1 = f1_of(out.precision, out.recall);
    return out;
}

PRF muc_prf(const ClusterSet& predicted, const ClusterSet& gold, int universe_size) {
    if (universe_size >= 0) {
        check_universe(predicted, universe_size, "predicted");
        check_universe(gold, universe_size, "gold");
    }
    MucCounts m = muc_counts(predicted, gold);
    PRF out;
    out.recall = m.rec_den > 0 ? m.rec_num / m.rec_den : 0.0;
    out.precision = m.prec_den > 0 ? m.prec_num / m.prec_den : 0.0;
    out.f1 = f1_of(out.precision, out.recall);
    return out;
}

EvalReport evaluate(const std::vector<Document>& docs, const ModelParams& model,
                    MentionMode mode) {
    using clock = std::chrono::steady_clock;
    LinkCounts lc;
    MucCounts mc;
    double men_tp = 0, men_fp = 0, men_fn = 0;
    size_t tokens = 0;
    double secs = 0;

    for (const auto& doc : docs) {
        auto t0 = clock::now();
        ResolveResult res = resolve(doc, model, mode);
        secs += std::chrono::duration<double>(clock::now() - t0).count();
        tokens += doc.tokens.size();

        // shared universe: union of candidate spans and gold mention spans
        std::vector<MentionSpan> uni = res.spans;
        uni.insert(uni.end(), doc.mentions.begin(), doc.mentions.end());
        std::sort(uni.begin(), uni.end());
        uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
        auto uidx = [&uni](const MentionSpan& s) {
            return int(std::lower_bound(uni.begin(), uni.end(), s) - uni.begin());
        };

        ClusterSet pred;
        for (const auto& c : res.clusters.clusters) {
            Cluster nc;
            for (int i : c) nc.push_back(uidx(res.spans[size_t(i)]));
            pred.clusters.push_back(std::move(nc));
        }
        pred.normalize();
        ClusterSet gold;
        for (const auto& c : doc.gold_clusters.clusters) {
            Cluster nc;
            for (int i : c) nc.push_back(uidx(doc.mentions[size_t(i)]));
            gold.clusters.push_back(std::move(nc));
        }
        gold.normalize();

        LinkCounts dl = link_counts(pred, gold);
        lc.tp += dl.tp;
        lc.fp += dl.fp;
        lc.fn += dl.fn;
        MucCounts dm = muc_counts(pred, gold);
        mc.rec_num += dm.rec_num;
        mc.rec_den += dm.rec_den;
        mc.prec_num += dm.prec_num;
        mc.prec_den += dm.prec_den;

        if (mode == MentionMode::enumerate_spans) {
            std::vector<MentionSpan> ps = res.spans, gs = doc.mentions;
            std::sort(ps.begin(), ps.end());
            std::sort(gs.begin(), gs.end());
            std::vector<MentionSpan> inter;
            std::set_intersection(ps.begin(), ps.end(), gs.begin(), gs.end(),
                                  std::back_inserter(inter));
            men_tp += double(inter.size());
            men_fp += double(ps.size() - inter.size());
            men_fn += double(gs.size() - inter.size());
        }
    }

    EvalReport r;
    r.docs_scored = int(docs.size());
    r.link_precision = (lc.tp + lc.fp) > 0 ? lc.tp / (lc.tp + lc.fp) : 1.0;
    r.link_recall = (lc.tp + lc.fn) > 0 ? lc.tp / (lc.tp + lc.fn) : 1.0;
    r.link_f1 = f1_of(r.link_precision, r.link_recall);
    r.muc_recall = mc.rec_den > 0 ? mc.rec_num / mc.rec_den : 0.0;
    r.muc_precision = mc.prec_den > 0 ? mc.prec_num / mc.prec_den : 0.0;
    r.muc_f1 = f1_of(r.muc_precision, r.muc_recall);
    if (mode == MentionMode::enumerate_spans) {
        double mp = (men_tp + men_fp) > 0 ? men_tp / (men_tp + men_fp) : 1.0;
        double mr = (men_tp + men_fn) > 0 ? men_tp / (men_tp + men_fn) : 1.0;
        r.mention_f1 = f1_of(mp, mr);
        r.has_mention_f1 = true;
    }
    r.tokens_per_second = secs > 0 ? double(tokens) / secs : 0.0;
    return r;
}

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string render_report(const EvalReport& report) {
    std::ostringstream os;
    os << "docs_scored " << report.docs_scored << "\n"
       << "link_precision " << fmt6(report.link_precision) << "\n"
       << "link_recall " << fmt6(report.link_recall) << "\n"
       << "link_f1 " << fmt6(report.link_f1) << "\n"
       << "muc_precision " << fmt6(report.muc_precision) << "\n"
       << "muc_recall " << fmt6(report.muc_recall) << "\n"
       << "muc_f1 " << fmt6(report.muc_f1) << "\n";
    if (report.has_mention_f1) os << "mention_f1 " << fmt6(report.mention_f1) << "\n";
    return os.str();
}

const char* ablation_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::base: return "base";
        case AblationVariant::attention_off: return "attention-off";
        case AblationVariant::frozen_embeddings: return "frozen-embeddings";
        case AblationVariant::depth_1: return "depth-1";
        case AblationVariant::fixed_lr: return "fixed-lr";
    }
    return "?";
}

std::vector<AblationRow> run_ablations(const ModelDims& dims, const TrainConfig& cfg,
                                       const std::vector<Document>& docs,
                                       const CorpusSplit& split,
                                       const std::vector<AblationVariant>& variants,
                                       const std::string& dataset_name) {
    std::vector<AblationVariant> all;
    all.push_back(AblationVariant::base);
    for (AblationVariant v : variants)
        if (v != AblationVariant::base) all.push_back(v);

    std::vector<Document> test_docs;
    {
        std::map<std::string, const Document*> idmap;
        for (const auto& d : docs) idmap[d.id] = &d;
        for (const auto& id : split.test) {
            auto it = idmap.find(id);
            if (it == idmap.end()) throw data_error("split references unknown id " + id);
            test_docs.push_back(*it->second);
        }
    }

    std::vector<AblationRow> rows;
    for (AblationVariant v : all) {
        AblationRow row;
        row.method = ablation_name(v);
        row.dataset = dataset_name;
        ModelDims d = dims;
        TrainConfig c = cfg;
        switch (v) {
            case AblationVariant::base: break;
            case AblationVariant::attention_off: d.attention = false; break;
            case AblationVariant::frozen_embeddings: c.freeze_embeddings = true; break;
            case AblationVariant::depth_1: d.depth = 1; break;
            case AblationVariant::fixed_lr:
                c.lr_schedule = LrSchedule::fixed;
                c.learning_rate = 1e-5;
                break;
        }
        row.epochs = c.epochs;
        row.batch_size = c.batch_size;
        row.learning_rate = c.learning_rate;
        try {
            TrainResult tr = train(docs, split, d, c);
            row.report = evaluate(test_docs, tr.model, c.mode);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-12s %-10s %-10s %-10s %-7s %-6s %-10s\n",
                  "Method", "Dataset", "F1", "Precision", "Recall", "Epochs",
                  "Batch", "LR");
    os << line;
    for (const auto& r : rows) {
        if (!r.ok) {
            std::snprintf(line, sizeof line, "%-20s %-12s failed: %s\n",
                          r.method.c_str(), r.dataset.c_str(), r.error.c_str());
            os << line;
            continue;
        }
        std::snprintf(line, sizeof line,
                      "%-20s %-12s %-10.6f %-10.6f %-10.6f %-7d %-6d %-10g\n",
                      r.method.c_str(), r.dataset.c_str(), r.report.link_f1,
                      r.report.link_precision, r.report.link_recall, r.epochs,
                      r.batch_size, r.learning_rate);
        os << line;
    }
    return os.str();
}

std::string ablation_records(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["method"] = r.method;
        j["dataset"] = r.dataset;
        j["ok"] = r.ok;
        if (!r.ok) {
            j["error"] = r.error;
        } else {
            j["f1"] = fmt6(r.report.link_f1);
            j["precision"] = fmt6(r.report.link_precision);
            j["recall"] = fmt6(r.report.link_recall);
            j["muc_f1"] = fmt6(r.report.muc_f1);
        }
        j["epochs"] = r.epochs;
        j["batch_size"] = r.batch_size;
        j["learning_rate"] = r.learning_rate;
        os << j.dump() << "\n";
    }
    return os.str();
}

BenchResult benchmark(const ModelParams& model, const std::vector<Document>& docs,
                      int repetitions) {
    if (repetitions < 3) throw data_error("benchmark needs at least 3 repetitions");
    using clock = std::chrono::steady_clock;
    size_t tokens = 0;
    for (const auto& d : docs) tokens += d.tokens.size();

    std::vector<ClusterSet> first;
    BenchResult out;
    for (int rep = -1; rep < repetitions; ++rep) { // rep -1 is the warm-up
        auto t0 = clock::now();
        std::vector<ClusterSet> got;
        got.reserve(docs.size());
        for (const auto& d : docs) got.push_back(resolve(d, model).clusters);
        double secs = std::chrono::duration<double>(clock::now() - t0).count();
        if (rep < 0) {
            first = std::move(got);
            continue;
        }
        out.tokens_per_second.push_back(secs > 0 ? double(tokens) / secs : 0.0);
        for (size_t i = 0; i < got.size(); ++i)
            if (!(got[i].clusters == first[i].clusters)) out.outputs_identical = false;
    }
    std::vector<double> s = out.tokens_per_second;
    std::sort(s.begin(), s.end());
    out.min_tps = s.front();
    out.max_tps = s.back();
    size_t n = s.size();
    out.median_tps = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    return out;
}

} // namespace coref
