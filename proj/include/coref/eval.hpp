#pragma once
#include <string>
#include <vector>

#include "coref/train.hpp"

namespace coref {

struct PRF {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct LinkCounts {
    double tp = 0, fp = 0, fn = 0;
};

struct MucCounts {
    double rec_num = 0, rec_den = 0, prec_num = 0, prec_den = 0;
};

double f1_of(double p, double r);

// Unordered within-cluster index pairs, canonical order, sorted unique.
std::vector<std::pair<int, int>> cluster_pairs(const ClusterSet& cs);

LinkCounts link_counts(const ClusterSet& predicted, const ClusterSet& gold);
MucCounts muc_counts(const ClusterSet& predicted, const ClusterSet& gold);

// universe_size < 0 skips the index-range check.
PRF link_prf(const ClusterSet& predicted, const ClusterSet& gold,
             int universe_size = -1);
PRF muc_prf(const ClusterSet& predicted, const ClusterSet& gold,
            int universe_size = -1);

struct EvalReport {
    double link_precision = 0, link_recall = 0, link_f1 = 0;
    double muc_precision = 0, muc_recall = 0, muc_f1 = 0;
    double mention_f1 = 0;
    bool has_mention_f1 = false;
    int docs_scored = 0;
    double tokens_per_second = 0;
};

EvalReport evaluate(const std::vector<Document>& docs, const ModelParams& model,
                    MentionMode mode = MentionMode::gold);

// Deterministic text form; timing is deliberately omitted (it goes to the
// sidecar) so reports from equal-seed runs compare byte-identical.
std::string render_report(const EvalReport& report);

enum class AblationVariant { base, attention_off, frozen_embeddings, depth_1, fixed_lr };

const char* ablation_name(AblationVariant v);

struct AblationRow {
    std::string method;
    std::string dataset;
    bool ok = true;
    std::string error;
    EvalReport report;
    int epochs = 0, batch_size = 0;
    double learning_rate = 0.0;
};

std::vector<AblationRow> run_ablations(const ModelDims& dims, const TrainConfig& cfg,
                                       const std::vector<Document>& docs,
                                       const CorpusSplit& split,
                                       const std::vector<AblationVariant>& variants,
                                       const std::string& dataset_name);

std::string render_ablation_table(const std::vector<AblationRow>& rows);
std::string ablation_records(const std::vector<AblationRow>& rows); // one JSON per line

struct BenchResult {
    std::vector<double> tokens_per_second; // one sample per repetition
    double min_tps = 0, median_tps = 0, max_tps = 0;
    bool outputs_identical = true;
};

BenchResult benchmark(const ModelParams& model, const std::vector<Document>& docs,
                      int repetitions);

} // namespace coref
