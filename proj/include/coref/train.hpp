#pragma once
#include <cstdint>
#include <ostream>
#include <vector>

#include "coref/compress.hpp"
#include "coref/docio.hpp"
#include "coref/loss.hpp"
#include "coref/model.hpp"

namespace coref {

enum class LrSchedule { fixed, linear_decay };

struct TrainConfig {
    int epochs = 30;
    int batch_size = 16;
    double learning_rate = 3e-5;
    int max_seq_len = 512;
    double alpha = 1.0;
    double beta = 1.0;
    uint64_t seed = 7;
    LrSchedule lr_schedule = LrSchedule::fixed;
    AdamwConfig adamw;
    bool freeze_embeddings = false;
    MentionMode mode = MentionMode::gold;
};

void validate_train_config(const TrainConfig& cfg);

double lr_at(const TrainConfig& cfg, int epoch, int step_in_epoch,
             int steps_per_epoch = 1);

struct TrainLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_precision = 0.0, dev_recall = 0.0, dev_f1 = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    ModelParams model; // best-dev-F1 checkpoint
    std::vector<TrainLogEntry> log;
    int best_epoch = -1;
    double best_dev_f1 = -1.0;
};

// Forward/backward/step over the given initialized model. When mask is
// non-null its zeros are re-applied after every optimizer step.
TrainResult train_loop(ModelParams model, const std::vector<Document>& docs,
                       const CorpusSplit& split, const TrainConfig& cfg,
                       const SparsityMask* mask = nullptr,
                       std::ostream* log_stream = nullptr);

// Builds the vocabulary from the train split, initializes a model from
// dims with cfg.seed, and runs the loop.
TrainResult train(const std::vector<Document>& docs, const CorpusSplit& split,
                  const ModelDims& dims, const TrainConfig& cfg,
                  std::ostream* log_stream = nullptr);

} // namespace coref
