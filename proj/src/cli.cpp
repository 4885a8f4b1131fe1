#include "coref/cli.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "coref/config.hpp"
#include "coref/docio.hpp"
#include "coref/error.hpp"
#include "coref/eval.hpp"
#include "coref/resolver.hpp"
#include "coref/serialize.hpp"

#include <json.hpp>

namespace coref {

namespace {

// Config-file-equivalent flags; values are validated by apply_config_kv so
// CLI and file agree on syntax and precedence is simply flag-over-file.
struct CfgFlags {
    // deque so the strings CLI11 binds to keep stable addresses
    std::deque<std::pair<std::string, std::string>> values; // key, raw value
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    std::string config_path;

    void add(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        auto opt = [this, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
            values.emplace_back(key, "");
            auto* o = cmd->add_option(flag, values.back().second, help);
            opts.emplace_back(key, o);
        };
        opt("--epochs", "epochs", "training epochs");
        opt("--batch-size", "batch_size", "documents per batch");
        opt("--lr", "learning_rate", "learning rate");
        opt("--max-seq-len", "max_seq_len", "truncate documents beyond this length");
        opt("--alpha", "alpha", "anaphoric loss weight");
        opt("--beta", "beta", "non-anaphoric loss weight");
        opt("--seed", "seed", "run seed");
        opt("--lr-schedule", "lr_schedule", "fixed | linear-decay");
        opt("--mode", "mode", "gold | enumerate");
        opt("--d", "d", "embedding/encoder width");
        opt("--d-att", "d_att", "attention projection width");
        opt("--d-aff", "d_aff", "affinity head width");
        opt("--depth", "depth", "encoder layers");
        opt("--qk-gain", "qk_gain", "attention init gain");
        opt("--max-width", "max_width", "enumerate-mode span width cap");
        opt("--keep-ratio", "keep_ratio", "enumerate-mode keep fraction");
        opt("--sparsity", "prune_sparsity", "prune target sparsity");
        freeze_opt = cmd->add_flag("--freeze-embeddings", "do not update embeddings");
        no_att_opt = cmd->add_flag("--no-attention", "disable the attention stage");
    }

    CLI::Option* freeze_opt = nullptr;
    CLI::Option* no_att_opt = nullptr;

    CliConfig resolve() const {
        CliConfig cfg = load_config(config_path);
        for (size_t i = 0; i < opts.size(); ++i)
            if (opts[i].second->count() > 0)
                apply_config_kv(cfg, opts[i].first, values[i].second);
        if (freeze_opt && freeze_opt->count() > 0)
            apply_config_kv(cfg, "freeze_embeddings", "1");
        if (no_att_opt && no_att_opt->count() > 0)
            apply_config_kv(cfg, "attention", "0");
        return cfg;
    }
};

std::vector<Document> docs_for_ids(const std::vector<Document>& docs,
                                   const std::vector<std::string>& ids) {
    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;
    std::vector<Document> out;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw data_error("split references unknown id " + id);
        out.push_back(*it->second);
    }
    return out;
}

MentionMode mode_of(const CliConfig& cfg) { return cfg.train.mode; }

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

int run_gen_corpus(long long n, long long seed, long long vocab, long long max_len,
                   const std::string& out) {
    auto docs = generate_synthetic_corpus(int(n), uint64_t(seed), int(vocab), int(max_len));
    write_documents(docs, out);
    std::cout << "wrote " << docs.size() << " documents to " << out << "\n";
    return 0;
}

int run_split(const std::string& data, long long seed, const std::string& out) {
    auto docs = read_documents(data);
    CorpusSplit split = split_corpus(docs, uint64_t(seed));
    write_split(split, out);
    std::cout << "wrote split (" << split.train.size() << " train, " << split.dev.size()
              << " dev, " << split.test.size() << " test) to " << out << "\n";
    return 0;
}

int run_train(const CfgFlags& flags, const std::string& data, const std::string& split_path,
              const std::string& out, const std::string& log_path) {
    CliConfig cfg = flags.resolve();
    std::ofstream log_file;
    std::ostream* log = &std::cerr;
    if (!log_path.empty()) {
        log_file.open(log_path);
        if (!log_file) throw data_error("cannot write log file " + log_path);
        log = &log_file;
    }
    *log << "# effective config\n" << echo_config(cfg);

    auto docs = read_documents(data);
    CorpusSplit split = split_path.empty() ? split_corpus(docs, cfg.train.seed)
                                           : read_split(split_path);
    TrainResult result = train(docs, split, cfg.dims, cfg.train, log);
    save_model(out, result.model);
    std::cout << "checkpoint written to " << out << " (best epoch " << result.best_epoch
              << ", dev F1 " << result.best_dev_f1 << ")\n";
    return 0;
}

int run_predict(const CfgFlags& flags, const std::string& model_path,
                const std::string& data, const std::string& out,
                const std::string& timing_out) {
    CliConfig cfg = flags.resolve();
    ModelParams model = load_model(model_path);
    auto docs = read_documents(data);
    std::ofstream os(out);
    if (!os) throw data_error("cannot write predictions to " + out);
    std::ofstream timing;
    if (!timing_out.empty()) {
        timing.open(timing_out);
        if (!timing) throw data_error("cannot write timing sidecar to " + timing_out);
    }
    for (const auto& doc : docs) {
        ResolveResult res = resolve(doc, model, mode_of(cfg));
        Document pred;
        pred.id = doc.id;
        pred.tokens = doc.tokens;
        pred.mentions = res.spans;
        pred.gold_clusters = res.clusters;
        os << document_to_line(pred) << "\n";
        if (timing.is_open()) {
            nlohmann::ordered_json j;
            j["id"] = doc.id;
            j["embed_ms"] = res.timings.embed_ms;
            j["encode_ms"] = res.timings.encode_ms;
            j["attend_ms"] = res.timings.attend_ms;
            j["spans_ms"] = res.timings.spans_ms;
            j["affinity_ms"] = res.timings.affinity_ms;
            j["select_ms"] = res.timings.select_ms;
            j["cluster_ms"] = res.timings.cluster_ms;
            j["tokens_per_second"] = res.timings.tokens_per_second;
            timing << j.dump() << "\n";
        }
    }
    std::cout << "wrote predictions for " << docs.size() << " documents to " << out << "\n";
    return 0;
}

int run_evaluate(const CfgFlags& flags, const std::string& model_path,
                 const std::string& data, const std::string& split_path,
                 std::string segment, const std::string& out) {
    CliConfig cfg = flags.resolve();
    ModelParams model = load_model(model_path);
    auto docs = read_documents(data);
    if (segment.empty()) segment = split_path.empty() ? "all" : "test";
    std::vector<Document> subset;
    if (segment == "all") {
        subset = docs;
    } else {
        if (split_path.empty())
            throw usage_error("--segment " + segment + " requires --split");
        CorpusSplit split = read_split(split_path);
        const std::vector<std::string>* ids = nullptr;
        if (segment == "train") ids = &split.train;
        else if (segment == "dev") ids = &split.dev;
        else if (segment == "test") ids = &split.test;
        else throw usage_error("invalid segment: " + segment);
        subset = docs_for_ids(docs, *ids);
    }
    EvalReport report = evaluate(subset, model, mode_of(cfg));
    std::string text = render_report(report);
    std::cout << text;
    std::cerr << "tokens_per_second " << report.tokens_per_second << "\n";
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw data_error("cannot write report to " + out);
        os << text;
    }
    return 0;
}

int run_bench(const std::string& model_path, const std::string& data, long long reps) {
    ModelParams model = load_model(model_path);
    auto docs = read_documents(data);
    BenchResult bench = benchmark(model, docs, int(reps));
    for (size_t i = 0; i < bench.tokens_per_second.size(); ++i)
        std::cout << "rep " << (i + 1) << " tokens_per_second "
                  << bench.tokens_per_second[i] << "\n";
    std::cout << "min " << bench.min_tps << "\nmedian " << bench.median_tps << "\nmax "
              << bench.max_tps << "\n"
              << "outputs_identical " << (bench.outputs_identical ? 1 : 0) << "\n";
    return 0;
}

int run_ablate(const CfgFlags& flags, const std::string& data,
               const std::string& split_path, const std::string& table_out,
               const std::string& records_out, std::string dataset_name) {
    CliConfig cfg = flags.resolve();
    auto docs = read_documents(data);
    CorpusSplit split = split_path.empty() ? split_corpus(docs, cfg.train.seed)
                                           : read_split(split_path);
    if (dataset_name.empty()) dataset_name = stem_of(data);
    std::vector<AblationVariant> variants = {
        AblationVariant::attention_off, AblationVariant::frozen_embeddings,
        AblationVariant::depth_1, AblationVariant::fixed_lr};
    auto rows = run_ablations(cfg.dims, cfg.train, docs, split, variants, dataset_name);
    std::string table = render_ablation_table(rows);
    std::cout << table;
    if (!table_out.empty()) {
        std::ofstream os(table_out);
        if (!os) throw data_error("cannot write table to " + table_out);
        os << table;
    }
    if (!records_out.empty()) {
        std::ofstream os(records_out);
        if (!os) throw data_error("cannot write records to " + records_out);
        os << ablation_records(rows);
    }
    return 0;
}

int run_prune(const CfgFlags& flags, const std::string& model_path,
              const std::string& out, long long finetune_epochs,
              const std::string& data, const std::string& split_path) {
    CliConfig cfg = flags.resolve();
    ModelParams model = load_model(model_path);
    SparsityMask mask;
    ModelParams pruned = prune(model, cfg.prune_sparsity, &mask);
    if (finetune_epochs > 0) {
        if (data.empty())
            throw usage_error("--finetune-epochs requires --data");
        auto docs = read_documents(data);
        CorpusSplit split = split_path.empty() ? split_corpus(docs, cfg.train.seed)
                                               : read_split(split_path);
        TrainConfig ft = cfg.train;
        ft.epochs = int(finetune_epochs);
        TrainResult result = train_loop(std::move(pruned), docs, split, ft, &mask);
        save_model(out, result.model);
    } else {
        save_model(out, pruned);
    }
    std::cout << "pruned model (target " << cfg.prune_sparsity << ") written to " << out
              << "\n";
    return 0;
}

int run_quantize(const std::string& model_path, const std::string& out) {
    ModelParams model = load_model(model_path);
    save_quantized(out, quantize(model));
    std::cout << "quantized model written to " << out << "\n";
    return 0;
}

} // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"coreflite: train, run, and compress a small neural coreference resolver"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::function<int()> runner;

    // gen-corpus
    {
        auto* cmd = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
        auto n = std::make_shared<long long>(0);
        auto seed = std::make_shared<long long>(7);
        auto vocab = std::make_shared<long long>(20);
        auto max_len = std::make_shared<long long>(12);
        auto out = std::make_shared<std::string>();
        cmd->add_option("--n", *n, "number of documents")->required();
        cmd->add_option("--seed", *seed, "corpus seed");
        cmd->add_option("--vocab-size", *vocab, "vocabulary size (>= 20)");
        cmd->add_option("--max-len", *max_len, "max document length (>= 8)");
        cmd->add_option("--out", *out, "output jsonl path")->required();
        cmd->callback([&runner, n, seed, vocab, max_len, out] {
            runner = [=] { return run_gen_corpus(*n, *seed, *vocab, *max_len, *out); };
        });
    }
    // split
    {
        auto* cmd = app.add_subcommand("split", "write a deterministic 80/10/10 split");
        auto data = std::make_shared<std::string>();
        auto seed = std::make_shared<long long>(7);
        auto out = std::make_shared<std::string>();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--seed", *seed, "shuffle seed");
        cmd->add_option("--out", *out, "output split json")->required();
        cmd->callback([&runner, data, seed, out] {
            runner = [=] { return run_split(*data, *seed, *out); };
        });
    }
    // train
    {
        auto* cmd = app.add_subcommand("train", "train a model and write a checkpoint");
        auto flags = std::make_shared<CfgFlags>();
        flags->add(cmd);
        auto data = std::make_shared<std::string>();
        auto split = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto log = std::make_shared<std::string>();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--split", *split, "split json (derived from --seed when absent)");
        cmd->add_option("--out", *out, "checkpoint path")->required();
        cmd->add_option("--log", *log, "training log path (default stderr)");
        cmd->callback([&runner, flags, data, split, out, log] {
            runner = [=] { return run_train(*flags, *data, *split, *out, *log); };
        });
    }
    // predict
    {
        auto* cmd = app.add_subcommand("predict", "resolve coreference for a corpus");
        auto flags = std::make_shared<CfgFlags>();
        flags->add(cmd);
        auto model = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto timing = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "checkpoint path")->required();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--out", *out, "predictions jsonl")->required();
        cmd->add_option("--timing-out", *timing, "per-document timing sidecar");
        cmd->callback([&runner, flags, model, data, out, timing] {
            runner = [=] { return run_predict(*flags, *model, *data, *out, *timing); };
        });
    }
    // evaluate
    {
        auto* cmd = app.add_subcommand("evaluate", "score a model against gold clusters");
        auto flags = std::make_shared<CfgFlags>();
        flags->add(cmd);
        auto model = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto split = std::make_shared<std::string>();
        auto segment = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "checkpoint path")->required();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--split", *split, "split json");
        cmd->add_option("--segment", *segment, "train | dev | test | all");
        cmd->add_option("--out", *out, "also write the report here");
        cmd->callback([&runner, flags, model, data, split, segment, out] {
            runner = [=] {
                return run_evaluate(*flags, *model, *data, *split, *segment, *out);
            };
        });
    }
    // bench
    {
        auto* cmd = app.add_subcommand("bench", "measure inference throughput");
        auto model = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto reps = std::make_shared<long long>(5);
        cmd->add_option("--model", *model, "checkpoint path")->required();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--reps", *reps, "timed repetitions (>= 3)");
        cmd->callback([&runner, model, data, reps] {
            runner = [=] { return run_bench(*model, *data, *reps); };
        });
    }
    // ablate
    {
        auto* cmd = app.add_subcommand("ablate", "train and score the ablation grid");
        auto flags = std::make_shared<CfgFlags>();
        flags->add(cmd);
        auto data = std::make_shared<std::string>();
        auto split = std::make_shared<std::string>();
        auto table = std::make_shared<std::string>();
        auto records = std::make_shared<std::string>();
        auto name = std::make_shared<std::string>();
        cmd->add_option("--data", *data, "corpus jsonl")->required();
        cmd->add_option("--split", *split, "split json");
        cmd->add_option("--table-out", *table, "write the text table here");
        cmd->add_option("--records-out", *records, "write one JSON record per variant");
        cmd->add_option("--dataset-name", *name, "dataset label (default: data file stem)");
        cmd->callback([&runner, flags, data, split, table, records, name] {
            runner = [=] {
                return run_ablate(*flags, *data, *split, *table, *records, *name);
            };
        });
    }
    // prune
    {
        auto* cmd = app.add_subcommand("prune", "magnitude-prune a checkpoint");
        auto flags = std::make_shared<CfgFlags>();
        flags->add(cmd);
        auto model = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto ft = std::make_shared<long long>(0);
        auto data = std::make_shared<std::string>();
        auto split = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "checkpoint path")->required();
        cmd->add_option("--out", *out, "pruned checkpoint path")->required();
        cmd->add_option("--finetune-epochs", *ft, "mask-respecting fine-tune epochs");
        cmd->add_option("--data", *data, "corpus jsonl (for fine-tuning)");
        cmd->add_option("--split", *split, "split json (for fine-tuning)");
        cmd->callback([&runner, flags, model, out, ft, data, split] {
            runner = [=] { return run_prune(*flags, *model, *out, *ft, *data, *split); };
        });
    }
    // quantize
    {
        auto* cmd = app.add_subcommand("quantize", "write an int8 checkpoint");
        auto model = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "checkpoint path")->required();
        cmd->add_option("--out", *out, "quantized checkpoint path")->required();
        cmd->callback([&runner, model, out] {
            runner = [=] { return run_quantize(*model, *out); };
        });
    }

    std::vector<const char*> argv;
    argv.push_back("coreflite");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return runner ? runner() : 1;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return int(e.kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace coref
