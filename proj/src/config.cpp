#include "coref/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "coref/error.hpp"

namespace coref {

std::vector<std::string> config_keys() {
    return {"epochs",     "batch_size", "learning_rate", "max_seq_len",
            "alpha",      "beta",       "seed",          "lr_schedule",
            "freeze_embeddings",        "mode",          "d",
            "d_att",      "d_aff",      "depth",         "attention",
            "qk_gain",    "max_width",  "keep_ratio",    "prune_sparsity",
            "quantize"};
}

const char* lr_schedule_name(LrSchedule s) {
    return s == LrSchedule::fixed ? "fixed" : "linear-decay";
}

const char* mention_mode_name(MentionMode m) {
    return m == MentionMode::gold ? "gold" : "enumerate";
}

namespace {

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw usage_error("invalid integer for config key " + key + ": " + value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw usage_error("invalid number for config key " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw usage_error("invalid boolean for config key " + key + ": " + value);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void apply_config_kv(CliConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "epochs") cfg.train.epochs = int(parse_int(key, value));
    else if (key == "batch_size") cfg.train.batch_size = int(parse_int(key, value));
    else if (key == "learning_rate") cfg.train.learning_rate = parse_double(key, value);
    else if (key == "max_seq_len") cfg.train.max_seq_len = int(parse_int(key, value));
    else if (key == "alpha") cfg.train.alpha = parse_double(key, value);
    else if (key == "beta") cfg.train.beta = parse_double(key, value);
    else if (key == "seed") cfg.train.seed = uint64_t(parse_int(key, value));
    else if (key == "lr_schedule") {
        if (value == "fixed") cfg.train.lr_schedule = LrSchedule::fixed;
        else if (value == "linear-decay") cfg.train.lr_schedule = LrSchedule::linear_decay;
        else throw usage_error("invalid lr_schedule: " + value + " (fixed | linear-decay)");
    } else if (key == "freeze_embeddings") cfg.train.freeze_embeddings = parse_bool(key, value);
    else if (key == "mode") {
        if (value == "gold") cfg.train.mode = MentionMode::gold;
        else if (value == "enumerate") cfg.train.mode = MentionMode::enumerate_spans;
        else throw usage_error("invalid mode: " + value + " (gold | enumerate)");
    } else if (key == "d") cfg.dims.d = int(parse_int(key, value));
    else if (key == "d_att") cfg.dims.d_att = int(parse_int(key, value));
    else if (key == "d_aff") cfg.dims.d_aff = int(parse_int(key, value));
    else if (key == "depth") cfg.dims.depth = int(parse_int(key, value));
    else if (key == "attention") cfg.dims.attention = parse_bool(key, value);
    else if (key == "qk_gain") cfg.dims.qk_gain = parse_double(key, value);
    else if (key == "max_width") cfg.dims.max_width = int(parse_int(key, value));
    else if (key == "keep_ratio") cfg.dims.keep_ratio = parse_double(key, value);
    else if (key == "prune_sparsity") cfg.prune_sparsity = parse_double(key, value);
    else if (key == "quantize") cfg.do_quantize = parse_bool(key, value);
    else {
        std::string valid;
        for (const auto& k : config_keys()) {
            if (!valid.empty()) valid += ", ";
            valid += k;
        }
        throw usage_error("unknown config key " + key + "; valid keys: " + valid);
    }
}

CliConfig parse_config_text(const std::string& text, const std::string& origin) {
    CliConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got: " + line);
        auto trim = [](std::string s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw usage_error(origin + ":" + std::to_string(lineno) +
                              ": empty key or value");
        apply_config_kv(cfg, key, value);
    }
    return cfg;
}

CliConfig load_config(const std::string& path) {
    if (path.empty()) return CliConfig{};
    std::ifstream is(path);
    if (!is) throw data_error("cannot read config file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string echo_config(const CliConfig& cfg) {
    std::ostringstream os;
    os << "epochs=" << cfg.train.epochs << "\n"
       << "batch_size=" << cfg.train.batch_size << "\n"
       << "learning_rate=" << fmt_double(cfg.train.learning_rate) << "\n"
       << "max_seq_len=" << cfg.train.max_seq_len << "\n"
       << "alpha=" << fmt_double(cfg.train.alpha) << "\n"
       << "beta=" << fmt_double(cfg.train.beta) << "\n"
       << "seed=" << cfg.train.seed << "\n"
       << "lr_schedule=" << lr_schedule_name(cfg.train.lr_schedule) << "\n"
       << "freeze_embeddings=" << (cfg.train.freeze_embeddings ? 1 : 0) << "\n"
       << "mode=" << mention_mode_name(cfg.train.mode) << "\n"
       << "d=" << cfg.dims.d << "\n"
       << "d_att=" << cfg.dims.d_att << "\n"
       << "d_aff=" << cfg.dims.d_aff << "\n"
       << "depth=" << cfg.dims.depth << "\n"
       << "attention=" << (cfg.dims.attention ? 1 : 0) << "\n"
       << "qk_gain=" << fmt_double(cfg.dims.qk_gain) << "\n"
       << "max_width=" << cfg.dims.max_width << "\n"
       << "keep_ratio=" << fmt_double(cfg.dims.keep_ratio) << "\n"
       << "prune_sparsity=" << fmt_double(cfg.prune_sparsity) << "\n"
       << "quantize=" << (cfg.do_quantize ? 1 : 0) << "\n";
    return os.str();
}

} // namespace coref
