#pragma once
#include <string>
#include <vector>

#include "coref/train.hpp"

namespace coref {

// Everything a config file can set: training knobs, model shape,
// mention mode, compression settings. Paths stay on the command line.
struct CliConfig {
    TrainConfig train;
    ModelDims dims;
    double prune_sparsity = 0.0;
    bool do_quantize = false;
};

std::vector<std::string> config_keys();

// key=value lines, # comments. Unknown keys are rejected with the valid list.
CliConfig load_config(const std::string& path);
CliConfig parse_config_text(const std::string& text, const std::string& origin);
void apply_config_kv(CliConfig& cfg, const std::string& key, const std::string& value);

// Echo that load_config maps back to the identical CliConfig.
std::string echo_config(const CliConfig& cfg);

const char* lr_schedule_name(LrSchedule s);
const char* mention_mode_name(MentionMode m);

} // namespace coref
