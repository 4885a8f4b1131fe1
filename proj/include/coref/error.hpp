#pragma once
#include <stdexcept>
#include <string>

namespace coref {

// Error categories map onto CLI exit codes: usage=1, data=2, numeric=3.
enum class errkind { usage = 1, data = 2, numeric = 3 };

struct error : std::runtime_error {
    errkind kind;
    error(errkind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

inline error usage_error(const std::string& msg) { return error(errkind::usage, msg); }
inline error data_error(const std::string& msg) { return error(errkind::data, msg); }
inline error numeric_error(const std::string& msg) { return error(errkind::numeric, msg); }

} // namespace coref
