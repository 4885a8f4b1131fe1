#include "coref/serialize.hpp"

#include <cstring>
#include <fstream>

#include "coref/error.hpp"

// Container layout (little-endian):
//   magic "CRF1" | u32 version | u32 flags (bit0 = quantized) | u64 fingerprint
//   | dims block | u32 vocab count | {u32 len, bytes} per token
//   | u32 tensor count | per tensor: {u32 len, name} u8 dtype u64 rows u64 cols
//     [f64 scale if dtype=int8] payload (f64 or int8, row-major)

namespace coref {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'F', '1'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kFlagQuantized = 1u;

template <class T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    is.read(buf, sizeof(T));
    if (!is) throw data_error("model file truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put<uint32_t>(os, uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}

std::string get_string(std::istream& is) {
    uint32_t n = get<uint32_t>(is);
    if (n > (1u << 26)) throw data_error("model file corrupt: oversized string");
    std::string s(n, '\0');
    is.read(s.data(), std::streamsize(n));
    if (!is) throw data_error("model file truncated");
    return s;
}

void put_dims(std::ostream& os, const ModelDims& d) {
    put<int32_t>(os, d.d);
    put<int32_t>(os, d.d_att);
    put<int32_t>(os, d.d_aff);
    put<int32_t>(os, d.depth);
    put<int32_t>(os, d.max_width);
    put<uint8_t>(os, d.attention ? 1 : 0);
    put<double>(os, d.qk_gain);
    put<double>(os, d.keep_ratio);
}

ModelDims get_dims(std::istream& is) {
    ModelDims d;
    d.d = get<int32_t>(is);
    d.d_att = get<int32_t>(is);
    d.d_aff = get<int32_t>(is);
    d.depth = get<int32_t>(is);
    d.max_width = get<int32_t>(is);
    d.attention = get<uint8_t>(is) != 0;
    d.qk_gain = get<double>(is);
    d.keep_ratio = get<double>(is);
    return d;
}

struct Header {
    uint32_t flags = 0;
    uint64_t fingerprint = 0;
    ModelDims dims;
    std::vector<std::string> vocab;
    uint32_t tensor_count = 0;
};

Header read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw data_error("not a model file: " + path);
    uint32_t version = get<uint32_t>(is);
    if (version != kVersion)
        throw data_error("unsupported model file version " + std::to_string(version));
    Header h;
    h.flags = get<uint32_t>(is);
    h.fingerprint = get<uint64_t>(is);
    h.dims = get_dims(is);
    uint32_t nv = get<uint32_t>(is);
    h.vocab.reserve(nv);
    for (uint32_t i = 0; i < nv; ++i) h.vocab.push_back(get_string(is));
    h.tensor_count = get<uint32_t>(is);
    return h;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot write model file " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot read model file " + path);
    return is;
}

} // namespace

void save_model(const std::string& path, const ModelParams& model) {
    auto os = open_out(path);
    os.write(kMagic, 4);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, 0);
    put<uint64_t>(os, model.fingerprint);
    put_dims(os, model.dims);
    put<uint32_t>(os, uint32_t(model.emb.itos.size()));
    for (const auto& t : model.emb.itos) put_string(os, t);
    auto params = model.all_params();
    put<uint32_t>(os, uint32_t(params.size()));
    for (const ParamTensor* p : params) {
        put_string(os, p->name);
        put<uint8_t>(os, 0); // f64
        put<uint64_t>(os, p->rows());
        put<uint64_t>(os, p->cols());
        os.write(reinterpret_cast<const char*>(p->value.a.data()),
                 std::streamsize(p->value.size() * sizeof(double)));
    }
    if (!os) throw data_error("write failed for model file " + path);
}

void save_quantized(const std::string& path, const QuantizedModel& qm) {
    auto os = open_out(path);
    os.write(kMagic, 4);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, kFlagQuantized);
    put<uint64_t>(os, qm.fingerprint);
    put_dims(os, qm.dims);
    put<uint32_t>(os, uint32_t(qm.vocab.size()));
    for (const auto& t : qm.vocab) put_string(os, t);
    put<uint32_t>(os, uint32_t(qm.tensors.size()));
    for (const auto& qt : qm.tensors) {
        put_string(os, qt.name);
        put<uint8_t>(os, 1); // int8
        put<uint64_t>(os, qt.rows);
        put<uint64_t>(os, qt.cols);
        put<double>(os, qt.scale);
        os.write(reinterpret_cast<const char*>(qt.q.data()),
                 std::streamsize(qt.q.size()));
    }
    if (!os) throw data_error("write failed for model file " + path);
}

bool model_file_quantized(const std::string& path) {
    auto is = open_in(path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw data_error("not a model file: " + path);
    uint32_t version = get<uint32_t>(is);
    if (version != kVersion)
        throw data_error("unsupported model file version " + std::to_string(version));
    return (get<uint32_t>(is) & kFlagQuantized) != 0;
}

QuantizedModel load_quantized(const std::string& path) {
    auto is = open_in(path);
    Header h = read_header(is, path);
    if (!(h.flags & kFlagQuantized))
        throw data_error("expected a quantized model file: " + path);
    QuantizedModel qm;
    qm.dims = h.dims;
    qm.vocab = h.vocab;
    qm.fingerprint = h.fingerprint;
    for (uint32_t t = 0; t < h.tensor_count; ++t) {
        QuantizedTensor qt;
        qt.name = get_string(is);
        uint8_t dtype = get<uint8_t>(is);
        if (dtype != 1) throw data_error("mixed dtype in quantized file: " + qt.name);
        qt.rows = size_t(get<uint64_t>(is));
        qt.cols = size_t(get<uint64_t>(is));
        qt.scale = get<double>(is);
        if (!(qt.scale > 0.0)) throw data_error("non-positive scale for " + qt.name);
        qt.q.resize(qt.rows * qt.cols);
        is.read(reinterpret_cast<char*>(qt.q.data()), std::streamsize(qt.q.size()));
        if (!is) throw data_error("model file truncated");
        qm.tensors.push_back(std::move(qt));
    }
    return qm;
}

ModelParams load_model(const std::string& path) {
    if (model_file_quantized(path)) return dequantize(load_quantized(path));
    auto is = open_in(path);
    Header h = read_header(is, path);
    ModelParams model = make_model_shell(h.dims, h.vocab);
    model.fingerprint = h.fingerprint;
    auto params = model.all_params();
    if (h.tensor_count != params.size())
        throw data_error("model file tensor count mismatch");
    for (uint32_t t = 0; t < h.tensor_count; ++t) {
        std::string name = get_string(is);
        uint8_t dtype = get<uint8_t>(is);
        if (dtype != 0) throw data_error("unexpected dtype for tensor " + name);
        uint64_t rows = get<uint64_t>(is);
        uint64_t cols = get<uint64_t>(is);
        ParamTensor* target = nullptr;
        for (ParamTensor* p : params)
            if (p->name == name) target = p;
        if (!target) throw data_error("model file has unknown tensor " + name);
        if (target->rows() != rows || target->cols() != cols)
            throw data_error("tensor shape mismatch for " + name);
        is.read(reinterpret_cast<char*>(target->value.a.data()),
                std::streamsize(target->value.size() * sizeof(double)));
        if (!is) throw data_error("model file truncated");
    }
    uint64_t expect = fnv1a64(model.config_string());
    if (model.fingerprint != expect)
        throw data_error("config fingerprint mismatch: file " +
                         std::to_string(model.fingerprint) + " vs computed " +
                         std::to_string(expect));
    return model;
}

} // namespace coref
