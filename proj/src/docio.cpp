#include "coref/docio.hpp"

#include <fstream>

#include <json.hpp>

#include "coref/rng.hpp"

namespace coref {

using ordered_json = nlohmann::ordered_json;

std::string document_to_line(const Document& doc) {
    ordered_json j;
    j["id"] = doc.id;
    j["tokens"] = doc.tokens;
    auto mentions = ordered_json::array();
    for (const auto& m : doc.mentions) mentions.push_back({m.start, m.end});
    j["mentions"] = mentions;
    auto clusters = ordered_json::array();
    for (const auto& c : doc.gold_clusters.clusters) clusters.push_back(c);
    j["clusters"] = clusters;
    return j.dump();
}

Document document_from_line(const std::string& line, size_t line_no) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const std::exception& e) {
        throw data_error("parse error at line " + std::to_string(line_no) + ": " + e.what());
    }
    Document doc;
    try {
        doc.id = j.at("id").get<std::string>();
        doc.tokens = j.at("tokens").get<std::vector<std::string>>();
        for (const auto& m : j.at("mentions")) {
            if (!m.is_array() || m.size() != 2)
                throw data_error("mention is not a [start,end] pair in " + doc.id);
            doc.mentions.push_back({m[0].get<int>(), m[1].get<int>()});
        }
        if (j.contains("clusters"))
            for (const auto& c : j.at("clusters"))
                doc.gold_clusters.clusters.push_back(c.get<Cluster>());
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        throw data_error("malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }
    std::sort(doc.mentions.begin(), doc.mentions.end());
    doc.gold_clusters.normalize();
    validate_document(doc);
    return doc;
}

std::vector<Document> read_documents(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open document file: " + path);
    std::vector<Document> docs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        docs.push_back(document_from_line(line, line_no));
    }
    return docs;
}

void write_documents(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    for (const auto& doc : docs) out << document_to_line(doc) << "\n";
    if (!out) throw data_error("write failure on " + path);
}

namespace {

const char* kNames[2] = {"bob", "alice"};
const char* kPronouns[2] = {"he", "she"};
const char* kVerbs[8] = {"ran",    "smiled", "left",    "waited",
                         "spoke",  "nodded", "laughed", "frowned"};
constexpr int kCoreVocab = 12; // 2 names + 2 pronouns + 8 verbs

} // namespace

std::vector<Document> generate_synthetic_corpus(int n_docs, uint64_t seed,
                                                int vocab_size, int max_len) {
    if (n_docs < 1) throw data_error("generate_synthetic_corpus: n_docs must be >= 1");
    if (vocab_size < 20) throw data_error("generate_synthetic_corpus: vocab_size must be >= 20");
    if (max_len < 8) throw data_error("generate_synthetic_corpus: max_len must be >= 8");

    int filler_pool = vocab_size - kCoreVocab;
    Rng rng(seed);
    std::vector<Document> docs;
    docs.reserve(size_t(n_docs));
    for (int di = 0; di < n_docs; ++di) {
        Document doc;
        doc.id = "d" + std::to_string(di);
        int target = 8 + int(rng.index(uint64_t(max_len - 8 + 1)));
        bool introduced[2] = {false, false};
        std::vector<int> mention_entity;
        while (int(doc.tokens.size()) < target - 2) {
            int e = int(rng.index(2));
            bool pronoun = introduced[e] && rng.index(100) < 75;
            int start = int(doc.tokens.size());
            doc.tokens.push_back(pronoun ? kPronouns[e] : kNames[e]);
            introduced[e] = true;
            doc.mentions.push_back({start, start});
            mention_entity.push_back(e);
            doc.tokens.push_back(kVerbs[rng.index(8)]);
            if (rng.index(100) < 10)
                doc.tokens.push_back("w" + std::to_string(rng.index(uint64_t(filler_pool))));
        }
        Cluster by_entity[2];
        for (size_t mi = 0; mi < mention_entity.size(); ++mi)
            by_entity[mention_entity[mi]].push_back(int(mi));
        for (int e = 0; e < 2; ++e)
            if (!by_entity[e].empty()) doc.gold_clusters.clusters.push_back(by_entity[e]);
        doc.gold_clusters.normalize();
        docs.push_back(std::move(doc));
    }
    return docs;
}

CorpusSplit split_corpus(const std::vector<Document>& docs, uint64_t seed) {
    size_t n = docs.size();
    if (n < 10) throw data_error("split_corpus: need at least 10 documents");
    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& d : docs) ids.push_back(d.id);
    Rng rng(seed);
    rng.shuffle(ids);
    size_t n_dev = n / 10, n_test = n / 10, n_train = n - n_dev - n_test;
    CorpusSplit split;
    split.train.assign(ids.begin(), ids.begin() + n_train);
    split.dev.assign(ids.begin() + n_train, ids.begin() + n_train + n_dev);
    split.test.assign(ids.begin() + n_train + n_dev, ids.end());
    return split;
}

void write_split(const CorpusSplit& split, const std::string& path) {
    ordered_json j;
    j["train"] = split.train;
    j["dev"] = split.dev;
    j["test"] = split.test;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << j.dump() << "\n";
    if (!out) throw data_error("write failure on " + path);
}

CorpusSplit read_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open split file: " + path);
    ordered_json j;
    try {
        in >> j;
        CorpusSplit split;
        split.train = j.at("train").get<std::vector<std::string>>();
        split.dev = j.at("dev").get<std::vector<std::string>>();
        split.test = j.at("test").get<std::vector<std::string>>();
        return split;
    } catch (const std::exception& e) {
        throw data_error("malformed split file " + path + ": " + e.what());
    }
}

} // namespace coref
