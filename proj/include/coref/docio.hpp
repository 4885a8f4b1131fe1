#pragma once
#include <string>
#include <vector>

#include "coref/document.hpp"

namespace coref {

// Newline-delimited JSON records: {"id", "tokens", "mentions", "clusters"}.
// Missing "clusters" reads as an empty ClusterSet.
std::vector<Document> read_documents(const std::string& path);
void write_documents(const std::vector<Document>& docs, const std::string& path);
std::string document_to_line(const Document& doc);
Document document_from_line(const std::string& line, size_t line_no);

// Templated two-entity corpus: proper names with gendered pronouns whose
// antecedents are fixed by agreement (he->bob, she->alice). Same seed, same corpus.
std::vector<Document> generate_synthetic_corpus(int n_docs, uint64_t seed,
                                                int vocab_size, int max_len);

// Deterministic shuffled 80/10/10 split (floor for dev/test, remainder to train).
CorpusSplit split_corpus(const std::vector<Document>& docs, uint64_t seed);

void write_split(const CorpusSplit& split, const std::string& path);
CorpusSplit read_split(const std::string& path);

} // namespace coref
