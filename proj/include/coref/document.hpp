#pragma once
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "coref/error.hpp"

namespace coref {

struct MentionSpan {
    int start = 0, end = 0; // token indices, inclusive
    int width() const { return end - start + 1; }
    bool operator==(const MentionSpan& o) const { return start == o.start && end == o.end; }
    bool operator<(const MentionSpan& o) const {
        return start != o.start ? start < o.start : end < o.end;
    }
};

using Cluster = std::vector<int>; // mention indices, kept sorted

struct ClusterSet {
    std::vector<Cluster> clusters;

    bool empty() const { return clusters.empty(); }

    // canonical form: members sorted within clusters, clusters sorted by first member
    void normalize() {
        for (auto& c : clusters) std::sort(c.begin(), c.end());
        std::sort(clusters.begin(), clusters.end());
    }
};

// antecedent[j] = index of j's antecedent, or -1 for the dummy (no link)
struct CorefLinkSet {
    std::vector<int> antecedent;

    int n() const { return int(antecedent.size()); }
    bool operator==(const CorefLinkSet& o) const { return antecedent == o.antecedent; }
};

struct Document {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<MentionSpan> mentions;   // sorted by (start, end), unique
    ClusterSet gold_clusters;            // over mention indices; may be empty
};

struct CorpusSplit {
    std::vector<std::string> train, dev, test; // document ids
};

inline void validate_document(const Document& doc) {
    int n = int(doc.tokens.size());
    for (const auto& m : doc.mentions) {
        if (m.start > m.end)
            throw data_error("span start exceeds end in " + doc.id);
        if (m.start < 0 || m.end >= n)
            throw data_error("span out of range in " + doc.id);
    }
    for (size_t i = 1; i < doc.mentions.size(); ++i) {
        if (doc.mentions[i] == doc.mentions[i - 1])
            throw data_error("duplicate mention span in " + doc.id);
        if (doc.mentions[i] < doc.mentions[i - 1])
            throw data_error("mentions not sorted in " + doc.id);
    }
    std::set<int> seen;
    for (const auto& c : doc.gold_clusters.clusters) {
        if (c.empty()) throw data_error("empty cluster in " + doc.id);
        for (int mi : c) {
            if (mi < 0 || mi >= int(doc.mentions.size()))
                throw data_error("cluster references invalid mention index in " + doc.id);
            if (!seen.insert(mi).second)
                throw data_error("clusters not disjoint in " + doc.id);
        }
    }
}

} // namespace coref
