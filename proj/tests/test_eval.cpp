#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "coref/docio.hpp"
#include "coref/eval.hpp"

using namespace coref;

namespace {

// random partial partition: mention -> cluster id, some mentions left out
ClusterSet random_partition(Rng& rng, int n, bool allow_absent) {
    std::map<int, Cluster> groups;
    for (int i = 0; i < n; ++i) {
        if (allow_absent && rng.index(10) < 3) continue;
        groups[int(rng.index(4))].push_back(i);
    }
    ClusterSet cs;
    for (auto& [k, members] : groups) cs.clusters.push_back(members);
    cs.normalize();
    return cs;
}

// membership map; absent mentions get fresh negative ids
std::vector<int> block_ids(const ClusterSet& cs, int n) {
    std::vector<int> ids(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ids[size_t(i)] = -(i + 1);
    for (size_t c = 0; c < cs.clusters.size(); ++c)
        for (int idx : cs.clusters[c]) ids[size_t(idx)] = int(c);
    return ids;
}

// textbook MUC half, written against the formula rather than the code
double muc_half_oracle(const ClusterSet& from, const ClusterSet& by, int n,
                       double& num, double& den) {
    std::vector<int> ids = block_ids(by, n);
    for (const auto& c : from.clusters) {
        std::map<int, int> parts;
        for (int idx : c) ++parts[ids[size_t(idx)]];
        num += double(c.size()) - double(parts.size());
        den += double(c.size()) - 1.0;
    }
    return den > 0 ? num / den : 0.0;
}

} // namespace

TEST_CASE("f1_of follows the harmonic mean with a zero guard") {
    CHECK(f1_of(1.0, 1.0) == 1.0);
    CHECK(f1_of(0.0, 0.0) == 0.0);
    CHECK(f1_of(1.0, 0.0) == 0.0);
    CHECK(f1_of(0.5, 0.5) == doctest::Approx(0.5));
    CHECK(f1_of(0.2, 0.8) == doctest::Approx(0.32));
}

TEST_CASE("cluster_pairs emits canonical sorted pairs") {
    ClusterSet cs;
    cs.clusters = {{2, 0, 1}, {4, 3}};
    auto pairs = cluster_pairs(cs);
    std::vector<std::pair<int, int>> want = {{0, 1}, {0, 2}, {1, 2}, {3, 4}};
    CHECK(pairs == want);
    ClusterSet empty;
    CHECK(cluster_pairs(empty).empty());
}

TEST_CASE("a perfect prediction scores one on both metrics") {
    ClusterSet gold;
    gold.clusters = {{0, 1, 4}, {2, 3}};
    PRF link = link_prf(gold, gold);
    PRF muc = muc_prf(gold, gold);
    CHECK(link.precision == 1.0);
    CHECK(link.recall == 1.0);
    CHECK(link.f1 == 1.0);
    CHECK(muc.precision == 1.0);
    CHECK(muc.recall == 1.0);
    CHECK(muc.f1 == 1.0);
}

TEST_CASE("empty and degenerate predictions follow the stated conventions") {
    ClusterSet gold;
    gold.clusters = {{0, 1}};
    ClusterSet none;
    PRF link = link_prf(none, gold);
    CHECK(link.precision == 1.0); // no predicted pairs
    CHECK(link.recall == 0.0);
    CHECK(link.f1 == 0.0);

    // swapped roles
    PRF rev = link_prf(gold, none);
    CHECK(rev.precision == 0.0);
    CHECK(rev.recall == 1.0);
    CHECK(rev.f1 == 0.0);

    // singleton-only gold has no links to recover
    ClusterSet singles;
    singles.clusters = {{0}, {1}, {2}};
    PRF ls = link_prf(gold, singles);
    CHECK(ls.recall == 1.0);
    CHECK(ls.precision == 0.0);
    PRF ms = muc_prf(gold, singles);
    CHECK(ms.recall == 0.0); // zero denominator
    CHECK(ms.f1 == 0.0);

    PRF mboth = muc_prf(none, none);
    CHECK(mboth.precision == 0.0);
    CHECK(mboth.recall == 0.0);
    CHECK(mboth.f1 == 0.0);
}

TEST_CASE("link scores match a quadratic pair oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + int(rng.index(12));
        ClusterSet pred = random_partition(rng, n, true);
        ClusterSet gold = random_partition(rng, n, true);
        std::vector<int> pid = block_ids(pred, n), gid = block_ids(gold, n);

        double tp = 0, fp = 0, fn = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                bool in_pred = pid[size_t(i)] >= 0 && pid[size_t(i)] == pid[size_t(j)];
                bool in_gold = gid[size_t(i)] >= 0 && gid[size_t(i)] == gid[size_t(j)];
                if (in_pred && in_gold) ++tp;
                if (in_pred && !in_gold) ++fp;
                if (!in_pred && in_gold) ++fn;
            }
        LinkCounts c = link_counts(pred, gold);
        CHECK(c.tp == tp);
        CHECK(c.fp == fp);
        CHECK(c.fn == fn);

        PRF got = link_prf(pred, gold);
        double p = (tp + fp) > 0 ? tp / (tp + fp) : 1.0;
        double r = (tp + fn) > 0 ? tp / (tp + fn) : 1.0;
        CHECK(got.precision == doctest::Approx(p).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(r).epsilon(1e-12));
        CHECK(got.f1 == doctest::Approx(f1_of(p, r)).epsilon(1e-12));
    }
}

TEST_CASE("muc matches an independent transcription of the formula") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + int(rng.index(12));
        ClusterSet pred = random_partition(rng, n, true);
        ClusterSet gold = random_partition(rng, n, true);

        double rn = 0, rd = 0, pn = 0, pd = 0;
        double want_r = muc_half_oracle(gold, pred, n, rn, rd);
        double want_p = muc_half_oracle(pred, gold, n, pn, pd);

        PRF got = muc_prf(pred, gold);
        CHECK(got.recall == doctest::Approx(want_r).epsilon(1e-12));
        CHECK(got.precision == doctest::Approx(want_p).epsilon(1e-12));
        CHECK(got.f1 == doctest::Approx(f1_of(want_p, want_r)).epsilon(1e-12));
    }
}

TEST_CASE("swapping arguments swaps precision and recall") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + int(rng.index(10));
        ClusterSet a = random_partition(rng, n, true);
        ClusterSet b = random_partition(rng, n, true);
        PRF ab = link_prf(a, b), ba = link_prf(b, a);
        CHECK(ab.precision == ba.recall);
        CHECK(ab.recall == ba.precision);
        PRF mab = muc_prf(a, b), mba = muc_prf(b, a);
        CHECK(mab.precision == mba.recall);
        CHECK(mab.recall == mba.precision);
    }
}

TEST_CASE("all scores stay within the unit interval") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + int(rng.index(10));
        ClusterSet pred = random_partition(rng, n, true);
        ClusterSet gold = random_partition(rng, n, true);
        for (const PRF& s : {link_prf(pred, gold), muc_prf(pred, gold)}) {
            CHECK(s.precision >= 0.0);
            CHECK(s.precision <= 1.0);
            CHECK(s.recall >= 0.0);
            CHECK(s.recall <= 1.0);
            CHECK(s.f1 >= 0.0);
            CHECK(s.f1 <= 1.0);
        }
    }
}

TEST_CASE("the universe check rejects out of range indices") {
    ClusterSet pred;
    pred.clusters = {{0, 5}};
    ClusterSet gold;
    gold.clusters = {{0, 1}};
    CHECK_THROWS_AS(link_prf(pred, gold, 3), error);
    CHECK_THROWS_AS(muc_prf(pred, gold, 3), error);
    CHECK_NOTHROW(link_prf(pred, gold, 6));
    CHECK_NOTHROW(link_prf(pred, gold)); // default skips the check
}

TEST_CASE("evaluate aggregates over documents in both modes") {
    auto docs = generate_synthetic_corpus(10, 29, 20, 12);
    std::vector<const Document*> ptrs;
    for (const auto& d : docs) ptrs.push_back(&d);
    ModelDims dims;
    dims.d = 8, dims.d_att = 6, dims.d_aff = 6;
    ModelParams model = init_model(dims, build_vocab(ptrs), 29);

    EvalReport gold_rep = evaluate(docs, model, MentionMode::gold);
    CHECK(gold_rep.docs_scored == 10);
    CHECK_FALSE(gold_rep.has_mention_f1);
    CHECK(gold_rep.tokens_per_second > 0.0);
    for (double v : {gold_rep.link_precision, gold_rep.link_recall, gold_rep.link_f1,
                     gold_rep.muc_precision, gold_rep.muc_recall, gold_rep.muc_f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    EvalReport enum_rep = evaluate(docs, model, MentionMode::enumerate_spans);
    CHECK(enum_rep.docs_scored == 10);
    CHECK(enum_rep.has_mention_f1);
    CHECK(enum_rep.mention_f1 >= 0.0);
    CHECK(enum_rep.mention_f1 <= 1.0);

    // identical inputs produce byte-identical reports
    EvalReport again = evaluate(docs, model, MentionMode::gold);
    CHECK(render_report(gold_rep) == render_report(again));
}

TEST_CASE("render_report prints fixed six digit fields without timing") {
    EvalReport r;
    r.docs_scored = 3;
    r.link_precision = 0.5, r.link_recall = 1.0, r.link_f1 = 2.0 / 3.0;
    r.muc_precision = 0.25, r.muc_recall = 0.125, r.muc_f1 = 1.0 / 6.0;
    r.tokens_per_second = 12345.0; // must not appear
    std::string want =
        "docs_scored 3\n"
        "link_precision 0.500000\n"
        "link_recall 1.000000\n"
        "link_f1 0.666667\n"
        "muc_precision 0.250000\n"
        "muc_recall 0.125000\n"
        "muc_f1 0.166667\n";
    CHECK(render_report(r) == want);
    CHECK(render_report(r).find("12345") == std::string::npos);

    r.has_mention_f1 = true;
    r.mention_f1 = 0.75;
    CHECK(render_report(r) == want + "mention_f1 0.750000\n");
}

TEST_CASE("ablations run the base first and honor the variant list") {
    auto docs = generate_synthetic_corpus(30, 31, 20, 12);
    CorpusSplit split = split_corpus(docs, 31);
    ModelDims dims;
    dims.d = 6, dims.d_att = 6, dims.d_aff = 6;
    TrainConfig cfg;
    cfg.epochs = 2, cfg.batch_size = 8, cfg.seed = 31;

    std::ostringstream sink;
    auto none = run_ablations(dims, cfg, docs, split, {}, "tiny");
    REQUIRE(none.size() == 1);
    CHECK(none[0].method == "base");
    CHECK(none[0].dataset == "tiny");
    CHECK(none[0].ok);
    CHECK(none[0].epochs == 2);

    std::vector<AblationVariant> variants = {
        AblationVariant::attention_off, AblationVariant::frozen_embeddings,
        AblationVariant::depth_1, AblationVariant::fixed_lr};
    auto rows = run_ablations(dims, cfg, docs, split, variants, "tiny");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].method == "base");
    CHECK(rows[1].method == "attention-off");
    CHECK(rows[2].method == "frozen-embeddings");
    CHECK(rows[3].method == "depth-1");
    CHECK(rows[4].method == "fixed-lr");
    for (const auto& r : rows) {
        CHECK(r.ok);
        CHECK(r.report.docs_scored == int(split.test.size()));
    }
    CHECK(rows[4].learning_rate == 1e-5);

    std::string table = render_ablation_table(rows);
    CHECK(table.find("Method") == 0);
    CHECK(table.find("attention-off") != std::string::npos);

    // a second identical run renders the same bytes
    auto rows2 = run_ablations(dims, cfg, docs, split, variants, "tiny");
    CHECK(render_ablation_table(rows2) == table);
    CHECK(ablation_records(rows2) == ablation_records(rows));
}

TEST_CASE("benchmark repeats deterministically") {
    auto docs = generate_synthetic_corpus(5, 37, 20, 12);
    std::vector<const Document*> ptrs;
    for (const auto& d : docs) ptrs.push_back(&d);
    ModelDims dims;
    dims.d = 6, dims.d_att = 4, dims.d_aff = 4;
    ModelParams model = init_model(dims, build_vocab(ptrs), 37);

    BenchResult res = benchmark(model, docs, 3);
    REQUIRE(res.tokens_per_second.size() == 3);
    CHECK(res.outputs_identical);
    CHECK(res.min_tps > 0.0);
    CHECK(res.min_tps <= res.median_tps);
    CHECK(res.median_tps <= res.max_tps);
    CHECK_THROWS_AS(benchmark(model, docs, 2), error);
}
