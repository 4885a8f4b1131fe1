#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "coref/gradcheck.hpp"
#include "coref/matrix.hpp"
#include "coref/param.hpp"
#include "coref/rng.hpp"

using namespace coref;

namespace {

Matrix random_matrix(Rng& rng, size_t r, size_t c, double lo = -2.0, double hi = 2.0) {
    Matrix m(r, c);
    for (double& v : m.a) v = rng.uniform(lo, hi);
    return m;
}

// independently coded triple loop
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i)
        for (size_t j = 0; j < b.cols; ++j) {
            double s = 0;
            for (size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
            c.at(i, j) = s;
        }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows == b.rows);
    REQUIRE(a.cols == b.cols);
    double mx = 0;
    for (size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::fabs(a.a[i] - b.a[i]));
    return mx;
}

} // namespace

TEST_CASE("rng streams are reproducible and distinct by seed") {
    Rng a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 10000; ++i) {
        uint64_t x = a.next_u64(), y = b.next_u64();
        if (x != y) all_equal = false;
        if (x != c.next_u64()) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("rng uniform stays in [0,1) and index in range") {
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        uint64_t k = rng.index(7);
        CHECK(k < 7);
    }
}

TEST_CASE("rng shuffle is a permutation and seed-stable") {
    Rng a(5), b(5);
    std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, v2 = v1;
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::set<int> seen(v1.begin(), v1.end());
    CHECK(seen.size() == 10);
}

TEST_CASE("matmul matches hand-computed 2x2") {
    Matrix a(2, 2), b(2, 2);
    a.a = {1, 2, 3, 4};
    b.a = {5, 6, 7, 8};
    Matrix c = matmul(a, b);
    CHECK(c.a == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("matmul variants match the naive oracle on random shapes") {
    Rng rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        size_t m = 1 + rng.index(6), k = 1 + rng.index(6), n = 1 + rng.index(6);
        Matrix a = random_matrix(rng, m, k);
        Matrix b = random_matrix(rng, k, n);
        CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) <= 1e-12);
        Matrix bt = transpose(b);
        CHECK(max_abs_diff(matmul_nt(a, bt), naive_matmul(a, b)) <= 1e-12);
        Matrix at = transpose(a);
        CHECK(max_abs_diff(matmul_tn(at, b), naive_matmul(a, b)) <= 1e-12);
    }
}

TEST_CASE("matmul rejects mismatched shapes") {
    Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), error);
    CHECK_THROWS_AS(matmul_tn(a, Matrix(3, 2)), error);
    CHECK_THROWS_AS(matmul_nt(a, Matrix(3, 2)), error);
}

TEST_CASE("matmul is associative within 1e-9 relative error") {
    Rng rng(31);
    for (int iter = 0; iter < 20; ++iter) {
        size_t m = 1 + rng.index(5), k = 1 + rng.index(5);
        size_t p = 1 + rng.index(5), n = 1 + rng.index(5);
        Matrix a = random_matrix(rng, m, k), b = random_matrix(rng, k, p),
               c = random_matrix(rng, p, n);
        Matrix left = matmul(matmul(a, b), c);
        Matrix right = matmul(a, matmul(b, c));
        for (size_t i = 0; i < left.size(); ++i) {
            double denom = std::max(1.0, std::fabs(left.a[i]));
            CHECK(std::fabs(left.a[i] - right.a[i]) / denom <= 1e-9);
        }
    }
}

TEST_CASE("softmax matches the direct computation and its invariants") {
    Rng rng(42);
    for (int iter = 0; iter < 200; ++iter) {
        size_t n = 1 + rng.index(8);
        Vector x(n);
        for (double& v : x) v = rng.uniform(-5, 5);
        Vector got = softmax_row(x);

        // direct oracle without max subtraction (safe at this range)
        double z = 0;
        for (double v : x) z += std::exp(v);
        double sum = 0;
        for (size_t i = 0; i < n; ++i) {
            CHECK(std::fabs(got[i] - std::exp(x[i]) / z) <= 1e-12);
            sum += got[i];
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-12);

        Vector shifted = x;
        for (double& v : shifted) v += 123.5;
        Vector got2 = softmax_row(shifted);
        for (size_t i = 0; i < n; ++i) CHECK(std::fabs(got[i] - got2[i]) <= 1e-12);
    }
}

TEST_CASE("softmax survives large magnitudes") {
    Vector x{1000.0, 1000.0, -1000.0};
    Vector p = softmax_row(x);
    CHECK(std::isfinite(p[0]));
    CHECK(std::fabs(p[0] - 0.5) <= 1e-12);
    CHECK(p[2] <= 1e-12);
    CHECK_THROWS_AS(softmax_row(Vector{}), error);
}

TEST_CASE("relu and its subgradient") {
    Vector out = relu(Vector{-1, 0, 2});
    CHECK(out == Vector{0, 0, 2});
    CHECK(relu_grad(Vector{-1, 0, 2}) == Vector{0, 0, 1});

    // finite differences away from the kink
    for (double x : {-2.0, -0.5, 0.3, 1.7}) {
        double h = 1e-6;
        double num = (relu(Vector{x + h})[0] - relu(Vector{x - h})[0]) / (2 * h);
        CHECK(std::fabs(num - relu_grad(Vector{x})[0]) <= 1e-6);
    }
}

TEST_CASE("glorot init respects bounds and the seed") {
    ParamTensor p("p", 8, 4), q("q", 8, 4);
    Rng r1(3), r2(3);
    glorot_init(p, r1);
    glorot_init(q, r2);
    CHECK(p.value.a == q.value.a);
    double bound = std::sqrt(6.0 / 12.0);
    for (double v : p.value.a) CHECK(std::fabs(v) <= bound);

    ParamTensor g("g", 8, 4);
    Rng r3(3);
    glorot_init(g, r3, 3.0);
    for (size_t i = 0; i < g.value.size(); ++i)
        CHECK(std::fabs(g.value.a[i] - 3.0 * p.value.a[i]) <= 1e-15);
}

TEST_CASE("adamw leaves params alone with zero grads and zero decay") {
    ParamTensor p("p", 2, 2);
    p.value.a = {1, -2, 3, -4};
    auto before = p.value.a;
    AdamwConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step({&p}, 0.1, cfg, 1);
    CHECK(p.value.a == before);
}

TEST_CASE("adamw moves against the gradient") {
    ParamTensor p("p", 1, 1);
    p.value.a[0] = 1.0;
    p.grad.a[0] = 1.0;
    AdamwConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step({&p}, 0.1, cfg, 1);
    CHECK(p.value.a[0] < 1.0);
    CHECK(p.grad.a[0] == 0.0); // grads cleared by the step
}

TEST_CASE("adamw minimizes (w-3)^2 within 100 steps") {
    ParamTensor p("w", 1, 1);
    AdamwConfig cfg;
    cfg.weight_decay = 0.0;
    for (int step = 1; step <= 100; ++step) {
        p.grad.a[0] = 2.0 * (p.value.a[0] - 3.0);
        adamw_step({&p}, 0.3, cfg, step);
    }
    CHECK(std::fabs(p.value.a[0] - 3.0) <= 1e-2);
}

TEST_CASE("adamw rejects non-finite gradients and bad step index") {
    ParamTensor p("p", 1, 1);
    p.grad.a[0] = std::nan("");
    AdamwConfig cfg;
    CHECK_THROWS_WITH_AS(adamw_step({&p}, 0.1, cfg, 1),
                         doctest::Contains("p"), error);
    p.grad.a[0] = 0.0;
    CHECK_THROWS_AS(adamw_step({&p}, 0.1, cfg, 0), error);
}

TEST_CASE("finite_diff_check on a constant and on w^2") {
    ParamTensor p("w", 1, 1);
    p.value.a[0] = 2.0;

    p.grad.a[0] = 0.0;
    auto report = finite_diff_check([] { return 5.0; }, {&p}, 1e-6, 1e-8);
    CHECK(report.pass);
    CHECK(report.max_rel == 0.0);

    p.grad.a[0] = 4.0; // d/dw w^2 at w=2
    report = finite_diff_check([&p] { return p.value.a[0] * p.value.a[0]; }, {&p},
                               1e-5, 1e-8);
    CHECK(report.pass);
    CHECK(report.max_rel <= 1e-8);

    CHECK_THROWS_AS(finite_diff_check([] { return 0.0; }, {&p}, 1e-2, 1e-8), error);
}

TEST_CASE("all_finite flags bad values") {
    Matrix m(2, 2);
    CHECK(all_finite(m));
    m.a[3] = std::numeric_limits<double>::infinity();
    CHECK(!all_finite(m));
}
