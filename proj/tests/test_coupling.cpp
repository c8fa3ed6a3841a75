#include <doctest.h>

#include <random>

#include "soen/coupling.hpp"
#include "test_helpers.hpp"

using namespace soen;

TEST_CASE("duplicate entries are an error, not summed") {
    CHECK_THROWS_AS(CouplingMatrix(3, {{0, 1, 0.5}, {0, 1, 0.25}}), InvariantViolation);
}

TEST_CASE("out-of-range and non-finite entries are rejected") {
    CHECK_THROWS_AS(CouplingMatrix(2, {{0, 2, 0.5}}), InvariantViolation);
    CHECK_THROWS_AS(CouplingMatrix(2, {{-1, 0, 0.5}}), InvariantViolation);
    CHECK_THROWS_AS(CouplingMatrix(2, {{0, 1, std::nan("")}}), InvariantViolation);
}

TEST_CASE("row_dot matches a dense mat-vec oracle") {
    std::mt19937_64 rng(5);
    const int n = 17;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    std::vector<CouplingMatrix::Entry> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (testing::uniform(rng, 0.0, 1.0) < 0.3) {
                const double w = testing::uniform(rng, -1.0, 1.0);
                dense[i][j] = w;
                entries.push_back({i, j, w});
            }
    const CouplingMatrix J(n, entries);
    std::vector<double> s(n);
    for (auto& v : s) v = testing::uniform(rng, -1.0, 1.0);

    for (int i = 0; i < n; ++i) {
        double expect = 0.0;
        for (int j = 0; j < n; ++j) expect += dense[i][j] * s[j];
        CHECK(J.row_dot(i, s) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("empty matrix gives zero flux") {
    const CouplingMatrix J(4, {});
    CHECK(J.nnz() == 0);
    std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i < 4; ++i) CHECK(J.row_dot(i, s) == 0.0);
}
