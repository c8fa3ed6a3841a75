#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "soen/source_function.hpp"
#include "test_helpers.hpp"

using namespace soen;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("subthreshold flux produces no flux quanta") {
    const auto sf = testing::synthetic_dendrite_table();
    CHECK(evaluate_source(sf, 1.7, 0.0, 0.0) == 0.0);
    CHECK(evaluate_source(sf, 1.7, 0.1, 0.3) == 0.0);
}

TEST_CASE("interpolation reproduces table nodes exactly") {
    const auto sf = testing::synthetic_dendrite_table({1.6, 1.7, 1.8});
    for (std::size_t b = 0; b < sf.n_bias(); ++b)
        for (std::size_t p = 0; p < sf.n_phi(); ++p)
            for (std::size_t q = 0; q < sf.n_s(); ++q)
                CHECK(evaluate_source(sf, sf.bias_grid[b], sf.phi_grid[p], sf.s_grid[q]) ==
                      sf.at(b, p, q));
}

TEST_CASE("phi midway between nodes gives the mean of bracketing entries") {
    const auto sf = testing::synthetic_dendrite_table();
    const double phi_mid = 0.5 * (sf.phi_grid[6] + sf.phi_grid[7]);
    const double expected = 0.5 * (sf.at(0, 6, 2) + sf.at(0, 7, 2));
    CHECK(evaluate_source(sf, 1.7, phi_mid, sf.s_grid[2]) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("symmetry fold: g(-phi) == g(+phi)") {
    const auto sf = testing::synthetic_dendrite_table();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const double phi = testing::uniform(rng, 0.0, 0.6);
        const double s = testing::uniform(rng, -0.2, 1.2);
        CHECK(evaluate_source(sf, 1.7, phi, s) == evaluate_source(sf, 1.7, -phi, s));
    }
}

TEST_CASE("flux beyond 0.5 clamps and counts") {
    const auto sf = testing::synthetic_dendrite_table();
    ClampStats stats;
    const double at_half = evaluate_source(sf, 1.7, 0.5, 0.2, &stats);
    CHECK(stats.flux_clamped == 0);
    CHECK(evaluate_source(sf, 1.7, 0.8, 0.2, &stats) == at_half);
    CHECK(evaluate_source(sf, 1.7, -3.0, 0.2, &stats) == at_half);
    CHECK(stats.flux_clamped == 2);
}

TEST_CASE("s outside hull clamps") {
    const auto sf = testing::synthetic_dendrite_table();
    CHECK(evaluate_source(sf, 1.7, 0.4, -0.5) == evaluate_source(sf, 1.7, 0.4, 0.0));
    CHECK(evaluate_source(sf, 1.7, 0.4, 5.0) == evaluate_source(sf, 1.7, 0.4, 1.0));
}

TEST_CASE("bias outside hull is refused") {
    const auto sf = testing::synthetic_dendrite_table({1.6, 1.8});
    CHECK_THROWS_AS(evaluate_source(sf, 1.5, 0.3, 0.1), BiasOutOfRange);
    CHECK_THROWS_AS(evaluate_source(sf, 1.9, 0.3, 0.1), BiasOutOfRange);
    CHECK_NOTHROW(evaluate_source(sf, 1.7, 0.3, 0.1));
}

TEST_CASE("interpolated g is Lipschitz-continuous in phi") {
    const auto sf = testing::synthetic_dendrite_table();
    double max_slope = 0.0;
    for (std::size_t p = 0; p + 1 < sf.n_phi(); ++p)
        for (std::size_t q = 0; q < sf.n_s(); ++q)
            max_slope = std::max(max_slope, std::abs(sf.at(0, p + 1, q) - sf.at(0, p, q)) /
                                                (sf.phi_grid[p + 1] - sf.phi_grid[p]));
    std::mt19937_64 rng(11);
    const double delta = 1e-4;
    for (int i = 0; i < 500; ++i) {
        const double phi = testing::uniform(rng, 0.0, 0.5 - delta);
        const double s = testing::uniform(rng, 0.0, 1.0);
        const double dg =
            std::abs(evaluate_source(sf, 1.7, phi + delta, s) - evaluate_source(sf, 1.7, phi, s));
        CHECK(dg <= max_slope * delta * (1.0 + 1e-9));
    }
}

TEST_CASE("validation rejects bad tables") {
    auto sf = testing::synthetic_dendrite_table();
    SUBCASE("negative rate") {
        sf.values[5] = -1e-3;
        CHECK_THROWS_AS(sf.validate(), InvariantViolation);
    }
    SUBCASE("non-finite rate") {
        sf.values[5] = std::nan("");
        CHECK_THROWS_AS(sf.validate(), InvariantViolation);
    }
    SUBCASE("non-monotone in phi") {
        sf.at(0, 8, 0) = sf.at(0, 7, 0) - 0.05;
        CHECK_THROWS_AS(sf.validate(), InvariantViolation);
    }
    SUBCASE("dendrite kind non-monotone in s") {
        sf.at(0, 8, 5) = sf.at(0, 8, 4) + 0.01;
        CHECK_THROWS_AS(sf.validate(), InvariantViolation);
    }
    SUBCASE("neuron kind allows non-monotone s") {
        sf.kind = SourceKind::Neuron;
        sf.at(0, 8, 5) = sf.at(0, 8, 4) + 0.01;
        CHECK_NOTHROW(sf.validate());
    }
    SUBCASE("phi grid must span [0, 0.5]") {
        sf.phi_grid.pop_back();
        for (std::size_t b = 0; b < sf.n_bias(); ++b) sf.values.resize(sf.values.size() - sf.n_s());
        CHECK_THROWS_AS(sf.validate(), InvariantViolation);
    }
}

TEST_CASE("save/load round trip is bit-identical") {
    const auto path1 = temp_file("soen_sf_rt1.sf");
    const auto path2 = temp_file("soen_sf_rt2.sf");
    auto sf = testing::synthetic_dendrite_table({1.6, 1.7, 1.8});
    // Perturb with full-precision values so %.17g formatting is exercised.
    std::mt19937_64 rng(3);
    for (auto& v : sf.values) v *= 1.0 + 1e-13 * testing::uniform(rng, 0.0, 1.0);
    save_source_function(sf, path1.string());
    const auto loaded = load_source_function(path1.string());
    CHECK(loaded.kind == sf.kind);
    CHECK(loaded.bias_grid == sf.bias_grid);
    CHECK(loaded.phi_grid == sf.phi_grid);
    CHECK(loaded.s_grid == sf.s_grid);
    CHECK(loaded.values == sf.values);
    save_source_function(loaded, path2.string());
    CHECK(slurp(path1) == slurp(path2));
}

TEST_CASE("file header declares the bias plane count") {
    const auto path = temp_file("soen_sf_hdr.sf");
    save_source_function(testing::synthetic_dendrite_table({1.6, 1.7, 1.8}), path.string());
    std::ifstream in(path);
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "soen-sf v1 dendrite");
    CHECK(l2.substr(0, 7) == "bias 3 ");
}

TEST_CASE("loader rejects malformed files") {
    const auto path = temp_file("soen_sf_bad.sf");
    auto write = [&](const std::string& body) {
        std::ofstream out(path);
        out << body;
    };
    SUBCASE("duplicate phi grid value") {
        write("soen-sf v1 dendrite\nbias 1 1.7\nphi 2 0 0\ns 2 0 1\n0 0\n0 0\n");
        CHECK_THROWS_AS(load_source_function(path.string()), ParseError);
    }
    SUBCASE("negative rate entry") {
        write("soen-sf v1 dendrite\nbias 1 1.7\nphi 2 0 0.5\ns 2 0 1\n0 0\n-1 0\n");
        CHECK_THROWS_AS(load_source_function(path.string()), InvariantViolation);
    }
    SUBCASE("missing data row") {
        write("soen-sf v1 dendrite\nbias 1 1.7\nphi 2 0 0.5\ns 2 0 1\n0 0\n");
        CHECK_THROWS_AS(load_source_function(path.string()), ParseError);
    }
    SUBCASE("bad magic") {
        write("soen-xx v1 dendrite\nbias 1 1.7\nphi 2 0 0.5\ns 2 0 1\n0 0\n0 0\n");
        CHECK_THROWS_AS(load_source_function(path.string()), ParseError);
    }
    SUBCASE("empty grid table is rejected before write") {
        SourceFunction sf;
        sf.kind = SourceKind::Dendrite;
        CHECK_THROWS_AS(save_source_function(sf, path.string()), InvariantViolation);
    }
    SUBCASE("comments and blank lines are skipped") {
        write("# comment\nsoen-sf v1 neuron\n\nbias 1 1.7 # inline\nphi 2 0 0.5\ns 2 0 1\n0 0\n0.5 1\n");
        const auto sf = load_source_function(path.string());
        CHECK(sf.kind == SourceKind::Neuron);
        CHECK(sf.at(0, 1, 1) == 1.0);
    }
}

TEST_CASE("CompiledSource matches evaluate_source") {
    const auto sf = testing::synthetic_dendrite_table({1.6, 1.7, 1.8});
    const double bias = 1.67;
    CompiledSource cs(sf, bias);
    ClampStats stats;
    std::mt19937_64 rng(23);
    for (int i = 0; i < 500; ++i) {
        const double phi = testing::uniform(rng, -0.7, 0.7);
        const double s = testing::uniform(rng, -0.2, 1.3);
        CHECK(cs(phi, s, stats) ==
              doctest::Approx(evaluate_source(sf, bias, phi, s)).epsilon(1e-13));
    }
}
