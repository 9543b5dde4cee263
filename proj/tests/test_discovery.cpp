#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "timr/discovery.hpp"

using namespace timr;
using discover::DiagonalHit;
using discover::PatternGroup;
using discover::SectionOccurrence;

using timr::testing::oracle_score_diagonal;
using timr::testing::oracle_trace_diagonals;

namespace {

Matrix random_symmetric(Rng& rng, std::size_t t, double lo, double hi) {
    Matrix x(t, t);
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = a; b < t; ++b) {
            const double v = rng.uniform(lo, hi);
            x(a, b) = v;
            x(b, a) = v;
        }
    return x;
}

void plant_diagonal(Matrix& x, std::size_t i, std::size_t j, std::size_t len, Rng& rng, double lo = 0.9,
                    double hi = 1.0) {
    for (std::size_t k = 0; k < len; ++k) {
        const double v = rng.uniform(lo, hi);
        x(i + k, j + k) = v;
        x(j + k, i + k) = v;
    }
}

} // namespace

TEST_CASE("build_ssm properties") {
    SECTION("symmetric, in range, zero-one bounds") {
        Rng rng(3);
        Matrix traj(40, 8);
        for (double& v : traj.data()) v = rng.uniform(-1, 1);
        const auto ssm = discover::build_ssm(traj);
        REQUIRE(ssm.x.rows() == 40);
        for (std::size_t a = 0; a < 40; ++a)
            for (std::size_t b = 0; b < 40; ++b) {
                CHECK(std::abs(ssm.x(a, b) - ssm.x(b, a)) < 1e-9);
                CHECK(ssm.x(a, b) >= 0.0);
                CHECK(ssm.x(a, b) <= 1.0);
            }
        CHECK_FALSE(ssm.degenerate);
    }
    SECTION("identical mappings are degenerate") {
        Matrix traj(10, 4, 0.5);
        const auto ssm = discover::build_ssm(traj);
        CHECK(ssm.degenerate);
        for (double v : ssm.x.data()) CHECK(v == 0.0);
    }
    SECTION("repeated subsequence lights a diagonal") {
        Rng rng(5);
        Matrix traj(90, 6);
        for (double& v : traj.data()) v = rng.uniform(-1, 1);
        for (std::size_t k = 0; k < 20; ++k)
            for (std::size_t c = 0; c < 6; ++c) traj(50 + k, c) = traj(k, c);
        const auto ssm = discover::build_ssm(traj);
        double on_diag = 0, off_diag = 0;
        for (std::size_t k = 2; k < 18; ++k) on_diag += ssm.x(k, 50 + k);
        for (std::size_t k = 2; k < 18; ++k) off_diag += ssm.x(k, 30 + k);
        CHECK(on_diag / 16.0 > off_diag / 16.0 + 0.3);
    }
    SECTION("too short") {
        CHECK_THROWS_AS(discover::build_ssm(Matrix(1, 4, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("score_diagonal literal arithmetic") {
    Matrix ones(30, 30, 1.0);
    SECTION("all-ones matrix, N=1: weights 1 and 2 over m=1") {
        CHECK(discover::score_diagonal(ones, 0, 5, 1) == Catch::Approx(3.0));
    }
    SECTION("zero tail scores zero") {
        Matrix x(30, 30, 0.0);
        CHECK(discover::score_diagonal(x, 2, 9, 7) == 0.0);
    }
    SECTION("weights increase along the window") {
        // a single bright cell scores more when it sits later in the window
        Matrix x(30, 30, 0.0);
        x(4, 14) = 1.0; // k = 2 for start (2,12)
        const double early = discover::score_diagonal(x, 2, 12, 4);
        Matrix y(30, 30, 0.0);
        y(6, 16) = 1.0; // k = 4 for the same start
        const double late = discover::score_diagonal(y, 2, 12, 4);
        CHECK(late > early);
    }
    SECTION("matches the oracle formula on random data") {
        Rng rng(7);
        const Matrix x = random_symmetric(rng, 40, 0, 1);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, 10));
            const std::size_t j = static_cast<std::size_t>(rng.uniform_int(11, 20));
            const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 18));
            CHECK(discover::score_diagonal(x, i, j, n) == Catch::Approx(oracle_score_diagonal(x, i, j, n)).margin(1e-13));
        }
    }
    SECTION("bounds checked") {
        CHECK_THROWS_AS(discover::score_diagonal(ones, 25, 28, 3), std::invalid_argument);
        CHECK_THROWS_AS(discover::score_diagonal(ones, 0, 0, 0), std::invalid_argument);
    }
}

TEST_CASE("trace_diagonals") {
    SECTION("all zeros yields no hits") {
        CHECK(discover::trace_diagonals(Matrix(50, 50, 0.0), 0.5).empty());
    }
    SECTION("planted diagonal is recovered") {
        Rng rng(11);
        Matrix x = random_symmetric(rng, 120, 0.0, 0.25);
        plant_diagonal(x, 20, 60, 40, rng);
        const auto hits = discover::trace_diagonals(x, 0.5);
        std::vector<DiagonalHit> long_hits;
        for (const auto& h : hits)
            if (h.n >= 10) long_hits.push_back(h);
        REQUIRE(long_hits.size() == 1);
        CHECK(std::abs(static_cast<long>(long_hits[0].i) - 20) <= 2);
        CHECK(std::abs(static_cast<long>(long_hits[0].j) - 60) <= 2);
        CHECK(std::abs(static_cast<long>(long_hits[0].n) - 40) <= 2);
    }
    SECTION("two parallel diagonals at different offsets give one hit each") {
        Rng rng(13);
        Matrix x = random_symmetric(rng, 150, 0.0, 0.25);
        plant_diagonal(x, 10, 50, 30, rng);  // offset 40
        plant_diagonal(x, 70, 125, 20, rng); // offset 55
        const auto hits = discover::trace_diagonals(x, 0.5);
        std::vector<DiagonalHit> long_hits;
        for (const auto& h : hits)
            if (h.n >= 10) long_hits.push_back(h);
        REQUIRE(long_hits.size() == 2);
        CHECK(long_hits[0].j - long_hits[0].i != long_hits[1].j - long_hits[1].i);
    }
    SECTION("upper triangle only") {
        Rng rng(17);
        Matrix x = random_symmetric(rng, 60, 0.0, 1.0);
        for (const auto& h : discover::trace_diagonals(x, 0.8)) CHECK(h.i < h.j);
    }
    SECTION("equals the brute-force oracle on random matrices", "[property]") {
        Rng rng(19);
        for (int trial = 0; trial < 6; ++trial) {
            Matrix x = random_symmetric(rng, 50, 0.0, 0.45);
            if (trial % 2) plant_diagonal(x, 5 + static_cast<std::size_t>(trial), 25, 15, rng);
            const double gamma = 0.35 + 0.1 * (trial % 3);
            const auto lib = discover::trace_diagonals(x, gamma);
            const auto orc = oracle_trace_diagonals(x, gamma);
            REQUIRE(lib.size() == orc.size());
            for (std::size_t h = 0; h < lib.size(); ++h) {
                CHECK(lib[h].i == orc[h].i);
                CHECK(lib[h].j == orc[h].j);
                CHECK(lib[h].n == orc[h].n);
                CHECK(lib[h].score == Catch::Approx(orc[h].score).margin(1e-12));
            }
        }
    }
}

TEST_CASE("extract_groups") {
    SECTION("no hits, no groups") {
        CHECK(discover::extract_groups({}, 32, 8).empty());
    }
    SECTION("one long hit gives one group with two occurrences") {
        const std::vector<DiagonalHit> hits{{0, 100, 40, 1.0}};
        const auto groups = discover::extract_groups(hits, 32, 8);
        REQUIRE(groups.size() == 1);
        REQUIRE(groups[0].occurrences.size() == 2);
        CHECK(groups[0].occurrences[0] == SectionOccurrence{0, 40});
        CHECK(groups[0].occurrences[1] == SectionOccurrence{100, 140});
    }
    SECTION("short hits are discarded, boundary inclusive") {
        const std::vector<DiagonalHit> hits{{0, 100, 32, 1.0}}; // not > 32
        CHECK(discover::extract_groups(hits, 32, 8).empty());
    }
    SECTION("near-identical occurrences merge across hits") {
        // hit A: [0,40) and [100,140); hit B: [2,41) and [200,239)
        const std::vector<DiagonalHit> hits{{0, 100, 40, 1.0}, {2, 200, 39, 1.0}};
        const auto groups = discover::extract_groups(hits, 32, 8);
        REQUIRE(groups.size() == 1);
        REQUIRE(groups[0].occurrences.size() == 3);
        CHECK(groups[0].occurrences[0] == SectionOccurrence{0, 40});
        CHECK(groups[0].occurrences[1] == SectionOccurrence{100, 140});
        CHECK(groups[0].occurrences[2] == SectionOccurrence{200, 239});
    }
    SECTION("far-apart hits stay separate groups") {
        const std::vector<DiagonalHit> hits{{0, 100, 40, 1.0}, {300, 400, 40, 1.0}};
        const auto groups = discover::extract_groups(hits, 32, 8);
        REQUIRE(groups.size() == 2);
        CHECK(groups[0].occurrences.front().start == 0);
        CHECK(groups[1].occurrences.front().start == 300);
    }
}

TEST_CASE("evaluate_sections") {
    const PatternGroup g1{{{0, 40}, {100, 140}}};
    const PatternGroup g2{{{200, 260}, {300, 360}, {400, 460}}};

    SECTION("found == truth") {
        const auto s = discover::evaluate_sections({g1, g2}, {g1, g2});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
        CHECK(s.f1 == 1.0);
    }
    SECTION("nothing found") {
        const auto s = discover::evaluate_sections({}, {g1});
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SECTION("one of two truth groups found") {
        const auto s = discover::evaluate_sections({g1}, {g1, g2});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 0.5);
        CHECK(s.f1 == Catch::Approx(2.0 / 3.0));
    }
    SECTION("slightly offset boundaries still match at 0.5 Jaccard") {
        const PatternGroup close_match{{{2, 42}, {102, 142}}};
        const auto s = discover::evaluate_sections({close_match}, {g1});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
    }
}

TEST_CASE("sections text format round-trips") {
    const std::vector<PatternGroup> groups{{{{8, 56}, {64, 112}, {120, 168}}}, {{{10, 20}, {30, 40}}}};

    SECTION("frame variant") {
        const std::string text = discover::format_sections(groups);
        const auto back = discover::parse_sections(text);
        REQUIRE(back.size() == 2);
        CHECK(back[0].occurrences == groups[0].occurrences);
        CHECK(back[1].occurrences == groups[1].occurrences);
    }
    SECTION("seconds variant with header") {
        const std::string text = discover::format_sections(groups, 22050.0, 1984);
        CHECK(text.substr(0, 1) == "@");
        const auto back = discover::parse_sections(text);
        REQUIRE(back.size() == 2);
        CHECK(back[0].occurrences == groups[0].occurrences);
        CHECK(back[1].occurrences == groups[1].occurrences);
    }
    SECTION("parse errors") {
        CHECK_THROWS_AS(discover::parse_sections("0 10:5\n"), std::runtime_error);
        CHECK_THROWS_AS(discover::parse_sections("0 banana\n"), std::exception);
    }
}
