#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "timr/config.hpp"
#include "timr/container.hpp"

using namespace timr;

TEST_CASE("container round-trip is the identity for all dtypes", "[property]") {
    Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t rows = 1 + static_cast<std::size_t>(rng.uniform_int(0, 20));
        const std::size_t cols = 1 + static_cast<std::size_t>(rng.uniform_int(0, 20));
        const auto dtype = static_cast<io::Dtype>(rng.uniform_int(0, 2));

        Matrix m(rows, cols);
        for (double& v : m.data()) {
            if (dtype == io::Dtype::Binary) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
            else if (dtype == io::Dtype::F32) v = static_cast<float>(rng.uniform(-100, 100));
            else v = rng.uniform(-100, 100);
        }

        std::stringstream buf;
        io::write_container(buf, m, dtype);
        io::Dtype back_dtype;
        const Matrix back = io::read_container(buf, &back_dtype);
        CHECK(back_dtype == dtype);
        REQUIRE(back.rows() == rows);
        REQUIRE(back.cols() == cols);
        CHECK(back == m);
    }
}

TEST_CASE("container rejects corrupt input") {
    Matrix m(2, 2, 1.0);
    std::stringstream buf;
    io::write_container(buf, m, io::Dtype::F64);
    const std::string bytes = buf.str();

    SECTION("bad magic") {
        std::string corrupt = bytes;
        corrupt[0] = 'X';
        std::stringstream in(corrupt);
        CHECK_THROWS_WITH(io::read_container(in), Catch::Matchers::ContainsSubstring("magic"));
    }
    SECTION("truncated payload") {
        std::stringstream in(bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_WITH(io::read_container(in), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("unknown dtype") {
        std::string corrupt = bytes;
        corrupt[6] = 7; // dtype byte
        std::stringstream in(corrupt);
        CHECK_THROWS_WITH(io::read_container(in), Catch::Matchers::ContainsSubstring("dtype"));
    }
}

TEST_CASE("pgm output") {
    Matrix m(2, 3);
    m(0, 0) = 0.0;
    m(0, 1) = 0.5;
    m(0, 2) = 1.0;
    m(1, 0) = 1.0;
    m(1, 1) = 0.0;
    m(1, 2) = 0.5;
    std::stringstream out;
    io::write_pgm(out, m);
    CHECK(out.str() == "P2\n3 2\n255\n0 128 255\n255 0 128\n");

    // constant matrix renders all-zero instead of dividing by zero
    std::stringstream flat;
    io::write_pgm(flat, Matrix(1, 2, 3.0));
    CHECK(flat.str() == "P2\n2 1\n255\n0 0\n");
}

TEST_CASE("run config parsing") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "timr_test_config.cfg";

    SECTION("known keys and comments") {
        std::ofstream(path) << "# comment line\n"
                               "total_steps = 123\n"
                               "factor_dim=16   # trailing comment\n"
                               "output_kind=real\n"
                               "gamma=0.81\n";
        io::RunConfig rc;
        rc.load(path);
        CHECK(rc.total_steps == 123);
        CHECK(rc.factor_dim == 16);
        CHECK(rc.output_kind == gae::OutputKind::Real);
        CHECK(rc.gamma == 0.81);

        const auto mc = rc.model_config(gae::ModelConfig::symbolic_defaults());
        CHECK(mc.factor_dim == 16);
        CHECK(mc.input_dim == 60); // default survives
        const auto tc = rc.train_config();
        CHECK(tc.total_steps == 123);
        CHECK(tc.batch_size == 32);
    }
    SECTION("unknown key rejected") {
        std::ofstream(path) << "factory_dim=16\n";
        io::RunConfig rc;
        CHECK_THROWS_WITH(rc.load(path), Catch::Matchers::ContainsSubstring("factory_dim"));
    }
    SECTION("bad value rejected") {
        std::ofstream(path) << "total_steps=abc\n";
        io::RunConfig rc;
        CHECK_THROWS_WITH(rc.load(path), Catch::Matchers::ContainsSubstring("total_steps"));
    }
    fs::remove(path);
}
