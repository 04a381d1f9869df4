#include <doctest.h>

#include "mcrkit/csv.hpp"
#include "mcrkit/error.hpp"
#include "mcrkit/random.hpp"

#include <cstring>
#include <filesystem>

using namespace mcr;

TEST_CASE("format_double round-trips at 17 significant digits") {
    Xoshiro256 rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform() * 600) - 300);
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("matrix CSV round-trip with and without header") {
    Xoshiro256 rng(2);
    Matrix m(7, 3);
    for (auto& x : m.reshaped()) x = rng.normal() * 1e-7;
    const std::string plain = format_matrix_csv(m);
    CsvMatrix back = parse_matrix_csv(plain, false);
    CHECK((back.data - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.header.empty());

    const std::string with = format_matrix_csv(m, {"a", "b", "c"});
    back = parse_matrix_csv(with, true);
    CHECK((back.data - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.header == std::vector<std::string>{"a", "b", "c"});
    CHECK(format_matrix_csv(back.data, back.header) == with);
}

TEST_CASE("CSV parsing tolerates CRLF, spaces, blank lines and a leading plus") {
    const CsvMatrix m = parse_matrix_csv("1, 2\r\n\r\n+3,4e-1\n", false);
    CHECK(m.data.rows() == 2);
    CHECK(m.data(1, 0) == 3.0);
    CHECK(m.data(1, 1) == 0.4);
}

TEST_CASE("CSV errors name the line and field") {
    try {
        parse_matrix_csv("1,2\n3,x\n", false, "f.csv");
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("f.csv:2: field 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_matrix_csv("1,2\n3\n", false), InputError);
    CHECK_THROWS_AS(parse_matrix_csv("", false), InputError);
    CHECK_THROWS_AS(parse_matrix_csv("a,b\n1,2,3\n", true), InputError);
    CHECK_THROWS_AS(parse_matrix_csv("1,1e999\n", false), InputError);
    CHECK_THROWS_AS(parse_matrix_csv("1;2\n", false), InputError);
}

TEST_CASE("atomic writes replace the target and leave no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "mcrkit_csv_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "m.csv";
    write_matrix_csv(path, Matrix::Identity(2, 2));
    write_matrix_csv(path, Matrix::Ones(1, 2), {"p", "q"});
    CHECK(read_text_file(path) == "p,q\n1,1\n");
    CHECK_FALSE(std::filesystem::exists(dir / "m.csv.tmp"));
    const CsvMatrix back = read_matrix_csv(path, true);
    CHECK(back.data.cols() == 2);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), InputError);
}
