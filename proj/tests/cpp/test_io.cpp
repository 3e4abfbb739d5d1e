#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/io.hpp"
#include "doctest.h"

using namespace cwgan;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("matrix csv round trip is lossless") {
    TempFile f("io_roundtrip.csv");
    DataMatrix m{{1.0, -2.5, 3.0e-17}, {0.1 + 0.2, 1.0 / 3.0, -0.0}};
    write_matrix_csv(f.path, m);
    const DataMatrix back = read_matrix_csv(f.path);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            CHECK(back(i, j) == m(i, j));  // bitwise, not approximate
        }
    }
}

TEST_CASE("matrix csv rewrites are byte identical") {
    TempFile f1("io_bytes_a.csv");
    TempFile f2("io_bytes_b.csv");
    DataMatrix m{{3.141592653589793, 2.718281828459045}, {-1.0e308, 5.0e-324}};
    write_matrix_csv(f1.path, m);
    write_matrix_csv(f2.path, read_matrix_csv(f1.path));
    CHECK(read_text_file(f1.path) == read_text_file(f2.path));
}

TEST_CASE("matrix csv header is validated") {
    TempFile f("io_bad_header.csv");
    write_text_file(f.path, "1,2\n3,4\n");
    CHECK_THROWS_AS(read_matrix_csv(f.path), Error);

    write_text_file(f.path, "# 2 2\n1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv(f.path), Error);

    write_text_file(f.path, "# 2 2\n1,2\n3,nan\n");
    CHECK_THROWS_AS(read_matrix_csv(f.path), Error);

    CHECK_THROWS_AS(read_matrix_csv("io_missing_file.csv"), Error);
    try {
        read_matrix_csv("io_missing_file.csv");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
    }
}

TEST_CASE("pgm image round trip preserves planar samples") {
    TempFile f("io_gray.pgm");
    const ImageShape shape{2, 3, 1};
    std::vector<double> sample = {0.0, 10.0, 255.0, 128.0, 7.0, 64.0};
    write_image(f.path, sample, shape);
    ImageShape got;
    const std::vector<double> back = read_image(f.path, got);
    CHECK(got.height == 2);
    CHECK(got.width == 3);
    CHECK(got.channels == 1);
    REQUIRE(back.size() == sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) CHECK(back[i] == sample[i]);
}

TEST_CASE("ppm image clamps and rounds at export") {
    TempFile f("io_color.ppm");
    const ImageShape shape{1, 2, 3};
    // Planar: R plane (2 px), G plane, B plane. Out-of-range and fractional
    // values are clamped/rounded only at export.
    std::vector<double> sample = {-5.0, 300.0, 12.4, 12.6, 255.0, 0.0};
    write_image(f.path, sample, shape);
    ImageShape got;
    const std::vector<double> back = read_image(f.path, got);
    CHECK(got.channels == 3);
    REQUIRE(back.size() == 6);
    CHECK(back[0] == 0.0);
    CHECK(back[1] == 255.0);
    CHECK(back[2] == 12.0);
    CHECK(back[3] == 13.0);
    CHECK(back[4] == 255.0);
    CHECK(back[5] == 0.0);
}

TEST_CASE("image size mismatch is rejected") {
    TempFile f("io_mismatch.pgm");
    const ImageShape shape{2, 2, 1};
    std::vector<double> sample = {1.0, 2.0, 3.0};  // one value short
    CHECK_THROWS_AS(write_image(f.path, sample, shape), Error);
}
