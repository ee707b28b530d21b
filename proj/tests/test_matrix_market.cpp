#include "vibroid/matrix_market.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

namespace {

using vibroid::Index;
using vibroid::Matrix;

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "vibroid_mm_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

TEST(MatrixMarket, ReadsArrayGeneral) {
    // Column-major array body: 2x3 matrix [[1,3,5],[2,4,6]].
    const auto path = temp_file("array_general.mtx");
    write_text(path,
               "%%MatrixMarket matrix array real general\n"
               "% comment line\n"
               "2 3\n"
               "1\n2\n3\n4\n5\n6\n");
    const Matrix m = vibroid::mm::read_matrix(path);
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 3);
    Matrix expected(2, 3);
    expected << 1, 3, 5, 2, 4, 6;
    EXPECT_EQ(m, expected);
}

TEST(MatrixMarket, ReadsCoordinateGeneralWithIntegerField) {
    const auto path = temp_file("coord_int.mtx");
    write_text(path,
               "%%MatrixMarket matrix coordinate integer general\n"
               "2 2 3\n"
               "1 1 7\n"
               "2 1 -2\n"
               "2 2 5\n");
    const Matrix m = vibroid::mm::read_matrix(path);
    Matrix expected(2, 2);
    expected << 7, 0, -2, 5;
    EXPECT_EQ(m, expected);
}

TEST(MatrixMarket, ExpandsSymmetricStorage) {
    // Lower-triangular entries only; loader must mirror them.
    const auto path = temp_file("coord_sym.mtx");
    write_text(path,
               "%%MatrixMarket matrix coordinate real symmetric\n"
               "3 3 4\n"
               "1 1 2.0\n"
               "2 1 -1.0\n"
               "2 2 2.0\n"
               "3 3 1.5\n");
    const Matrix m = vibroid::mm::read_matrix(path);
    Matrix expected(3, 3);
    expected << 2, -1, 0, -1, 2, 0, 0, 0, 1.5;
    EXPECT_EQ(m, expected);
}

TEST(MatrixMarket, RejectsMalformedHeader) {
    const auto path = temp_file("bad_header.mtx");
    write_text(path, "%%MatrixMarket matrix array complex general\n1 1\n1 0\n");
    EXPECT_THROW(vibroid::mm::read_matrix(path), std::runtime_error);
}

TEST(MatrixMarket, RejectsMissingFile) {
    EXPECT_THROW(vibroid::mm::read_matrix(temp_file("does_not_exist.mtx")),
                 std::runtime_error);
}

TEST(MatrixMarket, WriteThenReadIsExact) {
    // Full-precision text must reproduce every bit, including awkward values.
    std::mt19937_64 engine(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(7, 4);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            m(i, j) = dist(engine) * std::pow(10.0, static_cast<double>((i * 4 + j) % 17) - 8);
        }
    }
    m(0, 0) = 0.1;  // classic non-representable decimal
    m(1, 1) = 1.0 / 3.0;
    m(2, 2) = 0.0;

    const auto path = temp_file("round_trip.mtx");
    vibroid::mm::write_matrix(path, m, "round trip");
    const Matrix back = vibroid::mm::read_matrix(path);
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            EXPECT_EQ(back(i, j), m(i, j)) << "at (" << i << "," << j << ")";
        }
    }
}

TEST(MatrixMarket, WriteIsDeterministic) {
    Matrix m(2, 2);
    m << 1.0, -0.25, 3.5e-9, 7.0;
    const auto path_a = temp_file("det_a.mtx");
    const auto path_b = temp_file("det_b.mtx");
    vibroid::mm::write_matrix(path_a, m);
    vibroid::mm::write_matrix(path_b, m);
    std::ifstream a(path_a), b(path_b);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    EXPECT_EQ(sa, sb);
    EXPECT_FALSE(sa.empty());
}

}  // namespace
