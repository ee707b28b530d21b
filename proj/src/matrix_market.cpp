#include "vibroid/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vibroid::mm {

namespace {

[[noreturn]] void fail(const std::filesystem::path& file, const std::string& reason) {
    throw std::runtime_error("matrix market: " + file.string() + ": " + reason);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return true;
    }
    return false;
}

}  // namespace

Matrix read_matrix(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(file, "cannot open file");

    std::string banner;
    if (!std::getline(in, banner)) fail(file, "empty file");

    std::istringstream header(banner);
    std::string tag, object, format, field, symmetry;
    header >> tag >> object >> format >> field >> symmetry;
    if (lower(tag) != "%%matrixmarket") fail(file, "missing %%MatrixMarket banner");
    if (lower(object) != "matrix") fail(file, "unsupported object '" + object + "'");
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (format != "array" && format != "coordinate")
        fail(file, "unsupported format '" + format + "'");
    if (field != "real" && field != "integer")
        fail(file, "unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        fail(file, "unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    std::string line;
    if (!next_data_line(in, line)) fail(file, "missing size line");
    std::istringstream size_line(line);

    if (format == "array") {
        Index rows = 0, cols = 0;
        if (!(size_line >> rows >> cols) || rows <= 0 || cols <= 0)
            fail(file, "malformed array size line '" + line + "'");
        if (symmetric && rows != cols) fail(file, "symmetric array must be square");
        Matrix m(rows, cols);
        // Array data is column-major; symmetric files store the lower triangle.
        for (Index j = 0; j < cols; ++j) {
            for (Index i = symmetric ? j : 0; i < rows; ++i) {
                double value = 0.0;
                if (!(in >> value))
                    fail(file, "truncated array data at column " + std::to_string(j));
                m(i, j) = value;
                if (symmetric) m(j, i) = value;
            }
        }
        return m;
    }

    Index rows = 0, cols = 0;
    long long nnz = 0;
    if (!(size_line >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
        fail(file, "malformed coordinate size line '" + line + "'");
    if (symmetric && rows != cols) fail(file, "symmetric matrix must be square");
    Matrix m = Matrix::Zero(rows, cols);
    for (long long k = 0; k < nnz; ++k) {
        Index i = 0, j = 0;
        double value = 0.0;
        if (!(in >> i >> j >> value))
            fail(file, "truncated coordinate data at entry " + std::to_string(k));
        if (i < 1 || i > rows || j < 1 || j > cols)
            fail(file, "coordinate entry out of range at entry " + std::to_string(k));
        m(i - 1, j - 1) = value;
        if (symmetric) m(j - 1, i - 1) = value;
    }
    return m;
}

void write_matrix(const std::filesystem::path& file, const Matrix& m,
                  const std::string& comment) {
    std::ofstream out(file);
    if (!out) fail(file, "cannot open file for writing");
    out << "%%MatrixMarket matrix array real general\n";
    if (!comment.empty()) out << "% " << comment << "\n";
    out << m.rows() << " " << m.cols() << "\n";
    char buf[40];
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << "\n";
        }
    }
    if (!out) fail(file, "write failed");
}

}  // namespace vibroid::mm
