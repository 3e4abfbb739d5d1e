#include "cwgan/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cwgan/errors.hpp"

namespace cwgan {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

DataMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open matrix file: " + path);
    std::string header;
    if (!std::getline(in, header)) fail(ErrorKind::IoError, "empty matrix file: " + path);
    std::size_t rows = 0, cols = 0;
    {
        std::istringstream hs(header);
        std::string hash;
        hs >> hash >> rows >> cols;
        if (hash != "#" || rows == 0 || cols == 0 || hs.fail())
            fail(ErrorKind::IoError, "bad matrix header (expected '# rows cols'): " + path);
    }
    DataMatrix m(rows, cols);
    std::string line;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            fail(ErrorKind::IoError, "truncated matrix file: " + path);
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::getline(ls, cell, ','))
                fail(ErrorKind::IoError, "short row " + std::to_string(i) + " in " + path);
            // strtod instead of stod: subnormal values underflow with ERANGE,
            // which stod turns into an exception; they are valid cells here.
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            while (end != nullptr && *end != '\0' && std::isspace(static_cast<unsigned char>(*end)))
                ++end;
            if (end == begin || end == nullptr || *end != '\0')
                fail(ErrorKind::IoError, "bad numeric cell in " + path + ": '" + cell + "'");
            m(i, j) = value;
        }
    }
    if (!m.all_finite()) fail(ErrorKind::IoError, "non-finite values in " + path);
    return m;
}

void write_matrix_csv(const std::string& path, const DataMatrix& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write matrix file: " + path);
    out << "# " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
    if (!out) fail(ErrorKind::IoError, "write failed: " + path);
}

void write_image(const std::string& path, const std::vector<double>& sample,
                 const ImageShape& shape) {
    if (shape.channels != 1 && shape.channels != 3)
        fail(ErrorKind::InvalidInput, "write_image: channels must be 1 or 3");
    if (sample.size() != shape.flat_size())
        fail(ErrorKind::DimensionMismatch, "write_image: sample size does not match shape");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write image file: " + path);
    out << (shape.channels == 1 ? "P5" : "P6") << "\n"
        << shape.width << " " << shape.height << "\n255\n";
    const std::size_t plane = shape.pixels_per_channel();
    std::vector<unsigned char> bytes;
    bytes.reserve(shape.flat_size());
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < shape.channels; ++c) {
            const double v = std::round(sample[c * plane + p]);
            bytes.push_back(static_cast<unsigned char>(std::clamp(v, 0.0, 255.0)));
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::IoError, "image write failed: " + path);
}

std::vector<double> read_image(const std::string& path, ImageShape& shape_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open image file: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6")
        fail(ErrorKind::IoError, "unsupported image format in " + path + " (want P5/P6)");
    std::size_t w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w == 0 || h == 0 || maxval != 255)
        fail(ErrorKind::IoError, "bad image header in " + path);
    in.get();  // single whitespace after maxval
    shape_out.width = w;
    shape_out.height = h;
    shape_out.channels = magic == "P5" ? 1 : 3;
    const std::size_t plane = shape_out.pixels_per_channel();
    std::vector<unsigned char> bytes(shape_out.flat_size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        fail(ErrorKind::IoError, "truncated image data in " + path);
    std::vector<double> sample(shape_out.flat_size());
    for (std::size_t p = 0; p < plane; ++p)
        for (std::size_t c = 0; c < shape_out.channels; ++c)
            sample[c * plane + p] = static_cast<double>(bytes[p * shape_out.channels + c]);
    return sample;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write file: " + path);
    out << content;
    if (!out) fail(ErrorKind::IoError, "write failed: " + path);
}

}  // namespace cwgan
