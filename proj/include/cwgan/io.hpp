#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwgan/matrix.hpp"

namespace cwgan {

// Matrix CSV format: first line "# rows cols", then rows of comma-separated
// decimals. Doubles are printed with 17 significant digits so re-reading is
// lossless and repeated runs are byte-identical.
DataMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const DataMatrix& m);

// Image-sample layout: one DataMatrix row per image, channels stored planar —
// [channel 0 row-major h·w | channel 1 | ...]. Values are real; they are
// clipped to [0, 255] only at export time.
struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;  // 1 (PGM) or 3 (PPM)

    std::size_t pixels_per_channel() const { return height * width; }
    std::size_t flat_size() const { return height * width * channels; }
};

// Binary 8-bit PGM (P5, channels = 1) or PPM (P6, channels = 3).
void write_image(const std::string& path, const std::vector<double>& sample,
                 const ImageShape& shape);
std::vector<double> read_image(const std::string& path, ImageShape& shape_out);

// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cwgan
