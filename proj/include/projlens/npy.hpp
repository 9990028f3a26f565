#pragma once

#include "projlens/matrix.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace projlens {

// NPY v1.0 reader/writer restricted to 2-D little-endian f32/f64 arrays.
//
// The writer is canonical: the header is the numpy dict literal
// "{'descr': '<f8', 'fortran_order': False, 'shape': (r, c), }" padded with
// spaces and terminated by '\n' so that magic + header is a multiple of 64
// bytes. Readers accept versions 1.0-3.0 and Fortran-ordered payloads, and
// reject anything else rather than coerce it.

DenseMatrix decode_npy(std::string_view bytes);
std::string encode_npy(const DenseMatrix& m);

DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const DenseMatrix& m, const std::filesystem::path& path);

// Whole-file helpers shared by the other loaders.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace projlens
