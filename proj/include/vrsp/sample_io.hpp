// CSV interchange for loading samples, data matrices and per-draw transforms.
//
// Sample files have a header "lambda_<r>_<j>" (1-based) ordered column-major
// by factor and one row per draw. Values are written with 17 significant
// digits so a write-read round trip is exact.
#pragma once

#include "vrsp/rsp.hpp"
#include "vrsp/tensor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vrsp {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double x);

std::vector<std::string> sample_header(int p, int q);

void write_sample_csv(const std::filesystem::path& path, const LoadingsSample& s);
/// Infers (p, q) from the header.
LoadingsSample read_sample_csv(const std::filesystem::path& path);

/// Header sigma2_<r>, one row per draw.
void write_sigma2_csv(const std::filesystem::path& path, const std::vector<Vector>& v);
std::vector<Vector> read_sigma2_csv(const std::filesystem::path& path);

/// factors_<t>.csv for t = 1..T inside `dir`, header f_<j>.
void write_factor_files(const std::filesystem::path& dir, const std::vector<Matrix>& f);
std::vector<Matrix> read_factor_files(const std::filesystem::path& dir, int draws);

/// Plain numeric table with a header row.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header);
/// Reads a numeric table; the first row is skipped when it is not numeric.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// One row per draw: draw, s_1..s_q, nu_1..nu_q (1-based), R_<a>_<b>.
void write_transforms_csv(const std::filesystem::path& path,
                          const std::vector<DrawTransform>& transforms);
std::vector<DrawTransform> read_transforms_csv(const std::filesystem::path& path);

}  // namespace vrsp
