#pragma once

#include "bdl/types.hpp"

#include <string>
#include <vector>

namespace bdl {

// Binary matrix file, all integers and floats little-endian:
//   "BDLM1" | dtype tag 'D' (float64) | rows u64 | cols u64 | rows*cols f64, row-major.
// Text matrix file: first line "rows cols", then whitespace-separated values
// in row-major order.
enum class MatrixFormat { Binary, Text };

inline constexpr char kMatrixMagic[] = "BDLM1";
inline constexpr char kMatrixDtypeF64 = 'D';

// Text when the path ends in .txt, .tsv or .csv; binary otherwise.
MatrixFormat format_for_path(const std::string& path);

// Detects the format from the file contents.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m);
void save_matrix(const std::string& path, const Matrix& m, MatrixFormat format);

Matrix decode_matrix(const std::string& bytes);
std::string encode_matrix(const Matrix& m, MatrixFormat format);

// One integer label per line.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& labels);

// Binary model file, little-endian:
//   "BDLMODL1" | m, C, |K|, t, seed (u64) | hyperparameter record | Phi (m x |K|)
//   | pi (C x |K|) | W (C x |K|), matrices as row-major f64.
// The hyperparameter record is a u64 presence mask followed by 15 fields
// (a0 b0 c0 d0 e0 f0 lambda_s0 lambda_k0 lambda_eps0 as f64, k_init
// gibbs_iters burn_in dict_samples sparsity_t as i64, ridge_lambda as f64).
inline constexpr char kModelMagic[] = "BDLMODL1";

std::string encode_model(const LearnedModel& model);
LearnedModel decode_model(const std::string& bytes);
void save_model(const std::string& path, const LearnedModel& model);
LearnedModel load_model(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace bdl
