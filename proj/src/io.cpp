#include "bdl/io.hpp"

#include "bdl/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace bdl {

namespace {

constexpr std::size_t kMatrixMagicLen = sizeof(kMatrixMagic) - 1;
constexpr std::size_t kModelMagicLen = sizeof(kModelMagic) - 1;

class ByteWriter {
 public:
  void raw(const char* data, std::size_t n) { out_.append(data, n); }

  void u64(std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out_.append(b.data(), b.size());
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void matrix_payload(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::TruncatedFile, "needs " + std::to_string(n) + " more bytes, " +
                                                std::to_string(remaining()) + " left");
    }
  }

  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  Matrix matrix_payload(std::uint64_t rows, std::uint64_t cols) {
    const std::uint64_t count = checked_count(rows, cols);
    if (count > remaining() / 8) {
      throw Error(ErrorCode::TruncatedFile, "payload of " + std::to_string(rows) + "x" +
                                                std::to_string(cols) + " needs " +
                                                std::to_string(count) + " values, " +
                                                std::to_string(remaining()) + " bytes left");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    }
    return m;
  }

  static std::uint64_t checked_count(std::uint64_t rows, std::uint64_t cols) {
    constexpr auto kMaxIndex = static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max());
    if (rows > kMaxIndex || cols > kMaxIndex || (cols != 0 && rows > kMaxIndex / 8 / cols)) {
      throw Error(ErrorCode::DimensionOverflow,
                  std::to_string(rows) + "x" + std::to_string(cols) + " is too large");
    }
    return rows * cols;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool looks_like_text(const std::string& bytes) {
  for (const char ch : bytes) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
    return (ch >= '0' && ch <= '9') || ch == '+';
  }
  return false;
}

double parse_double(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError, "not a number: '" + token + "'");
  }
  return v;
}

Matrix decode_text_matrix(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string rows_tok;
  std::string cols_tok;
  if (!(in >> rows_tok >> cols_tok)) throw Error(ErrorCode::ParseError, "missing 'rows cols' header");
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  for (auto [tok, dst] : {std::pair{&rows_tok, &rows}, std::pair{&cols_tok, &cols}}) {
    const auto [ptr, ec] = std::from_chars(tok->data(), tok->data() + tok->size(), *dst);
    if (ec == std::errc::result_out_of_range) throw Error(ErrorCode::DimensionOverflow, *tok);
    if (ec != std::errc() || ptr != tok->data() + tok->size()) {
      throw Error(ErrorCode::ParseError, "bad dimension '" + *tok + "'");
    }
  }
  ByteReader::checked_count(rows, cols);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::string token;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!(in >> token)) {
        throw Error(ErrorCode::TruncatedFile, "expected " + std::to_string(rows * cols) + " values");
      }
      m(r, c) = parse_double(token);
    }
  }
  if (in >> token) throw Error(ErrorCode::ParseError, "trailing data after matrix values");
  return m;
}

constexpr std::uint64_t kFieldCount = 15;

void write_hyper(ByteWriter& w, const Hyperparams& h) {
  const std::array<const std::optional<double>*, 9> reals{&h.a0, &h.b0, &h.c0, &h.d0, &h.e0,
                                                          &h.f0, &h.lambda_s0, &h.lambda_k0,
                                                          &h.lambda_eps0};
  const std::array<const std::optional<std::int64_t>*, 5> ints{&h.k_init, &h.gibbs_iters,
                                                               &h.burn_in, &h.dict_samples,
                                                               &h.sparsity_t};
  std::uint64_t mask = 0;
  std::uint64_t bit = 0;
  for (const auto* v : reals) mask |= static_cast<std::uint64_t>(v->has_value()) << bit++;
  for (const auto* v : ints) mask |= static_cast<std::uint64_t>(v->has_value()) << bit++;
  mask |= static_cast<std::uint64_t>(h.ridge_lambda.has_value()) << bit++;
  w.u64(mask);
  for (const auto* v : reals) w.f64(v->value_or(0.0));
  for (const auto* v : ints) w.u64(static_cast<std::uint64_t>(v->value_or(0)));
  w.f64(h.ridge_lambda.value_or(0.0));
}

Hyperparams read_hyper(ByteReader& r) {
  Hyperparams h;
  const std::uint64_t mask = r.u64();
  if (mask >> kFieldCount) throw Error(ErrorCode::ParseError, "unknown hyperparameter fields");
  const std::array<std::optional<double>*, 9> reals{&h.a0, &h.b0, &h.c0, &h.d0, &h.e0,
                                                    &h.f0, &h.lambda_s0, &h.lambda_k0,
                                                    &h.lambda_eps0};
  const std::array<std::optional<std::int64_t>*, 5> ints{&h.k_init, &h.gibbs_iters, &h.burn_in,
                                                         &h.dict_samples, &h.sparsity_t};
  std::uint64_t bit = 0;
  for (auto* v : reals) {
    const double x = r.f64();
    if ((mask >> bit++) & 1u) *v = x;
  }
  for (auto* v : ints) {
    const auto x = static_cast<std::int64_t>(r.u64());
    if ((mask >> bit++) & 1u) *v = x;
  }
  const double ridge = r.f64();
  if ((mask >> bit) & 1u) h.ridge_lambda = ridge;
  return h;
}

}  // namespace

MatrixFormat format_for_path(const std::string& path) {
  return ends_with(path, ".txt") || ends_with(path, ".tsv") || ends_with(path, ".csv")
             ? MatrixFormat::Text
             : MatrixFormat::Binary;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

std::string encode_matrix(const Matrix& m, MatrixFormat format) {
  if (format == MatrixFormat::Text) {
    std::ostringstream out;
    out << m.rows() << ' ' << m.cols() << '\n';
    out.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << '\n';
    }
    return out.str();
  }
  ByteWriter w;
  w.raw(kMatrixMagic, kMatrixMagicLen);
  w.raw(&kMatrixDtypeF64, 1);
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  w.matrix_payload(m);
  return w.take();
}

Matrix decode_matrix(const std::string& bytes) {
  if (bytes.compare(0, kMatrixMagicLen, kMatrixMagic) == 0) {
    ByteReader r(bytes);
    r.raw(kMatrixMagicLen);
    const std::string dtype = r.raw(1);
    if (dtype[0] != kMatrixDtypeF64) {
      throw Error(ErrorCode::ParseError, "unsupported dtype tag '" + dtype + "'");
    }
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    Matrix m = r.matrix_payload(rows, cols);
    if (r.remaining() != 0) throw Error(ErrorCode::ParseError, "trailing bytes after payload");
    return m;
  }
  if (looks_like_text(bytes)) return decode_text_matrix(bytes);
  throw Error(ErrorCode::BadMagic, "not a matrix file");
}

Matrix load_matrix(const std::string& path) { return decode_matrix(read_file(path)); }

void save_matrix(const std::string& path, const Matrix& m) {
  save_matrix(path, m, format_for_path(path));
}

void save_matrix(const std::string& path, const Matrix& m, MatrixFormat format) {
  write_file(path, encode_matrix(m, format));
}

std::vector<int> load_labels(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<int> labels;
  std::string token;
  while (in >> token) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::ParseError, "bad label '" + token + "' in " + path);
    }
    labels.push_back(v);
  }
  return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::string out;
  for (const int l : labels) out += std::to_string(l) + '\n';
  write_file(path, out);
}

std::string encode_model(const LearnedModel& model) {
  ByteWriter w;
  w.raw(kModelMagic, kModelMagicLen);
  w.u64(static_cast<std::uint64_t>(model.feature_dim()));
  w.u64(static_cast<std::uint64_t>(model.num_classes()));
  w.u64(static_cast<std::uint64_t>(model.num_atoms()));
  w.u64(static_cast<std::uint64_t>(model.sparsity_t));
  w.u64(model.seed);
  write_hyper(w, model.hyper);
  w.matrix_payload(model.phi);
  w.matrix_payload(model.pi);
  w.matrix_payload(model.w);
  return w.take();
}

LearnedModel decode_model(const std::string& bytes) {
  if (bytes.compare(0, kModelMagicLen, kModelMagic) != 0) {
    throw Error(ErrorCode::BadMagic, "not a model file");
  }
  ByteReader r(bytes);
  r.raw(kModelMagicLen);
  const std::uint64_t m = r.u64();
  const std::uint64_t classes = r.u64();
  const std::uint64_t atoms = r.u64();
  LearnedModel model;
  model.sparsity_t = static_cast<std::int64_t>(r.u64());
  model.seed = r.u64();
  model.hyper = read_hyper(r);
  model.phi = r.matrix_payload(m, atoms);
  model.pi = r.matrix_payload(classes, atoms);
  model.w = r.matrix_payload(classes, atoms);
  if (r.remaining() != 0) throw Error(ErrorCode::ParseError, "trailing bytes in model file");
  return model;
}

void save_model(const std::string& path, const LearnedModel& model) {
  write_file(path, encode_model(model));
}

LearnedModel load_model(const std::string& path) { return decode_model(read_file(path)); }

}  // namespace bdl
