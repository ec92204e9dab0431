#include "vrsp/sample_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vrsp {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

// want_header: 1 = required, 0 = forbidden, -1 = detect.
Table read_table(const fs::path& path, int want_header) {
  auto in = open_in(path);
  Table t;
  std::string line;
  size_t lineno = 0, width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (first) {
      first = false;
      double probe;
      const bool numeric = parse_double(cells.front(), probe);
      if (want_header == 1 || (want_header == -1 && !numeric)) {
        for (auto c : cells) t.header.emplace_back(c);
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(width) + " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (size_t k = 0; k < cells.size(); ++k) {
      if (!parse_double(cells[k], row[k])) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                          std::string(cells[k]) + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (in.bad()) throw FormatError("read error on " + path.string());
  return t;
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (size_t k = 0; k < cells.size(); ++k) {
    if (k) os << ',';
    os << cells[k];
  }
  os << '\n';
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw FormatError("write error on " + path.string());
}

}  // namespace

std::string format_double(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> sample_header(int p, int q) {
  std::vector<std::string> h;
  h.reserve(static_cast<size_t>(p) * q);
  for (int j = 1; j <= q; ++j)
    for (int r = 1; r <= p; ++r) h.push_back("lambda_" + std::to_string(r) + "_" + std::to_string(j));
  return h;
}

void write_sample_csv(const fs::path& path, const LoadingsSample& s) {
  auto out = open_out(path);
  write_row(out, sample_header(s.p(), s.q()));
  std::string line;
  for (int t = 0; t < s.draws(); ++t) {
    const auto d = s.draw(t);
    line.clear();
    for (int j = 0; j < s.q(); ++j)
      for (int r = 0; r < s.p(); ++r) {
        if (j || r) line += ',';
        line += format_double(d(r, j));
      }
    out << line << '\n';
  }
  finish(out, path);
}

LoadingsSample read_sample_csv(const fs::path& path) {
  const Table t = read_table(path, 1);
  int p = 0, q = 0;
  std::vector<std::pair<int, int>> idx;
  for (const auto& h : t.header) {
    int r = 0, j = 0;
    char tail = 0;
    if (std::sscanf(h.c_str(), "lambda_%d_%d%c", &r, &j, &tail) != 2 || r < 1 || j < 1) {
      throw FormatError(path.string() + ": bad column name '" + h + "'");
    }
    idx.emplace_back(r - 1, j - 1);
    p = std::max(p, r);
    q = std::max(q, j);
  }
  if (idx.empty()) throw FormatError(path.string() + ": empty header");
  const auto expect = sample_header(p, q);
  if (expect != t.header) {
    throw FormatError(path.string() + ": header does not list lambda_<r>_<j> for all r, j in column-major order");
  }
  if (t.rows.empty()) throw FormatError(path.string() + ": no draws");
  LoadingsSample s(p, q, static_cast<int>(t.rows.size()));
  for (size_t row = 0; row < t.rows.size(); ++row) {
    auto d = s.draw(static_cast<int>(row));
    for (size_t k = 0; k < idx.size(); ++k) d(idx[k].first, idx[k].second) = t.rows[row][k];
  }
  return s;
}

void write_sigma2_csv(const fs::path& path, const std::vector<Vector>& v) {
  if (v.empty()) throw FormatError("write_sigma2_csv: nothing to write");
  const int p = static_cast<int>(v.front().size());
  Matrix m(v.size(), p);
  for (size_t t = 0; t < v.size(); ++t) m.row(t) = v[t].transpose();
  std::vector<std::string> h;
  for (int r = 1; r <= p; ++r) h.push_back("sigma2_" + std::to_string(r));
  write_matrix_csv(path, m, h);
}

std::vector<Vector> read_sigma2_csv(const fs::path& path) {
  const Matrix m = read_matrix_csv(path);
  std::vector<Vector> v(m.rows());
  for (Eigen::Index t = 0; t < m.rows(); ++t) v[t] = m.row(t).transpose();
  return v;
}

void write_factor_files(const fs::path& dir, const std::vector<Matrix>& f) {
  fs::create_directories(dir);
  for (size_t t = 0; t < f.size(); ++t) {
    std::vector<std::string> h;
    for (Eigen::Index j = 1; j <= f[t].cols(); ++j) h.push_back("f_" + std::to_string(j));
    write_matrix_csv(dir / ("factors_" + std::to_string(t + 1) + ".csv"), f[t], h);
  }
}

std::vector<Matrix> read_factor_files(const fs::path& dir, int draws) {
  std::vector<Matrix> f(draws);
  for (int t = 0; t < draws; ++t) f[t] = read_matrix_csv(dir / ("factors_" + std::to_string(t + 1) + ".csv"));
  return f;
}

void write_matrix_csv(const fs::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  if (!header.empty() && static_cast<Eigen::Index>(header.size()) != m.cols()) {
    throw DimensionError("write_matrix_csv: header width differs from column count");
  }
  auto out = open_out(path);
  if (!header.empty()) write_row(out, header);
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    out << line << '\n';
  }
  finish(out, path);
}

Matrix read_matrix_csv(const fs::path& path) {
  const Table t = read_table(path, -1);
  if (t.rows.empty()) throw FormatError(path.string() + ": no data rows");
  Matrix m(t.rows.size(), t.rows.front().size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    for (size_t j = 0; j < t.rows[i].size(); ++j) m(i, j) = t.rows[i][j];
  return m;
}

void write_transforms_csv(const fs::path& path, const std::vector<DrawTransform>& transforms) {
  if (transforms.empty()) throw FormatError("write_transforms_csv: nothing to write");
  const int q = transforms.front().sp.size();
  std::vector<std::string> h{"draw"};
  for (int j = 1; j <= q; ++j) h.push_back("s_" + std::to_string(j));
  for (int j = 1; j <= q; ++j) h.push_back("nu_" + std::to_string(j));
  for (int a = 1; a <= q; ++a)
    for (int b = 1; b <= q; ++b) h.push_back("R_" + std::to_string(a) + "_" + std::to_string(b));
  auto out = open_out(path);
  write_row(out, h);
  std::vector<std::string> cells;
  for (size_t t = 0; t < transforms.size(); ++t) {
    const auto& tr = transforms[t];
    cells.assign(1, std::to_string(t + 1));
    for (int j = 0; j < q; ++j) cells.push_back(std::to_string(tr.sp.sign(j)));
    for (int j = 0; j < q; ++j) cells.push_back(std::to_string(tr.sp.source(j) + 1));
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) cells.push_back(format_double(tr.rotation(a, b)));
    write_row(out, cells);
  }
  finish(out, path);
}

std::vector<DrawTransform> read_transforms_csv(const fs::path& path) {
  const Table t = read_table(path, 1);
  const size_t w = t.header.size();
  int q = 0;
  while (1 + 2 * static_cast<size_t>(q) + static_cast<size_t>(q) * q < w) ++q;
  if (q == 0 || 1 + 2 * static_cast<size_t>(q) + static_cast<size_t>(q) * q != w) {
    throw FormatError(path.string() + ": unexpected transforms width");
  }
  std::vector<DrawTransform> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    std::vector<int> s(q), nu(q);
    for (int j = 0; j < q; ++j) {
      s[j] = static_cast<int>(row[1 + j]);
      nu[j] = static_cast<int>(row[1 + q + j]);
    }
    DrawTransform tr;
    tr.sp = SignedPermutation::from_one_based(std::move(s), nu);
    tr.rotation.resize(q, q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) tr.rotation(a, b) = row[1 + 2 * q + a * q + b];
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace vrsp
