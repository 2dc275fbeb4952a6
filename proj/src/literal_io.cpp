#include "rqc/literal_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace rqc::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Rows {
  std::vector<std::vector<Complex>> rows;
  std::vector<std::string_view> headers;
};

Rows parse_rows(std::string_view text) {
  Rows out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      out.headers.push_back(line);
      continue;
    }
    std::vector<Complex> row;
    for (std::string_view tok : split_ws(line)) row.push_back(parse_complex(tok));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Complex parse_complex(std::string_view token) {
  std::string_view s = trim(token);
  if (s.empty()) throw ParseError("empty complex literal");
  const auto fail = [&] { return ParseError("malformed complex literal '" + std::string(token) + "'"); };
  if (s.back() != 'j' && s.back() != 'i') {
    double re = 0.0;
    if (!parse_real(s, re)) throw fail();
    return {re, 0.0};
  }
  s.remove_suffix(1);
  // Split at the last sign that is not part of an exponent and not leading.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  double re = 0.0;
  double im = 0.0;
  if (split == std::string_view::npos) {
    if (s.empty() || s == "+") {
      im = 1.0;
    } else if (s == "-") {
      im = -1.0;
    } else if (!parse_real(s, im)) {
      throw fail();
    }
    return {0.0, im};
  }
  std::string_view re_part = s.substr(0, split);
  std::string_view im_part = s.substr(split);
  if (!parse_real(re_part, re)) throw fail();
  if (im_part == "+") {
    im = 1.0;
  } else if (im_part == "-") {
    im = -1.0;
  } else if (!parse_real(im_part, im)) {
    throw fail();
  }
  return {re, im};
}

std::string format_complex(Complex z) {
  // %.17g round-trips doubles exactly; negative zero prints as 0.
  const double re = z.real() == 0.0 ? 0.0 : z.real();
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%c%.17gj", re, std::signbit(im) ? '-' : '+', std::abs(im));
  return buf;
}

ComplexMatrix parse_matrix(std::string_view text) {
  const Rows parsed = parse_rows(text);
  if (parsed.rows.empty()) throw ParseError("matrix literal has no rows");
  const std::size_t cols = parsed.rows.front().size();
  ComplexMatrix m(static_cast<Eigen::Index>(parsed.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < parsed.rows.size(); ++r) {
    if (parsed.rows[r].size() != cols) throw ParseError("matrix literal rows have unequal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parsed.rows[r][c];
    }
  }
  return m;
}

std::string format_matrix(const ComplexMatrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ' ';
      out += format_complex(m(r, c));
    }
    out += '\n';
  }
  return out;
}

QuantumState parse_state(std::string_view text) {
  const Rows parsed = parse_rows(text);
  Dims dims;
  bool have_dims = false;
  for (std::string_view h : parsed.headers) {
    h.remove_prefix(1);
    h = trim(h);
    if (h.substr(0, 5) != "dims:") continue;
    for (std::string_view tok : split_ws(h.substr(5))) {
      std::size_t d = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || d == 0) {
        throw ParseError("malformed dims header");
      }
      dims.push_back(d);
    }
    have_dims = true;
  }
  if (!have_dims) throw ParseError("state literal lacks a '# dims:' header");
  if (parsed.rows.empty()) throw ParseError("state literal has no entries");
  const std::size_t n = product(dims);
  const bool column = std::all_of(parsed.rows.begin(), parsed.rows.end(),
                                  [](const auto& r) { return r.size() == 1; });
  if (column && parsed.rows.size() == n) {
    ComplexVector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = parsed.rows[i][0];
    return QuantumState::pure(std::move(dims), std::move(v));
  }
  const ComplexMatrix m = parse_matrix(text);
  if (m.rows() != static_cast<Eigen::Index>(n) || m.cols() != m.rows()) {
    throw DimensionMismatch("state literal size does not match its dims header");
  }
  return QuantumState::mixed(std::move(dims), m);
}

std::string format_state(const QuantumState& state) {
  std::string out = "# dims:";
  for (std::size_t d : state.dims()) out += ' ' + std::to_string(d);
  out += '\n';
  if (state.is_pure()) return out + format_matrix(state.amplitudes());
  return out + format_matrix(state.density_matrix());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ComplexMatrix read_matrix_file(const std::string& path) {
  return parse_matrix(read_text_file(path));
}

QuantumState read_state_file(const std::string& path) { return parse_state(read_text_file(path)); }

}  // namespace rqc::io
