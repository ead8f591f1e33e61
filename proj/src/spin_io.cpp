#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "latgamma/field.hpp"

namespace latgamma {

namespace {

constexpr const char* kMagic = "SPIN1";

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(std::string("SPIN1: unexpected end of input while reading ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::istringstream keyed(std::istream& in, const std::string& key) {
  const std::string line = next_line(in, key.c_str());
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != key) throw IoError("SPIN1: expected '" + key + "' line, got '" + line + "'");
  return ls;
}

double parse_real(const std::string& token) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw IoError("SPIN1: malformed number '" + token + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IoError("SPIN1: malformed number '" + token + "'");
  }
}

void expect_end(std::istringstream& ls, const std::string& key) {
  std::string extra;
  if (ls >> extra) throw IoError("SPIN1: trailing data on '" + key + "' line");
}

}  // namespace

void write_spin(std::ostream& out, const SpinField& f) {
  const Window& w = f.window();
  const int d = f.dimension();
  out << kMagic << '\n';
  out << "dim " << d << '\n';
  out << "extents";
  for (int k = 0; k < d; ++k) out << ' ' << w.extent[k];
  out << "\norigin";
  for (int k = 0; k < d; ++k) out << ' ' << w.origin[k];
  out << "\neps " << format_real(f.eps()) << '\n';
  out << "boundary";
  for (int k = 0; k < d; ++k) out << ' ' << to_string(w.boundary[k]);
  out << "\noffsets " << f.offset_count() << '\n';
  for (const auto& o : f.lattice().offsets()) {
    for (int k = 0; k < d; ++k) out << (k ? " " : "") << format_real(o[k]);
    out << '\n';
  }
  const auto values = f.values();
  const std::size_t row = static_cast<std::size_t>(w.extent[d - 1]) * f.offset_count();
  std::string line(row, '0');
  for (std::size_t start = 0; start < values.size(); start += row) {
    for (std::size_t i = 0; i < row; ++i) line[i] = values[start + i] ? '1' : '0';
    out << line << '\n';
  }
}

void write_spin(const std::filesystem::path& path, const SpinField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_spin(out, f);
  if (!out) throw IoError("failed writing " + path.string());
}

SpinField read_spin(std::istream& in) {
  if (next_line(in, "magic") != kMagic) throw IoError("SPIN1: bad magic line");
  int d = 0;
  {
    auto ls = keyed(in, "dim");
    if (!(ls >> d) || d < 1 || d > kMaxDim) throw IoError("SPIN1: bad dimension");
    expect_end(ls, "dim");
  }
  Window w;
  w.dim = d;
  {
    auto ls = keyed(in, "extents");
    for (int k = 0; k < d; ++k) {
      if (!(ls >> w.extent[k]) || w.extent[k] < 1) throw IoError("SPIN1: bad extents");
    }
    expect_end(ls, "extents");
  }
  {
    auto ls = keyed(in, "origin");
    for (int k = 0; k < d; ++k) {
      if (!(ls >> w.origin[k])) throw IoError("SPIN1: bad origin");
    }
    expect_end(ls, "origin");
  }
  double eps = 0.0;
  {
    auto ls = keyed(in, "eps");
    std::string tok;
    if (!(ls >> tok)) throw IoError("SPIN1: missing eps");
    eps = parse_real(tok);
    expect_end(ls, "eps");
  }
  {
    auto ls = keyed(in, "boundary");
    for (int k = 0; k < d; ++k) {
      std::string tok;
      if (!(ls >> tok)) throw IoError("SPIN1: bad boundary line");
      try {
        w.boundary[k] = boundary_from_string(tok);
      } catch (const std::invalid_argument& e) {
        throw IoError(std::string("SPIN1: ") + e.what());
      }
    }
    expect_end(ls, "boundary");
  }
  std::size_t m = 0;
  {
    auto ls = keyed(in, "offsets");
    if (!(ls >> m) || m < 1) throw IoError("SPIN1: bad offset count");
    expect_end(ls, "offsets");
  }
  std::vector<Point> offsets(m);
  for (std::size_t a = 0; a < m; ++a) {
    std::istringstream ls(next_line(in, "offset"));
    for (int k = 0; k < d; ++k) {
      std::string tok;
      if (!(ls >> tok)) throw IoError("SPIN1: bad offset line");
      offsets[a][k] = parse_real(tok);
    }
    expect_end(ls, "offset");
  }
  const std::size_t row = static_cast<std::size_t>(w.extent[d - 1]) * m;
  const std::size_t total = static_cast<std::size_t>(w.cell_count()) * m;
  std::vector<std::uint8_t> values;
  values.reserve(total);
  while (values.size() < total) {
    const std::string line = next_line(in, "site rows");
    if (line.size() != row) throw IoError("SPIN1: site row has wrong length");
    for (const char c : line) {
      if (c != '0' && c != '1') throw IoError("SPIN1: site values must be '0' or '1'");
      values.push_back(static_cast<std::uint8_t>(c - '0'));
    }
  }
  std::string rest;
  while (std::getline(in, rest)) {
    if (!rest.empty() && rest != "\r") throw IoError("SPIN1: trailing data after the last site row");
  }
  try {
    return SpinField(PeriodicLattice(d, std::move(offsets)), eps, w, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("SPIN1: ") + e.what());
  }
}

SpinField read_spin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_spin(in);
}

}  // namespace latgamma
