#include "ergostat/measure_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace ergo {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

double parse_double(const std::string& tok, int line, const char* field) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw MeasureParseError(line, std::string("bad ") + field + " value '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok, int line, const char* field) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw MeasureParseError(line, std::string("bad ") + field + " value '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

// reads the next content line, skipping '#' comments
bool next_line(std::istream& is, int& line, std::string& text) {
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text[0] == '#') continue;
    return true;
  }
  return false;
}

std::string expect_kv(std::istream& is, int& line, const std::string& key) {
  std::string text;
  if (!next_line(is, line, text)) throw MeasureParseError(line, "unexpected end of file");
  auto toks = split(text);
  if (toks.size() != 2 || toks[0] != key)
    throw MeasureParseError(line, "expected '" + key + " <value>'");
  return toks[1];
}

}  // namespace

void write_measure(std::ostream& os, const ProbMeasure& mu) {
  os << "ergostat-measure v1\n";
  os << "space " << space_name(mu.space()) << "\n";
  if (mu.repr() == MeasureRepr::Atoms) {
    os << "repr atoms\n";
    os << "count " << mu.size() << "\n";
    bool two_d = mu.space().dimension() == 2;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const Point p = mu.atom_points().col(i);
      os << format_double(p.x());
      if (two_d) os << ' ' << format_double(p.y());
      os << ' ' << format_double(mu.weights()[i]) << "\n";
    }
  } else {
    os << "repr histogram\n";
    os << "resolution " << mu.grid().resolution << "\n";
    Eigen::Index nonzero = (mu.weights().array() != 0.0).count();
    os << "nonzero " << nonzero << "\n";
    for (Eigen::Index b = 0; b < mu.size(); ++b)
      if (mu.weights()[b] != 0.0)
        os << b << ' ' << format_double(mu.weights()[b]) << "\n";
  }
}

ProbMeasure read_measure(std::istream& is) {
  int line = 0;
  std::string text;
  if (!next_line(is, line, text)) throw MeasureParseError(1, "empty file");
  if (text != "ergostat-measure v1")
    throw MeasureParseError(line, "bad magic, expected 'ergostat-measure v1'");

  PhaseSpace space;
  try {
    space = space_from_name(expect_kv(is, line, "space"));
  } catch (const std::invalid_argument& e) {
    throw MeasureParseError(line, e.what());
  }
  std::string repr = expect_kv(is, line, "repr");

  try {
    if (repr == "atoms") {
      long count = parse_long(expect_kv(is, line, "count"), line, "count");
      if (count <= 0) throw MeasureParseError(line, "count must be positive");
      bool two_d = space.dimension() == 2;
      Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, count);
      Eigen::VectorXd w(count);
      for (long i = 0; i < count; ++i) {
        if (!next_line(is, line, text)) throw MeasureParseError(line + 1, "missing atom record");
        auto toks = split(text);
        size_t expected = two_d ? 3 : 2;
        if (toks.size() != expected)
          throw MeasureParseError(line, "expected " + std::to_string(expected) + " fields");
        pts(0, i) = parse_double(toks[0], line, "x");
        if (two_d) pts(1, i) = parse_double(toks[1], line, "y");
        w[i] = parse_double(toks.back(), line, "weight");
        if (w[i] < 0) throw MeasureParseError(line, "negative weight");
      }
      return ProbMeasure::atoms(space, std::move(pts), std::move(w));
    }
    if (repr == "histogram") {
      long res = parse_long(expect_kv(is, line, "resolution"), line, "resolution");
      if (res <= 0 || res > (1 << 16)) throw MeasureParseError(line, "resolution out of range");
      HistogramGrid grid{space, static_cast<int>(res)};
      long nonzero = parse_long(expect_kv(is, line, "nonzero"), line, "nonzero");
      Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.bin_count());
      for (long i = 0; i < nonzero; ++i) {
        if (!next_line(is, line, text)) throw MeasureParseError(line + 1, "missing bin record");
        auto toks = split(text);
        if (toks.size() != 2) throw MeasureParseError(line, "expected 'bin weight'");
        long b = parse_long(toks[0], line, "bin");
        if (b < 0 || b >= grid.bin_count())
          throw MeasureParseError(line, "bin index out of range");
        double v = parse_double(toks[1], line, "weight");
        if (v < 0) throw MeasureParseError(line, "negative bin weight");
        w[b] = v;
      }
      return ProbMeasure::histogram(grid, std::move(w));
    }
  } catch (const std::invalid_argument& e) {
    // Weight-sum / geometry violations from the measure constructor.
    throw MeasureParseError(line, e.what());
  }
  throw MeasureParseError(line, "unknown repr '" + repr + "'");
}

void write_measure_file(const std::string& path, const ProbMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_measure(os, mu);
  if (!os.good()) throw std::runtime_error("write failed: " + path);
}

ProbMeasure read_measure_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_measure(is);
}

}  // namespace ergo
