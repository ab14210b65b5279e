#include "ratelqg/model_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "ratelqg/errors.hpp"

namespace rlqg {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

namespace {

struct Section {
  int line = 0;  // header line, for diagnostics
  std::vector<std::vector<double>> rows;
};

bool is_word(const std::string& tok) {
  for (const char c : tok)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      return false;
  return !tok.empty() &&
         !std::isdigit(static_cast<unsigned char>(tok.front())) &&
         tok.front() != '-' && tok.front() != '+' && tok.front() != '.';
}

double parse_number(const std::string& tok, int line) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("invalid number '" + tok + "'", line);
  return v;
}

std::map<std::string, Section> split_sections(
    const std::string& text, const std::vector<std::string>& names) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;

    if (toks.size() == 1 && is_word(toks.front())) {
      const std::string& name = toks.front();
      bool known = false;
      for (const std::string& cand : names) known = known || cand == name;
      if (!known) throw ParseError("unknown section '" + name + "'", line_no);
      if (out.count(name))
        throw ParseError("duplicate section " + name, line_no);
      out[name].line = line_no;
      current = name;
      continue;
    }
    if (current.empty())
      throw ParseError("data before any section header", line_no);

    std::vector<double> row;
    row.reserve(toks.size());
    for (const std::string& t : toks) row.push_back(parse_number(t, line_no));
    Section& sec = out[current];
    if (!sec.rows.empty() && sec.rows.front().size() != row.size())
      throw ParseError("row has " + std::to_string(row.size()) +
                           " entries, expected " +
                           std::to_string(sec.rows.front().size()),
                       line_no);
    sec.rows.push_back(std::move(row));
  }

  for (const std::string& name : names)
    if (!out.count(name) || out[name].rows.empty())
      throw ParseError("missing section " + name, 0);
  return out;
}

Mat to_matrix(const Section& sec) {
  const int rows = static_cast<int>(sec.rows.size());
  const int cols = static_cast<int>(sec.rows.front().size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = sec.rows[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(j)];
  return m;
}

Vec to_vector(const Section& sec, const std::string& name) {
  const Mat m = to_matrix(sec);
  if (m.rows() != 1 && m.cols() != 1)
    throw ParseError("section " + name + " must be a single row or column",
                     sec.line);
  return m.rows() == 1 ? Vec(m.row(0).transpose()) : Vec(m.col(0));
}

void require_shape(const Mat& m, int rows, int cols, const std::string& name,
                   int line) {
  if (m.rows() != rows || m.cols() != cols)
    throw ParseError("section " + name + " must be " + std::to_string(rows) +
                         "x" + std::to_string(cols) + ", got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()),
                     line);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void append_matrix(std::ostringstream& out, const std::string& name,
                   const Mat& m) {
  out << name << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << fmt_double(m(i, j));
    }
    out << "\n";
  }
}

}  // namespace

PlantModel parse_model_text(const std::string& text) {
  const auto secs = split_sections(text, {"A", "B", "W", "Q", "R", "P0"});
  PlantModel model;
  model.A = to_matrix(secs.at("A"));
  const int n = static_cast<int>(model.A.rows());
  require_shape(model.A, n, n, "A", secs.at("A").line);
  model.B = to_matrix(secs.at("B"));
  if (model.B.rows() != n)
    throw ParseError("section B must have " + std::to_string(n) + " rows",
                     secs.at("B").line);
  const int m = static_cast<int>(model.B.cols());
  model.W = to_matrix(secs.at("W"));
  require_shape(model.W, n, n, "W", secs.at("W").line);
  model.Q = to_matrix(secs.at("Q"));
  require_shape(model.Q, n, n, "Q", secs.at("Q").line);
  model.R = to_matrix(secs.at("R"));
  require_shape(model.R, m, m, "R", secs.at("R").line);
  model.P_prior = to_matrix(secs.at("P0"));
  require_shape(model.P_prior, n, n, "P0", secs.at("P0").line);
  return model;
}

PlantModel parse_model(const std::string& path) {
  return parse_model_text(read_file(path));
}

std::string format_model(const PlantModel& model) {
  std::ostringstream out;
  append_matrix(out, "A", model.A);
  append_matrix(out, "B", model.B);
  append_matrix(out, "W", model.W);
  append_matrix(out, "Q", model.Q);
  append_matrix(out, "R", model.R);
  append_matrix(out, "P0", model.P_prior);
  return out.str();
}

std::string format_design(const LoopSynthesis& syn) {
  if (!syn.transmits)
    throw ZeroRank("format_design: design does not transmit");
  std::ostringstream out;
  append_matrix(out, "C", syn.sensor.C);
  append_matrix(out, "V", syn.sensor.V_diag.transpose());
  append_matrix(out, "Delta", syn.sensor.Delta.transpose());
  append_matrix(out, "L", syn.kalman.L);
  append_matrix(out, "K", syn.cert.K);
  return out.str();
}

void write_design(const std::string& path, const LoopSynthesis& syn) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing", 0);
  out << format_design(syn);
}

DesignFile parse_design_text(const std::string& text) {
  const auto secs = split_sections(text, {"C", "V", "Delta", "L", "K"});
  DesignFile d;
  d.C = to_matrix(secs.at("C"));
  const int r = static_cast<int>(d.C.rows());
  const int n = static_cast<int>(d.C.cols());
  d.V_diag = to_vector(secs.at("V"), "V");
  d.Delta = to_vector(secs.at("Delta"), "Delta");
  if (d.V_diag.size() != r)
    throw ParseError("section V must have " + std::to_string(r) + " entries",
                     secs.at("V").line);
  if (d.Delta.size() != r)
    throw ParseError("section Delta must have " + std::to_string(r) +
                         " entries",
                     secs.at("Delta").line);
  d.L = to_matrix(secs.at("L"));
  require_shape(d.L, n, r, "L", secs.at("L").line);
  d.K = to_matrix(secs.at("K"));
  if (d.K.cols() != n)
    throw ParseError("section K must have " + std::to_string(n) + " columns",
                     secs.at("K").line);
  return d;
}

DesignFile parse_design(const std::string& path) {
  return parse_design_text(read_file(path));
}

}  // namespace rlqg
