#ifndef FUCIK_IO_OUTPUT_HPP
#define FUCIK_IO_OUTPUT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"
#include "fucik/fucik_continuation.hpp"

#ifndef FUCIK_VERSION_STRING
#define FUCIK_VERSION_STRING "v0.0.0-unknown"
#endif

namespace fucik::io {

inline std::string version() { return FUCIK_VERSION_STRING; }

/// Comment line written at the top of every table.
inline std::string provenance(const GalerkinPair& gp)
{
  return "# s=" + fucik::detail::format_double(gp.kernel.order()) +
         " lambda=" + fucik::detail::format_double(gp.kernel.scale()) +
         " kernel=" + to_string(gp.kernel.variant()) +
         " N=" + std::to_string(gp.mesh.elements().size()) + " domain=" + gp.mesh.domain().describe() +
         " version=" + version();
}

using Cell = std::variant<double, long, std::string>;

/// Columnar table written with 17 significant digits.
class Table
{
public:
  explicit Table(std::vector<std::string> columns)
  : columns_(std::move(columns))
  {}

  void add(std::vector<Cell> row)
  {
    if (row.size() != columns_.size())
      throw PreconditionError("Table: row has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  std::string render(const std::string& comment) const
  {
    std::ostringstream os;
    os << comment << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c)
      os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& row : rows_)
    {
      for (std::size_t c = 0; c < row.size(); ++c)
      {
        if (c)
          os << ',';
        if (const auto* d = std::get_if<double>(&row[c]))
          os << fucik::detail::format_double(*d);
        else if (const auto* l = std::get_if<long>(&row[c]))
          os << *l;
        else
          os << std::get<std::string>(row[c]);
      }
      os << '\n';
    }
    return os.str();
  }

  void write(const std::filesystem::path& path, const std::string& comment) const
  {
    write_text(path, render(comment));
  }

  static void write_text(const std::filesystem::path& path, const std::string& text)
  {
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
      throw Error("cannot write " + path.string());
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Reads (p, alpha, beta) rows with p >= 0 from a curve table.
inline std::vector<std::array<double, 3>> read_curve_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw PreconditionError("cannot open curve table " + path.string());
  std::string line;
  std::vector<std::array<double, 3>> rows;
  bool header = false;
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    if (!header)
    {
      if (line.rfind("p,alpha,beta", 0) != 0)
        throw PreconditionError("curve table " + path.string() + " lacks the p,alpha,beta header");
      header = true;
      continue;
    }
    std::array<double, 3> r{};
    std::istringstream ls(line);
    std::string cell;
    for (auto& v : r)
    {
      if (!std::getline(ls, cell, ','))
        throw PreconditionError("curve table " + path.string() + ": short row");
      v = std::stod(cell);
    }
    if (r[0] >= 0.0)
      rows.push_back(r);
  }
  if (rows.empty())
    throw PreconditionError("curve table " + path.string() + " has no rows");
  return rows;
}

/*
 * Static plot of the traced branch and its mirror in the (alpha, beta)
 * plane with the trivial lines, the diagonal and the points (lambda_k, lambda_k).
 */
inline std::string curve_svg(const CurveSample& cs)
{
  const double W = 640, H = 640, pad = 60;
  double lo = cs.lambda1 - 0.1 * (cs.lambda2 - cs.lambda1);
  double hi = cs.lambda2;
  for (const auto& q : cs.branch)
    hi = std::max(hi, q.alpha);
  hi += 0.05 * (hi - lo);
  auto X = [&](double a) { return pad + (a - lo) / (hi - lo) * (W - 2 * pad); };
  auto Y = [&](double b) { return H - pad - (b - lo) / (hi - lo) * (H - 2 * pad); };
  auto f = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3f", v);
    return std::string(b);
  };
  auto polyline = [&](const std::vector<FucikPoint>& pts, const std::string& style) {
    std::string s = "<polyline fill=\"none\" " + style + " points=\"";
    for (const auto& q : pts)
      s += f(X(q.alpha)) + "," + f(Y(q.beta)) + " ";
    return s + "\"/>\n";
  };
  auto line = [&](double a0, double b0, double a1, double b1, const std::string& style) {
    return "<line x1=\"" + f(X(a0)) + "\" y1=\"" + f(Y(b0)) + "\" x2=\"" + f(X(a1)) + "\" y2=\"" + f(Y(b1)) +
           "\" " + style + "/>\n";
  };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
  s += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  s += line(lo, lo, hi, lo, "stroke=\"black\"");
  s += line(lo, lo, lo, hi, "stroke=\"black\"");
  for (int k = 0; k <= 4; ++k)
  {
    const double v = lo + (hi - lo) * k / 4.0;
    s += "<text x=\"" + f(X(v)) + "\" y=\"" + f(H - pad + 18) + "\" font-size=\"11\" text-anchor=\"middle\">" +
         f(v) + "</text>\n";
    s += "<text x=\"" + f(pad - 6) + "\" y=\"" + f(Y(v) + 4) + "\" font-size=\"11\" text-anchor=\"end\">" + f(v) +
         "</text>\n";
  }
  s += "<text x=\"320\" y=\"" + f(H - 15) + "\" font-size=\"13\" text-anchor=\"middle\">alpha</text>\n";
  s += "<text x=\"15\" y=\"320\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 320)\">beta</text>\n";
  s += line(lo, lo, hi, hi, "stroke=\"gray\" stroke-dasharray=\"2,3\"");
  s += line(cs.lambda1, lo, cs.lambda1, hi, "stroke=\"gray\" stroke-dasharray=\"8,4\"");
  s += line(lo, cs.lambda1, hi, cs.lambda1, "stroke=\"gray\" stroke-dasharray=\"8,4\"");
  s += polyline(cs.branch, "stroke=\"#1f4e9c\" stroke-width=\"2\"");
  s += polyline(cs.mirror, "stroke=\"#b23a48\" stroke-width=\"2\"");
  for (double l : {cs.lambda1, cs.lambda2})
    s += "<circle cx=\"" + f(X(l)) + "\" cy=\"" + f(Y(l)) + "\" r=\"4\" fill=\"black\"/>\n";
  s += "</svg>\n";
  return s;
}

} // namespace fucik::io

#endif
