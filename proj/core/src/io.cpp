#include "alcontrol/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace alc {

namespace {

void header(std::ostream & os, const std::vector<std::pair<std::string, Eigen::Index>> & groups, bool leading_comma)
{
  bool first = !leading_comma;
  for (const auto & [prefix, count] : groups) {
    for (Eigen::Index i = 0; i < count; ++i) {
      os << (first ? "" : ",") << prefix << '_' << (i + 1);
      first = false;
    }
  }
}

void values(std::ostream & os, const Vec & v)
{
  for (Eigen::Index i = 0; i < v.size(); ++i) { os << ',' << v[i]; }
}

struct Table
{
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<std::size_t> prefixed(const std::string & prefix) const
  {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k].rfind(prefix + "_", 0) == 0) { idx.push_back(k); }
    }
    return idx;
  }

  std::size_t column(const std::string & name) const
  {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) { throw CsvError("missing column '" + name + "'"); }
    return static_cast<std::size_t>(it - columns.begin());
  }

  Vec gather(std::size_t row, const std::vector<std::size_t> & idx) const
  {
    Vec v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) { v[static_cast<Eigen::Index>(k)] = rows[row][idx[k]]; }
    return v;
  }
};

Table parse(std::istream & is)
{
  Table t;
  std::string line;
  if (!std::getline(is, line)) { throw CsvError("empty CSV"); }
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) { t.columns.push_back(cell); }
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) { continue; }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception &) {
        throw CsvError("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) { throw CsvError("line " + std::to_string(lineno) + ": wrong number of fields"); }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.size() < 2) { throw CsvError("CSV needs at least two rows"); }
  return t;
}

TimeGrid grid_of(const std::vector<double> & t)
{
  std::vector<double> bps;
  double step = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1]) { throw CsvError("time column is not ordered"); }
    if (t[i] == t[i - 1]) { bps.push_back(t[i]); }
    step = std::max(step, t[i] - t[i - 1]);
  }
  return TimeGrid(t.front(), t.back(), step, bps);
}

}  // namespace

void write_epath_csv(std::ostream & os, const EPath & p)
{
  os << std::setprecision(17) << "t,";
  header(os, {{"x", static_cast<Eigen::Index>(p.base_dim())}, {"a", static_cast<Eigen::Index>(p.fiber_dim())}}, false);
  os << '\n';
  for (std::size_t i = 0; i < p.size(); ++i) {
    os << p.t[i];
    values(os, p.x[i]);
    values(os, p.a[i]);
    os << '\n';
  }
}

void write_trajectory_csv(std::ostream & os, const Trajectory & traj)
{
  const auto & p = traj.path;
  os << std::setprecision(17) << "t";
  header(os,
         {{"x", p.x.front().size()}, {"a", p.a.front().size()}, {"u", traj.u.front().size()}},
         true);
  os << '\n';
  for (std::size_t i = 0; i < p.size(); ++i) {
    os << p.t[i];
    values(os, p.x[i]);
    values(os, p.a[i]);
    values(os, traj.u[i]);
    os << '\n';
  }
}

void write_costate_csv(std::ostream & os, const CostatePath & c, const std::vector<double> & h)
{
  os << std::setprecision(17) << "t";
  header(os, {{"z", c.z.front().size()}}, true);
  os << ",z0" << (h.empty() ? "" : ",H") << '\n';
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    os << c.t[i];
    values(os, c.z[i]);
    os << ',' << c.z0;
    if (!h.empty()) { os << ',' << h[i]; }
    os << '\n';
  }
}

void write_homotopy_csv(std::ostream & os, const HomotopyField & h)
{
  const auto n = h.x.front().front().size();
  const auto m = h.a.front().front().size();
  os << std::setprecision(17) << "t,eps";
  header(os, {{"x", n}, {"a", m}, {"b", m}}, true);
  os << '\n';
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    for (std::size_t j = 0; j < h.eps.size(); ++j) {
      os << h.t[i] << ',' << h.eps[j];
      values(os, h.x[i][j]);
      values(os, h.a[i][j]);
      values(os, h.b[i][j]);
      os << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream & is)
{
  const Table tab = parse(is);
  const auto tc = tab.column("t");
  const auto xs = tab.prefixed("x");
  const auto as = tab.prefixed("a");
  const auto us = tab.prefixed("u");
  if (as.empty() || us.empty()) { throw CsvError("trajectory CSV needs a_* and u_* columns"); }
  std::vector<double> t;
  Trajectory traj{.path = EPath{.grid = TimeGrid(0.0, 1.0, 1.0), .t = {}, .x = {}, .a = {}}, .u = {}};
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    t.push_back(tab.rows[r][tc]);
    traj.path.x.push_back(tab.gather(r, xs));
    traj.path.a.push_back(tab.gather(r, as));
    traj.u.push_back(tab.gather(r, us));
  }
  traj.path.grid = grid_of(t);
  traj.path.t = std::move(t);
  return traj;
}

CostatePath read_costate_csv(std::istream & is)
{
  const Table tab = parse(is);
  const auto tc = tab.column("t");
  const auto z0c = tab.column("z0");
  const auto zs = tab.prefixed("z");
  if (zs.empty()) { throw CsvError("costate CSV needs z_* columns"); }
  CostatePath c{.grid = TimeGrid(0.0, 1.0, 1.0), .t = {}, .z = {}, .z0 = tab.rows.front()[z0c]};
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    if (tab.rows[r][z0c] != c.z0) { throw CsvError("z0 must be constant"); }
    c.t.push_back(tab.rows[r][tc]);
    c.z.push_back(tab.gather(r, zs));
  }
  c.grid = grid_of(c.t);
  return c;
}

void write_file(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  out << content;
}

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw std::runtime_error("cannot open '" + path + "'"); }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace alc
