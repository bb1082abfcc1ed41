#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "waning/continuation.hpp"
#include "waning/errors.hpp"
#include "waning/simulator.hpp"

namespace waning {

/// 12 significant digits, the precision of every numeric output field.
inline std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << content;
  if (!out)
    throw Error("cannot write " + path.string());
}

inline std::string branch_csv(const Branch& b)
{
  std::ostringstream os;
  os << "bar_beta,R0,lambda,S,E,A,I,R_total,N,stability\n";
  for (const auto& pt : b.points) {
    const auto& e = pt.eq;
    os << fmt(pt.bar_beta) << ',' << fmt(pt.r0_value) << ',' << fmt(e.lam) << ',' << fmt(e.S) << ',' << fmt(e.E)
       << ',' << fmt(e.A) << ',' << fmt(e.I) << ',' << fmt(e.R_total) << ',' << fmt(e.N) << ','
       << to_string(pt.stability) << '\n';
  }
  return os.str();
}

inline std::string folds_csv(const Branch& b)
{
  std::ostringstream os;
  os << "R0,lambda,I\n";
  for (const auto& f : b.folds)
    os << fmt(f.r0_value) << ',' << fmt(f.eq.lam) << ',' << fmt(f.eq.I) << '\n';
  return os.str();
}

inline std::string equilibria_csv(const std::vector<Equilibrium>& eqs, double bar_beta, double r0_value)
{
  std::ostringstream os;
  os << "bar_beta,R0,lambda,S,E,A,I,R_total,N\n";
  for (const auto& e : eqs)
    os << fmt(bar_beta) << ',' << fmt(r0_value) << ',' << fmt(e.lam) << ',' << fmt(e.S) << ',' << fmt(e.E) << ','
       << fmt(e.A) << ',' << fmt(e.I) << ',' << fmt(e.R_total) << ',' << fmt(e.N) << '\n';
  return os.str();
}

inline std::string trajectory_csv(const std::vector<SimState>& traj)
{
  std::ostringstream os;
  os << "t,S,E,A,I,R_total,N\n";
  for (const auto& s : traj)
    os << fmt(s.t) << ',' << fmt(s.S) << ',' << fmt(s.E) << ',' << fmt(s.A) << ',' << fmt(s.I) << ','
       << fmt(s.immune()) << ',' << fmt(s.N()) << '\n';
  return os.str();
}

inline std::string bistability_csv(const std::vector<BistabilityOutcome>& rows)
{
  std::ostringstream os;
  os << "I0,t_end,S,E,A,I,limit,distance\n";
  for (const auto& r : rows) {
    const auto& f = r.final_state;
    os << fmt(r.init.I) << ',' << fmt(f.t) << ',' << fmt(f.S) << ',' << fmt(f.E) << ',' << fmt(f.A) << ','
       << fmt(f.I) << ',' << r.label << ',' << fmt(r.distance) << '\n';
  }
  return os.str();
}

}  // namespace waning
