#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pseudorot/core/csv.hpp"
#include "pseudorot/floer/grid.hpp"

namespace pseudorot {

inline std::string solution_csv(const FloerSolution& sol) {
  csv::Writer w({"s", "t", "re_z", "im_z"});
  for (int i = 0; i <= sol.grid.Ns; ++i)
    for (int k = 0; k < sol.grid.Nt; ++k)
      w.row({csv::format_double(sol.grid.s(i)), csv::format_double(sol.grid.t(k)),
             csv::format_double(sol(i, k).real()), csv::format_double(sol(i, k).imag())});
  return w.str();
}

// Binary grid dump, little-endian:
//   char[4] "FLRG", uint32 version = 1, int64 n, float64 S, int32 Ns, int32 Nt,
//   then (Ns+1)·Nt pairs (re, im) of float64, row-major in (s, t).
namespace grid_dump {

inline constexpr char kMagic[4] = {'F', 'L', 'R', 'G'};
inline constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "grid dump assumes a little-endian host");
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw InvalidArgument("truncated grid dump");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace grid_dump

inline std::string encode_grid_dump(const FloerSolution& sol) {
  using namespace grid_dump;
  std::string out(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::int64_t>(sol.grid.n));
  put(out, sol.grid.S);
  put(out, static_cast<std::int32_t>(sol.grid.Ns));
  put(out, static_cast<std::int32_t>(sol.grid.Nt));
  for (const cplx& c : sol.z) {
    put(out, c.real());
    put(out, c.imag());
  }
  return out;
}

// Restores the grid and field; boundary angles are unwrapped along t and the degree is
// read from the winding.
inline FloerSolution decode_grid_dump(const std::string& in) {
  using namespace grid_dump;
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0) throw InvalidArgument("not a grid dump");
  std::size_t pos = 4;
  if (get<std::uint32_t>(in, pos) != kVersion) throw InvalidArgument("unsupported grid dump version");
  FloerSolution sol;
  sol.grid.n = static_cast<long>(get<std::int64_t>(in, pos));
  sol.grid.S = get<double>(in, pos);
  sol.grid.Ns = get<std::int32_t>(in, pos);
  sol.grid.Nt = get<std::int32_t>(in, pos);
  sol.grid.validate();
  sol.z.resize(sol.grid.nodes());
  for (auto& c : sol.z) {
    const double re = get<double>(in, pos);
    c = cplx(re, get<double>(in, pos));
  }
  if (pos != in.size()) throw InvalidArgument("trailing bytes in grid dump");
  sol.theta.resize(static_cast<std::size_t>(sol.grid.Nt));
  double th = std::arg(sol(0, 0));
  sol.theta[0] = th;
  for (int k = 1; k < sol.grid.Nt; ++k) {
    th += std::arg(sol(0, k) / sol(0, k - 1));
    sol.theta[static_cast<std::size_t>(k)] = th;
  }
  sol.degree = boundary_winding(sol);
  sol.tail_level = max_abs_z_row(sol, sol.grid.Ns);
  return sol;
}

inline void save_grid_dump(const FloerSolution& sol, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path);
  const std::string b = encode_grid_dump(sol);
  f.write(b.data(), static_cast<std::streamsize>(b.size()));
}

inline FloerSolution load_grid_dump(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path);
  std::string b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_grid_dump(b);
}

}  // namespace pseudorot
