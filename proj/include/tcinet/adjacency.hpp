#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcinet/errors.hpp"

namespace tcinet {

using Bit = std::uint8_t;
using BitString = std::vector<Bit>;

/// Number of node pairs d = N(N-1)/2.
constexpr std::size_t num_links(std::size_t n_nodes) { return n_nodes * (n_nodes - 1) / 2; }

/// Inverse of num_links; throws if d is not triangular.
inline std::size_t nodes_for_links(std::size_t d) {
  std::size_t n = 1;
  while (num_links(n) < d) ++n;
  if (num_links(n) != d)
    throw ValidationError("length " + std::to_string(d) + " is not of the form N(N-1)/2");
  return n;
}

/// Position of pair (m, n), 0-based with m < n, in the column-wise packing
/// g12, g13, g23, g14, g24, g34, ...
constexpr std::size_t link_index(std::size_t m, std::size_t n) { return n * (n - 1) / 2 + m; }

inline std::string to_bitstring(std::span<const Bit> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

inline BitString parse_bitstring(std::string_view s) {
  BitString bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw ValidationError("invalid character '" + std::string(1, s[i]) + "' in bit string");
    bits[i] = s[i] == '1';
  }
  return bits;
}

/// Upper triangle of an undirected, unweighted contact network.
class AdjacencyVector {
 public:
  AdjacencyVector() = default;

  explicit AdjacencyVector(BitString bits) : bits_(std::move(bits)), n_nodes_(nodes_for_links(bits_.size())) {
    for (Bit b : bits_)
      if (b > 1) throw ValidationError("adjacency bits must be 0 or 1");
  }

  static AdjacencyVector empty(std::size_t n_nodes) {
    return AdjacencyVector(BitString(num_links(n_nodes), 0));
  }

  /// Path 1-2-...-N.
  static AdjacencyVector chain(std::size_t n_nodes) {
    auto g = empty(n_nodes);
    for (std::size_t n = 1; n < n_nodes; ++n) g.bits_[link_index(n - 1, n)] = 1;
    return g;
  }

  static AdjacencyVector from_string(std::string_view s) { return AdjacencyVector(parse_bitstring(s)); }

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t size() const { return bits_.size(); }
  const BitString& bits() const { return bits_; }
  Bit operator[](std::size_t i) const { return bits_[i]; }

  /// 0-based nodes.
  bool connected(std::size_t m, std::size_t n) const {
    if (m == n) return false;
    return m < n ? bits_[link_index(m, n)] : bits_[link_index(n, m)];
  }

  std::size_t num_edges() const {
    std::size_t c = 0;
    for (Bit b : bits_) c += b;
    return c;
  }

  std::string key() const { return to_bitstring(bits_); }

  friend bool operator==(const AdjacencyVector&, const AdjacencyVector&) = default;

 private:
  BitString bits_;
  std::size_t n_nodes_ = 1;
};

using AdjacencyMatrix = std::vector<std::vector<int>>;

inline AdjacencyVector pack_adjacency(const AdjacencyMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) throw ValidationError("adjacency matrix must have at least one node");
  for (const auto& row : a)
    if (row.size() != n) throw ValidationError("adjacency matrix must be square");
  BitString bits(num_links(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i][i] != 0) throw ValidationError("adjacency matrix must have a zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (a[i][j] != 0 && a[i][j] != 1) throw ValidationError("adjacency matrix must be binary");
      if (a[i][j] != a[j][i]) throw ValidationError("adjacency matrix must be symmetric");
    }
  }
  for (std::size_t col = 1; col < n; ++col)
    for (std::size_t row = 0; row < col; ++row) bits[link_index(row, col)] = static_cast<Bit>(a[row][col]);
  return AdjacencyVector(std::move(bits));
}

inline AdjacencyMatrix unpack_adjacency(const AdjacencyVector& g) {
  const std::size_t n = g.n_nodes();
  AdjacencyMatrix a(n, std::vector<int>(n, 0));
  for (std::size_t col = 1; col < n; ++col)
    for (std::size_t row = 0; row < col; ++row) a[row][col] = a[col][row] = g[link_index(row, col)];
  return a;
}

/// Number of incorrectly inferred links.
inline std::size_t network_error(const AdjacencyVector& g, const AdjacencyVector& g_star) {
  if (g.size() != g_star.size())
    throw ValidationError("network_error: length mismatch " + std::to_string(g.size()) + " vs " +
                          std::to_string(g_star.size()));
  std::size_t e = 0;
  for (std::size_t i = 0; i < g.size(); ++i) e += g[i] != g_star[i];
  return e;
}

// Network file:
//   N <n>
//   m n          (1-based, m < n, one edge per line)
// or a single `bits <01-string>` line. Blank lines and '#' comments are ignored.
inline AdjacencyVector read_network(std::istream& in) {
  std::string line;
  std::size_t n_nodes = 0;
  bool have_n = false;
  BitString bits;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    auto fail = [&](const std::string& msg) {
      throw ValidationError("network file line " + std::to_string(line_no) + ": " + msg);
    };
    if (tok == "bits") {
      std::string s;
      if (!(ls >> s)) fail("missing bit string");
      return AdjacencyVector::from_string(s);
    }
    if (tok == "N") {
      if (have_n) fail("duplicate N line");
      long long v = 0;
      if (!(ls >> v) || v < 1) fail("N must be a positive integer");
      n_nodes = static_cast<std::size_t>(v);
      bits.assign(num_links(n_nodes), 0);
      have_n = true;
      continue;
    }
    if (!have_n) fail("edge before N line");
    long long m = 0, n = 0;
    std::istringstream es(line);
    if (!(es >> m >> n)) fail("expected 'm n'");
    if (m < 1 || n <= m || static_cast<std::size_t>(n) > n_nodes) fail("edge must satisfy 1 <= m < n <= N");
    bits[link_index(static_cast<std::size_t>(m - 1), static_cast<std::size_t>(n - 1))] = 1;
  }
  if (!have_n) throw ValidationError("network file: missing 'N' or 'bits' line");
  return AdjacencyVector(std::move(bits));
}

inline AdjacencyVector read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network file " + path);
  return read_network(in);
}

inline void write_network(std::ostream& out, const AdjacencyVector& g) {
  out << "N " << g.n_nodes() << '\n';
  for (std::size_t col = 1; col < g.n_nodes(); ++col)
    for (std::size_t row = 0; row < col; ++row)
      if (g[link_index(row, col)]) out << row + 1 << ' ' << col + 1 << '\n';
}

}  // namespace tcinet
