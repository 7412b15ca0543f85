#pragma once
// Brute-force reference: walks every raw payload of a family, keeps those that
// pass a local membership test and sums a locally computed embedding.
// Shares only the space parameters with the library.

#include "combi/counting.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using combi::Family;
using combi::StructureSpace;

struct Aggregate {
  std::int64_t count = 0;
  std::vector<std::int64_t> psi;
  std::vector<std::int64_t> C;  // row-major
  std::set<std::vector<int>> payloads;
};

inline std::vector<std::pair<int, int>> pairs_of(int n) {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) out.emplace_back(u, v);
  return out;
}

inline int pair_pos(int u, int v, int n) {
  auto ps = pairs_of(n);
  for (std::size_t i = 0; i < ps.size(); ++i)
    if ((ps[i].first == u && ps[i].second == v) || (ps[i].first == v && ps[i].second == u)) return static_cast<int>(i);
  return -1;
}

// single directed cycle of length >= 3 over the vertices with succ != -1
inline bool is_dicycle(const std::vector<int>& succ) {
  int n = static_cast<int>(succ.size());
  std::vector<int> on;
  for (int u = 0; u < n; ++u)
    if (succ[u] != -1) on.push_back(u);
  if (on.size() < 3) return false;
  for (int u : on)
    if (succ[u] == u || succ[succ[u]] == -1) return false;
  int cur = on[0], steps = 0;
  do {
    cur = succ[cur];
    ++steps;
  } while (cur != on[0] && steps <= n);
  return cur == on[0] && steps == static_cast<int>(on.size());
}

inline bool is_ucycle(const std::vector<int>& edges, int n) {
  auto ps = pairs_of(n);
  std::vector<std::vector<int>> adj(n);
  int m = 0;
  for (std::size_t e = 0; e < ps.size(); ++e)
    if (edges[e]) {
      adj[ps[e].first].push_back(ps[e].second);
      adj[ps[e].second].push_back(ps[e].first);
      ++m;
    }
  if (m < 3) return false;
  int start = -1, used = 0;
  for (int u = 0; u < n; ++u) {
    if (adj[u].empty()) continue;
    if (adj[u].size() != 2) return false;
    ++used;
    if (start < 0) start = u;
  }
  // connected walk around the cycle
  int prev = -1, cur = start, len = 0;
  do {
    int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
    prev = cur;
    cur = nxt;
    ++len;
  } while (cur != start && len <= n);
  return cur == start && len == used && used == m;
}

inline void add(Aggregate& a, const std::vector<int>& payload, const std::vector<int>& psi) {
  std::size_t d = psi.size();
  if (a.psi.empty()) {
    a.psi.assign(d, 0);
    a.C.assign(d * d, 0);
  }
  ++a.count;
  for (std::size_t i = 0; i < d; ++i) {
    a.psi[i] += psi[i];
    if (!psi[i]) continue;
    for (std::size_t j = 0; j < d; ++j) a.C[i * d + j] += psi[i] * psi[j];
  }
  a.payloads.insert(payload);
}

inline bool reaches(const StructureSpace& s, int z, int i) {
  if (z == i) return true;
  if (s.family() == Family::hierarchy) {
    for (int a = s.tree().parent[z]; a != -1; a = s.tree().parent[a])
      if (a == i) return true;
    return false;
  }
  return s.order().gt(z, i);
}

// Calls visit(payload, psi) for every member of the space.
inline void for_each_member(const StructureSpace& s,
                            const std::function<void(const std::vector<int>&, const std::vector<int>&)>& visit) {
  int n = s.size();
  auto ps = pairs_of(n);
  int np = static_cast<int>(ps.size());
  switch (s.family()) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      for (int z = 0; z < n; ++z) {
        std::vector<int> psi(n, 0);
        for (int i = 0; i < n; ++i) {
          if (s.family() == Family::multiclass) psi[i] = z == i;
          else if (s.family() == Family::ordinal) psi[i] = z >= i;
          else psi[i] = reaches(s, z, i);
        }
        visit({z}, psi);
      }
      return;
    case Family::multilabel:
    case Family::ell_subsets:
    case Family::cliques:
    case Family::subtrees:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<int> bits(n);
        int pop = 0;
        for (int i = 0; i < n; ++i) pop += bits[i] = mask >> i & 1;
        if (s.family() == Family::ell_subsets && pop != s.ell()) continue;
        if (s.family() == Family::subtrees && pop > 0) {
          bool ok = bits[s.tree().root];
          for (int v = 0; v < n && ok; ++v)
            if (bits[v] && v != s.tree().root) ok = bits[s.tree().parent[v]];
          if (!ok) continue;
        }
        if (s.family() == Family::cliques) {
          std::vector<int> psi(np);
          for (int e = 0; e < np; ++e) psi[e] = bits[ps[e].first] && bits[ps[e].second];
          visit(bits, psi);
        } else {
          visit(bits, bits);
        }
      }
      return;
    case Family::permutations: {
      std::vector<int> rank(n);
      for (int i = 0; i < n; ++i) rank[i] = i;
      do {
        std::vector<int> pos(n), psi(np);
        for (int r = 0; r < n; ++r) pos[rank[r]] = r;
        for (int e = 0; e < np; ++e) psi[e] = pos[ps[e].first] < pos[ps[e].second] ? 1 : -1;
        visit(rank, psi);
      } while (std::next_permutation(rank.begin(), rank.end()));
      return;
    }
    case Family::partial_tournaments:
    case Family::posets: {
      std::int64_t total = 1;
      for (int e = 0; e < np; ++e) total *= 3;
      for (std::int64_t code = 0; code < total; ++code) {
        std::vector<int> v(np);
        std::int64_t c = code;
        for (int e = 0; e < np; ++e, c /= 3) v[e] = static_cast<int>(c % 3) == 2 ? -1 : static_cast<int>(c % 3);
        if (s.family() == Family::posets) {
          // strict order: transitive (acyclicity follows from antisymmetric pairs + transitivity)
          auto gt = [&](int a, int b) {
            int e = pair_pos(a, b, n);
            return a < b ? v[e] == 1 : v[e] == -1;
          };
          bool ok = true;
          for (int a = 0; a < n && ok; ++a)
            for (int b = 0; b < n && ok; ++b)
              for (int c2 = 0; c2 < n && ok; ++c2)
                if (a != b && b != c2 && a != c2 && gt(a, b) && gt(b, c2) && !gt(a, c2)) ok = false;
          if (!ok) continue;
        }
        visit(v, v);
      }
      return;
    }
    case Family::undirected_cycles:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << np); ++mask) {
        std::vector<int> e(np);
        for (int i = 0; i < np; ++i) e[i] = mask >> i & 1;
        if (is_ucycle(e, n)) visit(e, e);
      }
      return;
    case Family::directed_cycles: {
      std::vector<int> succ(n, -1);
      std::function<void(int)> rec = [&](int u) {
        if (u == n) {
          if (!is_dicycle(succ)) return;
          std::vector<int> psi(np, 0);
          for (int a = 0; a < n; ++a)
            if (succ[a] != -1) psi[pair_pos(a, succ[a], n)] = a < succ[a] ? 1 : -1;
          visit(succ, psi);
          return;
        }
        for (int v = -1; v < n; ++v) {
          if (v == u) continue;
          succ[u] = v;
          rec(u + 1);
        }
        succ[u] = -1;
      };
      rec(0);
      return;
    }
  }
}

inline Aggregate brute_force(const StructureSpace& s) {
  Aggregate a;
  for_each_member(s, [&](const std::vector<int>& p, const std::vector<int>& psi) { add(a, p, psi); });
  return a;
}

}  // namespace oracle
