#include "combi/counting.hpp"

#include "combi/error.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace combi {

namespace {

const char* const kFamilyNames[] = {
    "multiclass",  "multilabel",          "ell_subsets", "ordinal",
    "poset_regression", "hierarchy",      "permutations", "partial_tournaments",
    "cliques",     "undirected_cycles",   "directed_cycles", "subtrees",
    "posets"};

std::string str(const char* a, long x) {
  std::ostringstream os;
  os << a << x;
  return os.str();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

void member(bool ok, const std::string& msg) {
  if (!ok) throw MembershipError(msg);
}

// set payload ordering by the integer whose bit i is entry i
bool mask_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

// subsets of [n] of size >= 3 in increasing mask order
template <class F>
void for_each_cycle_vertex_set(int n, F&& f) {
  std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (__builtin_popcountll(mask) < 3) continue;
    std::vector<int> vs;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1) vs.push_back(v);
    f(vs);
  }
}

std::vector<BigInt> zeros(std::size_t n) { return std::vector<BigInt>(n, BigInt(0)); }

// number of rooted subtrees containing the ancestor-closed set A
BigInt containing(const Tree& t, const std::vector<BigInt>& f, const std::vector<std::uint8_t>& in) {
  BigInt r = 1;
  for (int v = 0; v < t.size(); ++v) {
    if (!in[v]) continue;
    for (int c : t.children[v])
      if (!in[c]) r *= f[c];
  }
  return r;
}

bool succeq(const StructureSpace& s, int k, int i) {
  if (k == i) return true;
  if (s.family() == Family::poset_regression) return s.order().gt(k, i);
  // hierarchy: k below i, i.e. i is a proper ancestor of k
  for (int a = s.tree().parent[k]; a >= 0; a = s.tree().parent[a])
    if (a == i) return true;
  return false;
}

}  // namespace

std::string family_name(Family f) { return kFamilyNames[static_cast<int>(f)]; }

Family parse_family(const std::string& name) {
  for (int i = 0; i < 13; ++i)
    if (name == kFamilyNames[i]) return static_cast<Family>(i);
  throw ValidationError("unknown structure family '" + name + "'");
}

std::pair<int, int> pair_at(int index, int n) {
  int u = 0;
  while (index >= n - u - 1) {
    index -= n - u - 1;
    ++u;
  }
  return {u, u + 1 + index};
}

Tree Tree::from_parents(std::vector<int> parent) {
  Tree t;
  int n = static_cast<int>(parent.size());
  require(n >= 1, "tree has no vertices");
  t.children.assign(n, {});
  for (int v = 0; v < n; ++v) {
    int p = parent[v];
    if (p == -1) {
      require(t.root == -1, str("malformed tree: second root at vertex ", v));
      t.root = v;
    } else {
      require(p >= 0 && p < n, str("malformed tree: parent out of range at vertex ", v));
      require(p != v, str("malformed tree: self loop at vertex ", v));
      t.children[p].push_back(v);
    }
  }
  require(t.root != -1, "malformed tree: no root (cycle in parent array)");
  // every vertex must reach the root
  std::vector<int> state(n, 0);
  state[t.root] = 2;
  for (int v = 0; v < n; ++v) {
    std::vector<int> path;
    int u = v;
    while (state[u] == 0) {
      state[u] = 1;
      path.push_back(u);
      u = parent[u];
    }
    require(state[u] == 2, str("malformed tree: cycle detected through vertex ", u));
    for (int x : path) state[x] = 2;
  }
  t.parent = std::move(parent);
  return t;
}

std::vector<int> Tree::path_to(int v) const {
  std::vector<int> p;
  for (int u = v; u >= 0; u = parent[u]) p.push_back(u);
  std::reverse(p.begin(), p.end());
  return p;
}

std::vector<int> Tree::preorder() const {
  std::vector<int> order, stack{root};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (auto it = children[v].rbegin(); it != children[v].rend(); ++it) stack.push_back(*it);
  }
  return order;
}

Poset Poset::closure_of(int n, const std::vector<std::pair<int, int>>& edges) {
  require(n >= 1, "poset needs at least one element");
  Poset p;
  p.n = n;
  p.rel.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [a, b] : edges) {
    require(a >= 0 && a < n && b >= 0 && b < n, "poset edge out of range");
    p.rel[static_cast<std::size_t>(a) * n + b] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (p.gt(i, k))
        for (int j = 0; j < n; ++j)
          if (p.gt(k, j)) p.rel[static_cast<std::size_t>(i) * n + j] = 1;
  for (int i = 0; i < n; ++i) require(!p.gt(i, i), str("poset relation has a cycle through ", i));
  return p;
}

Poset Poset::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  require(n >= 1, "poset needs at least one element");
  Poset p;
  p.n = n;
  p.rel.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [a, b] : edges) {
    require(a >= 0 && a < n && b >= 0 && b < n, "poset edge out of range");
    require(a != b, str("poset relation is reflexive at ", a));
    p.rel[static_cast<std::size_t>(a) * n + b] = 1;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (!p.gt(a, b)) continue;
      require(!p.gt(b, a), "poset relation is cyclic between " + std::to_string(a) + " and " +
                               std::to_string(b));
      for (int c = 0; c < n; ++c)
        require(!p.gt(b, c) || p.gt(a, c),
                "poset relation is not transitively closed: " + std::to_string(a) + ">" +
                    std::to_string(b) + ">" + std::to_string(c));
    }
  return p;
}

Poset Poset::dual() const {
  Poset d;
  d.n = n;
  d.rel.assign(rel.size(), 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) d.rel[static_cast<std::size_t>(b) * n + a] = gt(a, b);
  return d;
}

std::vector<std::pair<int, int>> Poset::edges() const {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (gt(a, b)) e.emplace_back(a, b);
  return e;
}

int Poset::relation_size() const { return static_cast<int>(std::count(rel.begin(), rel.end(), 1)); }

StructureSpace StructureSpace::multiclass(int d) {
  require(d >= 1, "multiclass needs d >= 1");
  StructureSpace s;
  s.family_ = Family::multiclass;
  s.n_ = d;
  return s;
}

StructureSpace StructureSpace::multilabel(int d) {
  require(d >= 1, "multilabel needs d >= 1");
  StructureSpace s;
  s.family_ = Family::multilabel;
  s.n_ = d;
  return s;
}

StructureSpace StructureSpace::ell_subsets(int d, int ell) {
  require(d >= 1, "ell_subsets needs d >= 1");
  require(ell >= 0 && ell <= d, "ell_subsets needs 0 <= l <= d");
  StructureSpace s;
  s.family_ = Family::ell_subsets;
  s.n_ = d;
  s.ell_ = ell;
  return s;
}

StructureSpace StructureSpace::ordinal(int d) {
  require(d >= 1, "ordinal needs d >= 1");
  StructureSpace s;
  s.family_ = Family::ordinal;
  s.n_ = d;
  return s;
}

StructureSpace StructureSpace::poset_regression(Poset order) {
  require(order.n >= 1, "poset_regression needs a nonempty poset");
  StructureSpace s;
  s.family_ = Family::poset_regression;
  s.n_ = order.n;
  s.order_ = std::move(order);
  return s;
}

StructureSpace StructureSpace::hierarchy(Tree tree) {
  StructureSpace s;
  s.family_ = Family::hierarchy;
  s.n_ = tree.size();
  s.tree_ = std::move(tree);
  return s;
}

StructureSpace StructureSpace::permutations(int d) {
  require(d >= 1, "permutations needs d >= 1");
  StructureSpace s;
  s.family_ = Family::permutations;
  s.n_ = d;
  return s;
}

StructureSpace StructureSpace::partial_tournaments(int n) {
  require(n >= 1, "partial_tournaments needs N >= 1");
  StructureSpace s;
  s.family_ = Family::partial_tournaments;
  s.n_ = n;
  return s;
}

StructureSpace StructureSpace::cliques(int n) {
  require(n >= 2, "cliques needs N >= 2");
  StructureSpace s;
  s.family_ = Family::cliques;
  s.n_ = n;
  return s;
}

StructureSpace StructureSpace::undirected_cycles(int n) {
  require(n >= 3, "undirected_cycles needs N >= 3");
  StructureSpace s;
  s.family_ = Family::undirected_cycles;
  s.n_ = n;
  return s;
}

StructureSpace StructureSpace::directed_cycles(int n) {
  require(n >= 3, "directed_cycles needs N >= 3");
  StructureSpace s;
  s.family_ = Family::directed_cycles;
  s.n_ = n;
  return s;
}

StructureSpace StructureSpace::subtrees(Tree tree) {
  StructureSpace s;
  s.family_ = Family::subtrees;
  s.n_ = tree.size();
  s.tree_ = std::move(tree);
  return s;
}

StructureSpace StructureSpace::posets(int n) {
  require(n >= 1, "posets needs N >= 1");
  StructureSpace s;
  s.family_ = Family::posets;
  s.n_ = n;
  return s;
}

int StructureSpace::dim() const {
  switch (family_) {
    case Family::permutations:
    case Family::partial_tournaments:
    case Family::cliques:
    case Family::undirected_cycles:
    case Family::directed_cycles:
    case Family::posets:
      return pair_count(n_);
    default:
      return n_;
  }
}

bool StructureSpace::indicator_embedding() const {
  switch (family_) {
    case Family::permutations:
    case Family::partial_tournaments:
    case Family::directed_cycles:
    case Family::posets:
      return false;
    default:
      return true;
  }
}

std::string StructureSpace::describe() const {
  std::ostringstream os;
  os << family_name(family_);
  switch (family_) {
    case Family::ell_subsets:
      os << ":d=" << n_ << ",l=" << ell_;
      break;
    case Family::multiclass:
    case Family::multilabel:
    case Family::ordinal:
    case Family::permutations:
      os << ":d=" << n_;
      break;
    default:
      os << ":n=" << n_;
  }
  return os.str();
}

EmbeddingStats EmbeddingStats::from_exact(BigInt count, std::vector<BigInt> psi,
                                          std::vector<BigInt> cov) {
  EmbeddingStats s;
  int d = static_cast<int>(psi.size());
  s.count = std::move(count);
  s.psi.resize(d);
  s.C.resize(d, d);
  for (int i = 0; i < d; ++i) s.psi[i] = to_double(psi[i]);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s.C(i, j) = to_double(cov[static_cast<std::size_t>(i) * d + j]);
  s.psi_exact = std::move(psi);
  s.cov_exact = std::move(cov);
  return s;
}

std::vector<BigInt> count_subtrees(const Tree& tree) {
  std::vector<BigInt> f(tree.size());
  auto order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    BigInt prod = 1;
    for (int c : tree.children[*it]) prod *= f[c];
    f[*it] = 1 + prod;
  }
  return f;
}

namespace {

BigInt cycle_sum(int n, int from, int shift_n, int shift_i, long mult_off) {
  // sum_{i=from}^{n} C(n - shift_n, i - shift_i) * (i - shift_i + mult_off)!
  BigInt s = 0;
  for (int i = from; i <= n; ++i)
    s += binomial(n - shift_n, i - shift_i) * factorial(i - shift_i + mult_off);
  return s;
}

[[noreturn]] void no_closed_form(const StructureSpace& s) {
  throw NoClosedFormError("no closed form for " + family_name(s.family()) +
                          " statistics; general posets have no known exact C, use the "
                          "partial_tournaments relaxation");
}

}  // namespace

BigInt cardinality(const StructureSpace& s) {
  int n = s.size();
  switch (s.family()) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      return n;
    case Family::multilabel:
    case Family::cliques:
      return pow_int(2, n);
    case Family::ell_subsets:
      return binomial(n, s.ell());
    case Family::permutations:
      return factorial(n);
    case Family::partial_tournaments:
      return pow_int(3, pair_count(n));
    case Family::undirected_cycles: {
      BigInt c = 0;
      for (int i = 3; i <= n; ++i) c += binomial(n, i) * factorial(i - 1) / 2;
      return c;
    }
    case Family::directed_cycles: {
      BigInt c = 0;
      for (int i = 3; i <= n; ++i) c += binomial(n, i) * factorial(i - 1);
      return c;
    }
    case Family::subtrees:
      return count_subtrees(s.tree())[s.tree().root];
    case Family::posets:
      no_closed_form(s);
  }
  no_closed_form(s);
}

std::vector<BigInt> psi_sum_exact(const StructureSpace& s) {
  int n = s.size();
  int d = s.dim();
  auto psi = zeros(d);
  switch (s.family()) {
    case Family::multiclass:
      std::fill(psi.begin(), psi.end(), BigInt(1));
      break;
    case Family::multilabel:
      std::fill(psi.begin(), psi.end(), pow_int(2, n - 1));
      break;
    case Family::ell_subsets:
      std::fill(psi.begin(), psi.end(), binomial(n - 1, s.ell() - 1));
      break;
    case Family::ordinal:
      for (int i = 0; i < d; ++i) psi[i] = n - i;
      break;
    case Family::poset_regression:
    case Family::hierarchy:
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          if (succeq(s, k, i)) psi[i] += 1;
      break;
    case Family::permutations:
    case Family::partial_tournaments:
    case Family::directed_cycles:
      break;
    case Family::cliques:
      std::fill(psi.begin(), psi.end(), pow_int(2, n - 2));
      break;
    case Family::undirected_cycles:
      std::fill(psi.begin(), psi.end(), cycle_sum(n, 3, 2, 2, 0));
      break;
    case Family::subtrees: {
      const Tree& t = s.tree();
      auto f = count_subtrees(t);
      for (int v = 0; v < d; ++v) {
        std::vector<std::uint8_t> in(d, 0);
        for (int u : t.path_to(v)) in[u] = 1;
        psi[v] = containing(t, f, in);
      }
      break;
    }
    case Family::posets:
      no_closed_form(s);
  }
  return psi;
}

std::vector<BigInt> psi_cov_exact(const StructureSpace& s) {
  int n = s.size();
  int d = s.dim();
  auto C = zeros(static_cast<std::size_t>(d) * d);
  auto at = [&](int i, int j) -> BigInt& { return C[static_cast<std::size_t>(i) * d + j]; };
  switch (s.family()) {
    case Family::multiclass:
      for (int i = 0; i < d; ++i) at(i, i) = 1;
      break;
    case Family::multilabel:
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) at(i, j) = i == j ? pow_int(2, n - 1) : pow_int(2, n - 2);
      break;
    case Family::ell_subsets:
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          at(i, j) = i == j ? binomial(n - 1, s.ell() - 1) : binomial(n - 2, s.ell() - 2);
      break;
    case Family::ordinal:
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) at(i, j) = n - std::max(i, j);
      break;
    case Family::poset_regression:
    case Family::hierarchy:
      for (int k = 0; k < d; ++k) {
        std::vector<int> up;
        for (int i = 0; i < d; ++i)
          if (succeq(s, k, i)) up.push_back(i);
        for (int i : up)
          for (int j : up) at(i, j) += 1;
      }
      break;
    case Family::permutations: {
      BigInt full = factorial(n);
      BigInt third = full / 3;
      for (int e = 0; e < d; ++e) {
        auto [a, b] = pair_at(e, n);
        at(e, e) = full;
        for (int g = 0; g < d; ++g) {
          if (g == e) continue;
          auto [c, x] = pair_at(g, n);
          int shared = a == c || a == x ? a : (b == c || b == x ? b : -1);
          if (shared < 0) continue;
          int sign_e = shared == a ? 1 : -1;  // shared vertex is the smaller element of e
          int sign_g = shared == c ? 1 : -1;
          at(e, g) = sign_e * sign_g * third;
        }
      }
      break;
    }
    case Family::partial_tournaments: {
      BigInt diag = 2 * pow_int(3, d - 1);
      for (int e = 0; e < d; ++e) at(e, e) = diag;
      break;
    }
    case Family::cliques:
      for (int e = 0; e < d; ++e) {
        auto [a, b] = pair_at(e, n);
        for (int g = 0; g < d; ++g) {
          auto [c, x] = pair_at(g, n);
          int uni = 2 + (c != a && c != b) + (x != a && x != b);
          at(e, g) = pow_int(2, n - uni);
        }
      }
      break;
    case Family::undirected_cycles: {
      BigInt diag = cycle_sum(n, 3, 2, 2, 0);
      BigInt share = cycle_sum(n, 3, 3, 3, 0);
      BigInt disjoint = 2 * cycle_sum(n, 4, 4, 4, 1);
      for (int e = 0; e < d; ++e) {
        auto [a, b] = pair_at(e, n);
        for (int g = 0; g < d; ++g) {
          auto [c, x] = pair_at(g, n);
          int common = (c == a || c == b) + (x == a || x == b);
          at(e, g) = common == 2 ? diag : (common == 1 ? share : disjoint);
        }
      }
      break;
    }
    case Family::directed_cycles: {
      BigInt diag = 2 * cycle_sum(n, 3, 2, 2, 0);
      BigInt share = 2 * cycle_sum(n, 3, 3, 3, 0);
      for (int e = 0; e < d; ++e) {
        auto [a, b] = pair_at(e, n);
        at(e, e) = diag;
        for (int g = 0; g < d; ++g) {
          if (g == e) continue;
          auto [c, x] = pair_at(g, n);
          int s0 = a == c || a == x ? a : (b == c || b == x ? b : -1);
          if (s0 < 0) continue;
          int t = s0 == a ? b : a;
          int t2 = s0 == c ? x : c;
          int sign = ((t < s0) ? 1 : -1) * ((s0 < t2) ? 1 : -1);
          at(e, g) = sign * share;
        }
      }
      break;
    }
    case Family::subtrees: {
      const Tree& t = s.tree();
      auto f = count_subtrees(t);
      for (int u = 0; u < d; ++u) {
        std::vector<std::uint8_t> base(d, 0);
        for (int a : t.path_to(u)) base[a] = 1;
        for (int v = u; v < d; ++v) {
          auto in = base;
          for (int a : t.path_to(v)) in[a] = 1;
          at(u, v) = at(v, u) = containing(t, f, in);
        }
      }
      break;
    }
    case Family::posets:
      no_closed_form(s);
  }
  return C;
}

Eigen::VectorXd psi_sum(const StructureSpace& s) {
  auto p = psi_sum_exact(s);
  Eigen::VectorXd v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = to_double(p[i]);
  return v;
}

Eigen::MatrixXd psi_cov(const StructureSpace& s) {
  auto c = psi_cov_exact(s);
  int d = s.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = to_double(c[static_cast<std::size_t>(i) * d + j]);
  return m;
}

EmbeddingStats exact_stats(const StructureSpace& s) {
  return EmbeddingStats::from_exact(cardinality(s), psi_sum_exact(s), psi_cov_exact(s));
}

void check_membership(const StructureSpace& s, const Structure& y) {
  int n = s.size();
  const auto& v = y.data;
  member(y.family == s.family(), "structure family " + family_name(y.family) +
                                     " does not match space " + family_name(s.family()));
  auto bits = [&](std::size_t len) {
    member(v.size() == len, str("payload length must be ", static_cast<long>(len)));
    for (int b : v) member(b == 0 || b == 1, "set payload entries must be 0 or 1");
  };
  switch (s.family()) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      member(v.size() == 1, "element payload must hold exactly one index");
      member(v[0] >= 0 && v[0] < n, str("element index out of range: ", v[0]));
      return;
    case Family::multilabel:
    case Family::cliques:
      bits(n);
      return;
    case Family::ell_subsets:
      bits(n);
      member(std::accumulate(v.begin(), v.end(), 0) == s.ell(),
             str("subset size must equal l = ", s.ell()));
      return;
    case Family::subtrees: {
      bits(n);
      const Tree& t = s.tree();
      bool any = std::find(v.begin(), v.end(), 1) != v.end();
      if (!any) return;
      member(v[t.root] == 1, "nonempty subtree must contain the root");
      for (int u = 0; u < n; ++u)
        if (v[u] && u != t.root)
          member(v[t.parent[u]] == 1, str("subtree is not connected at vertex ", u));
      return;
    }
    case Family::permutations: {
      member(static_cast<int>(v.size()) == n, str("ranking must list all items: ", n));
      std::vector<int> seen(n, 0);
      for (int x : v) {
        member(x >= 0 && x < n, str("ranking item out of range: ", x));
        member(!seen[x]++, str("ranking repeats item ", x));
      }
      return;
    }
    case Family::partial_tournaments:
    case Family::posets: {
      member(static_cast<int>(v.size()) == pair_count(n),
             str("pair payload length must be ", pair_count(n)));
      for (int x : v) member(x >= -1 && x <= 1, "pair entries must be -1, 0 or +1");
      if (s.family() == Family::posets) {
        auto gt = [&](int a, int b) {
          int e = v[pair_index(a, b, n)];
          return a < b ? e == 1 : e == -1;
        };
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (a != b && gt(a, b))
              for (int c = 0; c < n; ++c)
                if (c != a && c != b && gt(b, c))
                  member(gt(a, c), "relation is not transitive: " + std::to_string(a) + ">" +
                                       std::to_string(b) + ">" + std::to_string(c));
      }
      return;
    }
    case Family::undirected_cycles: {
      bits(pair_count(n));
      std::vector<std::vector<int>> adj(n);
      for (int e = 0; e < pair_count(n); ++e)
        if (v[e]) {
          auto [a, b] = pair_at(e, n);
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
      int on = 0, start = -1;
      for (int u = 0; u < n; ++u) {
        member(adj[u].empty() || adj[u].size() == 2, str("cycle vertex degree must be 2 at ", u));
        if (!adj[u].empty()) {
          ++on;
          if (start < 0) start = u;
        }
      }
      member(on >= 3, "a cycle needs at least 3 vertices");
      int prev = -1, cur = start, len = 0;
      do {
        int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = nxt;
        ++len;
      } while (cur != start && len <= n);
      member(len == on, "edges do not form a single simple cycle");
      return;
    }
    case Family::directed_cycles: {
      member(static_cast<int>(v.size()) == n, str("successor payload length must be ", n));
      std::vector<int> indeg(n, 0);
      int on = 0, start = -1;
      for (int u = 0; u < n; ++u) {
        if (v[u] == -1) continue;
        member(v[u] >= 0 && v[u] < n, str("successor out of range at ", u));
        member(v[u] != u, str("self loop at ", u));
        member(indeg[v[u]]++ == 0, str("vertex has two predecessors: ", v[u]));
        ++on;
        if (start < 0) start = u;
      }
      member(on >= 3, "a cycle needs at least 3 vertices");
      for (int u = 0; u < n; ++u)
        if (v[u] != -1) member(v[v[u]] != -1, str("successor leaves the cycle at ", u));
      int cur = start, len = 0;
      do {
        cur = v[cur];
        ++len;
      } while (cur != start && len <= n);
      member(len == on, "successors do not form a single simple cycle");
      return;
    }
  }
}

bool is_member(const StructureSpace& s, const Structure& y) {
  try {
    check_membership(s, y);
    return true;
  } catch (const MembershipError&) {
    return false;
  }
}

std::vector<int> embed_int(const StructureSpace& s, const Structure& y) {
  check_membership(s, y);
  int n = s.size();
  int d = s.dim();
  std::vector<int> psi(d, 0);
  const auto& v = y.data;
  switch (s.family()) {
    case Family::multiclass:
      psi[v[0]] = 1;
      break;
    case Family::ordinal:
      for (int i = 0; i <= v[0]; ++i) psi[i] = 1;
      break;
    case Family::poset_regression:
    case Family::hierarchy:
      for (int i = 0; i < d; ++i) psi[i] = succeq(s, v[0], i);
      break;
    case Family::multilabel:
    case Family::ell_subsets:
    case Family::cliques:
    case Family::subtrees:
      if (s.family() == Family::cliques) {
        for (int e = 0; e < d; ++e) {
          auto [a, b] = pair_at(e, n);
          psi[e] = v[a] && v[b];
        }
      } else {
        psi = v;
      }
      break;
    case Family::permutations: {
      std::vector<int> pos(n);
      for (int r = 0; r < n; ++r) pos[v[r]] = r;
      for (int e = 0; e < d; ++e) {
        auto [a, b] = pair_at(e, n);
        psi[e] = pos[a] < pos[b] ? 1 : -1;
      }
      break;
    }
    case Family::partial_tournaments:
    case Family::posets:
    case Family::undirected_cycles:
      psi = v;
      break;
    case Family::directed_cycles:
      for (int u = 0; u < n; ++u)
        if (v[u] != -1) psi[pair_index(u, v[u], n)] = u < v[u] ? 1 : -1;
      break;
  }
  return psi;
}

Eigen::VectorXd embed(const StructureSpace& s, const Structure& y) {
  auto p = embed_int(s, y);
  Eigen::VectorXd v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i];
  return v;
}

Structure make_element(Family f, int z) { return Structure{f, {z}}; }

Structure make_set(Family f, int n, const std::vector<int>& members) {
  Structure y{f, std::vector<int>(n, 0)};
  for (int m : members) {
    require(m >= 0 && m < n, str("set member out of range: ", m));
    y.data[m] = 1;
  }
  return y;
}

Structure make_ranking(const std::vector<int>& order) { return Structure{Family::permutations, order}; }

Structure make_dicycle(int n, const std::vector<int>& cycle) {
  Structure y{Family::directed_cycles, std::vector<int>(n, -1)};
  for (std::size_t i = 0; i < cycle.size(); ++i) y.data[cycle[i]] = cycle[(i + 1) % cycle.size()];
  return y;
}

Structure make_ucycle(int n, const std::vector<int>& cycle) {
  Structure y{Family::undirected_cycles, std::vector<int>(pair_count(n), 0)};
  for (std::size_t i = 0; i < cycle.size(); ++i)
    y.data[pair_index(cycle[i], cycle[(i + 1) % cycle.size()], n)] = 1;
  return y;
}

Structure reverse_structure(const StructureSpace& s, const Structure& y) {
  Structure r = y;
  switch (s.family()) {
    case Family::permutations:
      std::reverse(r.data.begin(), r.data.end());
      return r;
    case Family::partial_tournaments:
    case Family::posets:
      for (int& x : r.data) x = -x;
      return r;
    case Family::multilabel:
      for (int& x : r.data) x = 1 - x;
      return r;
    case Family::directed_cycles:
      for (int u = 0; u < s.size(); ++u)
        if (y.data[u] != -1) r.data[y.data[u]] = u;
      return r;
    default:
      throw ValidationError("no reversal defined for " + family_name(s.family()));
  }
}

std::vector<Structure> enumerate_small(const StructureSpace& s, std::uint64_t limit) {
  int n = s.size();
  Family f = s.family();
  std::vector<Structure> out;
  if (f == Family::posets) {
    BigInt raw = pow_int(3, pair_count(n));
    if (raw > BigInt(20000000))
      throw TooLargeError("posets space too large to enumerate (3^" +
                          std::to_string(pair_count(n)) + " raw candidates)");
  } else {
    BigInt c = cardinality(s);
    if (c > BigInt(limit))
      throw TooLargeError("space has " + c.str() + " structures, above the enumeration limit " +
                          std::to_string(limit));
  }
  out.reserve(static_cast<std::size_t>(f == Family::posets ? 0 : cardinality(s)));
  switch (f) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      for (int z = 0; z < n; ++z) out.push_back(make_element(f, z));
      break;
    case Family::multilabel:
    case Family::cliques:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        Structure y{f, std::vector<int>(n)};
        for (int i = 0; i < n; ++i) y.data[i] = mask >> i & 1;
        out.push_back(std::move(y));
      }
      break;
    case Family::ell_subsets: {
      int k = s.ell();
      std::vector<int> c(k);
      std::iota(c.begin(), c.end(), 0);
      for (;;) {
        out.push_back(make_set(f, n, c));
        int j = 0;
        while (j < k && c[j] + 1 == (j + 1 < k ? c[j + 1] : n)) ++j;
        if (j == k) break;
        ++c[j];
        for (int i = 0; i < j; ++i) c[i] = i;
      }
      break;
    }
    case Family::subtrees: {
      const Tree& t = s.tree();
      auto order = t.preorder();
      std::vector<int> cur(n, 0);
      auto rec = [&](auto&& self, std::size_t idx) -> void {
        if (idx == order.size()) {
          out.push_back(Structure{f, cur});
          return;
        }
        int v = order[idx];
        bool can = v == t.root || cur[t.parent[v]];
        cur[v] = 0;
        self(self, idx + 1);
        if (can) {
          cur[v] = 1;
          self(self, idx + 1);
          cur[v] = 0;
        }
      };
      rec(rec, 0);
      std::sort(out.begin(), out.end(),
                [](const Structure& a, const Structure& b) { return mask_less(a.data, b.data); });
      break;
    }
    case Family::permutations: {
      std::vector<int> p(n);
      std::iota(p.begin(), p.end(), 0);
      do out.push_back(make_ranking(p));
      while (std::next_permutation(p.begin(), p.end()));
      break;
    }
    case Family::partial_tournaments:
    case Family::posets: {
      int d = pair_count(n);
      std::vector<int> digit(d, 0);
      static const int kVal[3] = {0, 1, -1};
      for (;;) {
        Structure y{f, std::vector<int>(d)};
        for (int e = 0; e < d; ++e) y.data[e] = kVal[digit[e]];
        if (f == Family::partial_tournaments || is_member(s, y)) {
          out.push_back(std::move(y));
          if (out.size() > limit)
            throw TooLargeError("posets space has more than " + std::to_string(limit) +
                                " structures");
        }
        int e = 0;
        while (e < d && digit[e] == 2) digit[e++] = 0;
        if (e == d) break;
        ++digit[e];
      }
      break;
    }
    case Family::undirected_cycles:
    case Family::directed_cycles:
      for_each_cycle_vertex_set(n, [&](const std::vector<int>& vs) {
        std::vector<int> rest(vs.begin() + 1, vs.end());
        do {
          if (f == Family::undirected_cycles && rest.front() > rest.back()) continue;
          std::vector<int> cyc{vs[0]};
          cyc.insert(cyc.end(), rest.begin(), rest.end());
          out.push_back(f == Family::directed_cycles ? make_dicycle(n, cyc) : make_ucycle(n, cyc));
        } while (std::next_permutation(rest.begin(), rest.end()));
      });
      break;
  }
  return out;
}

namespace {

EmbeddingStats finish_stats(int d, std::size_t count, const std::vector<long long>& ps,
                            const std::vector<long long>& cs) {
  std::vector<BigInt> psi(d), cov(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) psi[i] = ps[i];
  for (std::size_t i = 0; i < cov.size(); ++i) cov[i] = cs[i];
  return EmbeddingStats::from_exact(BigInt(count), std::move(psi), std::move(cov));
}

void accumulate(const std::vector<int>& psi, std::vector<long long>& ps, std::vector<long long>& cs,
                std::vector<int>& nz) {
  int d = static_cast<int>(psi.size());
  nz.clear();
  for (int i = 0; i < d; ++i)
    if (psi[i]) {
      nz.push_back(i);
      ps[i] += psi[i];
    }
  for (int i : nz)
    for (int j : nz) cs[static_cast<std::size_t>(i) * d + j] += psi[i] * psi[j];
}

}  // namespace

EmbeddingStats enumerated_stats_serial(const StructureSpace& s, const std::vector<Structure>& ys) {
  int d = s.dim();
  std::vector<long long> ps(d, 0), cs(static_cast<std::size_t>(d) * d, 0);
  std::vector<int> nz;
  for (const auto& y : ys) accumulate(embed_int(s, y), ps, cs, nz);
  return finish_stats(d, ys.size(), ps, cs);
}

EmbeddingStats enumerated_stats(const StructureSpace& s, const std::vector<Structure>& ys) {
  int d = s.dim();
  std::vector<long long> ps(d, 0), cs(static_cast<std::size_t>(d) * d, 0);
  long n = static_cast<long>(ys.size());
#pragma omp parallel
  {
    std::vector<long long> lp(d, 0), lc(cs.size(), 0);
    std::vector<int> nz;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) accumulate(embed_int(s, ys[i]), lp, lc, nz);
    // integer sums: merge order cannot change the result
#pragma omp critical
    {
      for (int i = 0; i < d; ++i) ps[i] += lp[i];
      for (std::size_t i = 0; i < cs.size(); ++i) cs[i] += lc[i];
    }
  }
  return finish_stats(d, ys.size(), ps, cs);
}

double poset_kernel(PosetKernel kind, const Poset& a, const Poset& b) {
  require(a.n == b.n, "poset kernel arguments use different alphabets");
  int n = a.n;
  auto edge = [n](const Poset& x, const Poset& y) {
    long c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c += x.gt(i, j) && y.gt(i, j);
    return static_cast<double>(c);
  };
  switch (kind) {
    case PosetKernel::position: {
      double k = 0;
      for (int u = 0; u < n; ++u) {
        long pa = 0, pb = 0;
        for (int v = 0; v < n; ++v) {
          pa += a.gt(v, u);
          pb += b.gt(v, u);
        }
        k += static_cast<double>(pa) * static_cast<double>(pb);
      }
      return k;
    }
    case PosetKernel::edge:
      return edge(a, b);
    case PosetKernel::signed_edge:
      return edge(a, b) - edge(a.dual(), b);
  }
  return 0;
}

}  // namespace combi
