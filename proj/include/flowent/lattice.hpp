#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowent/topflow.hpp"

namespace flowent {

/// A finite modular lattice of subspaces of K^d, closed under sum and
/// intersection. Elements are held in a canonical sorted order; join and
/// meet are memoized subspace operations. reversed() yields the order-dual
/// lattice over the same elements.
class FiniteLattice {
  public:
    /// Builds from an element list; deduplicates and sorts. When `verify`
    /// is set, closure under join/meet and the modular law are checked.
    static FiniteLattice from_elements(std::vector<Subspace> elems, bool verify = false);

    int size() const { return static_cast<int>(elems_.size()); }
    const Subspace& at(int i) const { return elems_[static_cast<size_t>(i)]; }
    bool reversed() const { return reversed_; }

    int bottom() const { return reversed_ ? max_index_ : min_index_; }
    int top() const { return reversed_ ? min_index_ : max_index_; }
    int join(int a, int b) const { return reversed_ ? meet_impl(a, b) : join_impl(a, b); }
    int meet(int a, int b) const { return reversed_ ? join_impl(a, b) : meet_impl(a, b); }
    bool leq(int a, int b) const;
    int index_of(const Subspace& s) const;  // -1 when absent

    FiniteLattice reversed_lattice() const;

  private:
    std::vector<Subspace> elems_;
    int min_index_ = 0;
    int max_index_ = 0;
    bool reversed_ = false;
    mutable std::map<std::pair<int, int>, int> join_cache_;
    mutable std::map<std::pair<int, int>, int> meet_cache_;

    int join_impl(int a, int b) const;
    int meet_impl(int a, int b) const;
};

/// All action-invariant subspaces of K^d. Hard caps: p in {2, 3} and
/// d <= max_dim (default 6); beyond them CapExceeded is thrown.
FiniteLattice invariant_subspaces(const AlgebraicFlow& flow, int max_dim = 6,
                                  bool verify = false);

/// The full subspace lattice of K^d (every subspace is invariant under 0).
FiniteLattice full_subspace_lattice(PrimeField field, int d, int max_dim = 6);

/// a_i v (meet of the others) = top for every member; members must be
/// proper (std::invalid_argument otherwise). Singletons are coindependent.
bool is_coindependent(const FiniteLattice& l, const std::vector<int>& subset);

/// a v b != top for every b != top.
bool is_superfluous(const FiniteLattice& l, int a);

/// The interval [a, top] is couniform (every proper member superfluous in
/// it); false for a = top (one-element interval).
bool is_couniform(const FiniteLattice& l, int a);

struct CodiResult {
    int value = 0;
    std::vector<int> witness;  // a maximal coindependent family
};

/// Maximal size of a coindependent family of proper elements, by
/// branch-and-bound over candidates ordered by codimension.
CodiResult dual_goldie_dim(const FiniteLattice& l);

/// Goldie dimension: the dual Goldie dimension of the reversed lattice.
CodiResult goldie_dim(const FiniteLattice& l);

/// A coindependent family of couniform elements with superfluous meet and
/// size equal to codi; its existence certifies the exhaustive value.
std::optional<std::vector<int>> codi_certificate(const FiniteLattice& l);

struct CorankReport {
    ExtNat value;
    Status status = Status::exact;
    std::string method;                      // dual-rank | exhaustive | witness-search
    std::optional<uint32_t> witness_count;   // witness-search route, when run
    std::vector<OpenSubspace> witness_family;
    bool routes_consistent = true;
};

/// Corank of a topological flow: the dual Goldie dimension of the lattice
/// of closed invariant subspaces of D_+. Dual-rank route for
/// dual-of-module flows (with a witness-search cross-check), exhaustive
/// route for findim flows within caps.
CorankReport cork(const ProfiniteFlow& flow, SearchBounds bounds = {});

}  // namespace flowent
