#include "flowent/lattice.hpp"

#include <algorithm>

namespace flowent {
namespace {

// canonical element order: dimension, then basis bytes
bool subspace_less(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return a.basis().data() < b.basis().data();
}

}  // namespace

FiniteLattice FiniteLattice::from_elements(std::vector<Subspace> elems, bool verify) {
    FLOWENT_CHECK(!elems.empty(), "a lattice needs at least one element");
    std::sort(elems.begin(), elems.end(), subspace_less);
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    FiniteLattice l;
    l.elems_ = std::move(elems);
    l.min_index_ = 0;
    l.max_index_ = l.size() - 1;
    // the canonical order puts the meet of everything first and the join of
    // everything last; sanity-check the extremes really are comparable
    for (int i = 0; i < l.size(); ++i) {
        FLOWENT_CHECK(l.elems_[static_cast<size_t>(i)].contains(l.elems_[0]),
                      "lattice has no bottom element");
        FLOWENT_CHECK(l.elems_.back().contains(l.elems_[static_cast<size_t>(i)]),
                      "lattice has no top element");
    }
    if (verify) {
        for (int a = 0; a < l.size(); ++a)
            for (int b = a; b < l.size(); ++b) {
                FLOWENT_CHECK(l.join_impl(a, b) >= 0, "lattice not closed under sum");
                FLOWENT_CHECK(l.meet_impl(a, b) >= 0, "lattice not closed under intersection");
            }
        // modular law on a few triples: x <= b implies x + (a ^ b) = (x + a) ^ b
        for (int x = 0; x < l.size(); x += std::max(1, l.size() / 5))
            for (int b = 0; b < l.size(); b += std::max(1, l.size() / 5)) {
                if (!l.elems_[static_cast<size_t>(b)].contains(l.elems_[static_cast<size_t>(x)]))
                    continue;
                for (int a = 0; a < l.size(); a += std::max(1, l.size() / 5))
                    FLOWENT_CHECK(l.join_impl(x, l.meet_impl(a, b)) ==
                                      l.meet_impl(l.join_impl(x, a), b),
                                  "modular law failed");
            }
    }
    return l;
}

int FiniteLattice::index_of(const Subspace& s) const {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), s, subspace_less);
    if (it == elems_.end() || !(*it == s)) return -1;
    return static_cast<int>(it - elems_.begin());
}

bool FiniteLattice::leq(int a, int b) const {
    return reversed_ ? elems_[static_cast<size_t>(a)].contains(elems_[static_cast<size_t>(b)])
                     : elems_[static_cast<size_t>(b)].contains(elems_[static_cast<size_t>(a)]);
}

int FiniteLattice::join_impl(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = join_cache_.find({a, b});
    if (it != join_cache_.end()) return it->second;
    int r = index_of(subspace_sum(elems_[static_cast<size_t>(a)], elems_[static_cast<size_t>(b)]));
    FLOWENT_CHECK(r >= 0, "lattice not closed under sum");
    join_cache_.emplace(std::make_pair(a, b), r);
    return r;
}

int FiniteLattice::meet_impl(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = meet_cache_.find({a, b});
    if (it != meet_cache_.end()) return it->second;
    int r = index_of(
        subspace_intersect(elems_[static_cast<size_t>(a)], elems_[static_cast<size_t>(b)]));
    FLOWENT_CHECK(r >= 0, "lattice not closed under intersection");
    meet_cache_.emplace(std::make_pair(a, b), r);
    return r;
}

FiniteLattice FiniteLattice::reversed_lattice() const {
    FiniteLattice l;
    l.elems_ = elems_;
    l.min_index_ = min_index_;
    l.max_index_ = max_index_;
    l.reversed_ = !reversed_;
    return l;
}

namespace {

void enumerate_rref(PrimeField F, int d, const std::function<void(const MatrixGF&)>& emit) {
    const uint32_t p = F.modulus();
    // every subspace has a unique RREF basis: choose pivot columns, then
    // fill the free entries (right of each pivot, off the pivot columns)
    for (uint32_t mask = 0; mask < (1u << d); ++mask) {
        std::vector<int> pivots;
        for (int c = 0; c < d; ++c)
            if (mask & (1u << c)) pivots.push_back(c);
        int k = static_cast<int>(pivots.size());
        std::vector<std::pair<int, int>> free_pos;
        for (int i = 0; i < k; ++i)
            for (int c = pivots[static_cast<size_t>(i)] + 1; c < d; ++c)
                if (!(mask & (1u << c))) free_pos.emplace_back(i, c);
        std::vector<uint32_t> vals(free_pos.size(), 0);
        for (;;) {
            MatrixGF m(F, k, d);
            for (int i = 0; i < k; ++i) m.at(i, pivots[static_cast<size_t>(i)]) = 1;
            for (size_t j = 0; j < free_pos.size(); ++j)
                m.at(free_pos[j].first, free_pos[j].second) = vals[j];
            emit(m);
            size_t idx = 0;
            while (idx < vals.size() && ++vals[idx] == p) vals[idx++] = 0;
            if (idx == vals.size()) break;
        }
    }
}

}  // namespace

FiniteLattice invariant_subspaces(const AlgebraicFlow& flow, int max_dim, bool verify) {
    FLOWENT_CHECK(flow.is_findim(), "invariant subspace enumeration needs a findim flow");
    const MatrixGF& a = flow.action();
    const PrimeField& F = flow.field();
    if (F.modulus() > 3 || a.rows() > max_dim)
        throw CapExceeded("invariant subspace enumeration is capped at GF(2)/GF(3), small dim");
    std::vector<Subspace> inv;
    enumerate_rref(F, a.rows(), [&](const MatrixGF& basis) {
        Subspace s = Subspace::from_generators(basis);
        for (int r = 0; r < s.dim(); ++r)
            if (!s.contains(mul_vec(a, s.basis().row_span(r)))) return;
        inv.push_back(std::move(s));
    });
    return FiniteLattice::from_elements(std::move(inv), verify);
}

FiniteLattice full_subspace_lattice(PrimeField field, int d, int max_dim) {
    return invariant_subspaces(AlgebraicFlow::findim(MatrixGF(field, d, d)), max_dim);
}

bool is_coindependent(const FiniteLattice& l, const std::vector<int>& subset) {
    for (int a : subset)
        if (a == l.top()) throw std::invalid_argument("coindependent sets contain proper elements");
    for (size_t i = 0; i < subset.size(); ++i) {
        int meet = l.top();
        for (size_t j = 0; j < subset.size(); ++j)
            if (j != i) meet = l.meet(meet, subset[j]);
        if (l.join(subset[i], meet) != l.top()) return false;
    }
    return true;
}

bool is_superfluous(const FiniteLattice& l, int a) {
    for (int b = 0; b < l.size(); ++b)
        if (b != l.top() && l.join(a, b) == l.top()) return false;
    return true;
}

bool is_couniform(const FiniteLattice& l, int a) {
    if (a == l.top()) return false;  // one-element interval
    std::vector<int> interval;
    for (int x = 0; x < l.size(); ++x)
        if (x != l.top() && l.leq(a, x)) interval.push_back(x);
    for (int x : interval)
        for (int y : interval)
            if (l.join(x, y) == l.top()) return false;
    return true;
}

namespace {

// DFS over candidates in order; every family built through successive
// "new member joins the running meet to the top" conditions is
// coindependent in a modular lattice, and every coindependent family shows
// up along its own sorted order, so the search is exhaustive.
void codi_dfs(const FiniteLattice& l, const std::vector<int>& candidates, size_t start, int meet,
              std::vector<int>& current, CodiResult& best,
              const std::function<bool(int)>& admit) {
    if (static_cast<int>(current.size()) > best.value) {
        best.value = static_cast<int>(current.size());
        best.witness = current;
    }
    for (size_t i = start; i < candidates.size(); ++i) {
        int c = candidates[i];
        if (!admit(c)) continue;
        if (l.join(c, meet) != l.top()) continue;
        current.push_back(c);
        codi_dfs(l, candidates, i + 1, l.meet(meet, c), current, best, admit);
        current.pop_back();
    }
}

std::vector<int> codi_candidates(const FiniteLattice& l) {
    std::vector<int> cands;
    for (int i = 0; i < l.size(); ++i)
        if (i != l.top()) cands.push_back(i);
    // order by codimension inside the lattice: larger members first
    std::stable_sort(cands.begin(), cands.end(), [&](int a, int b) {
        int da = l.reversed() ? -l.at(a).dim() : l.at(a).dim();
        int db = l.reversed() ? -l.at(b).dim() : l.at(b).dim();
        return da > db;
    });
    return cands;
}

}  // namespace

CodiResult dual_goldie_dim(const FiniteLattice& l) {
    CodiResult best;
    std::vector<int> cands = codi_candidates(l);
    std::vector<int> current;
    codi_dfs(l, cands, 0, l.top(), current, best, [](int) { return true; });
    return best;
}

CodiResult goldie_dim(const FiniteLattice& l) {
    return dual_goldie_dim(l.reversed_lattice());
}

std::optional<std::vector<int>> codi_certificate(const FiniteLattice& l) {
    CodiResult target = dual_goldie_dim(l);
    if (target.value == 0) return std::vector<int>{};
    std::vector<int> cands = codi_candidates(l);
    std::vector<int> couniform_cands;
    for (int c : cands)
        if (is_couniform(l, c)) couniform_cands.push_back(c);

    // search coindependent families of couniform elements of the known
    // maximal size whose meet is superfluous
    std::optional<std::vector<int>> found;
    std::function<void(size_t, int, std::vector<int>&)> dfs = [&](size_t start, int meet,
                                                                  std::vector<int>& cur) {
        if (found) return;
        if (static_cast<int>(cur.size()) == target.value) {
            if (is_superfluous(l, meet)) found = cur;
            return;
        }
        for (size_t i = start; i < couniform_cands.size() && !found; ++i) {
            int c = couniform_cands[i];
            if (l.join(c, meet) != l.top()) continue;
            cur.push_back(c);
            dfs(i + 1, l.meet(meet, c), cur);
            cur.pop_back();
        }
    };
    std::vector<int> cur;
    dfs(0, l.top(), cur);
    return found;
}

CorankReport cork(const ProfiniteFlow& flow, SearchBounds bounds) {
    CorankReport rep;
    switch (flow.kind()) {
        case FlowKind::dual_of_module: {
            const DualModuleData& dd = *flow.module_side();
            if (dd.power != 1) throw UnsupportedDescriptor("cork expects an unpowered flow");
            rep.value = ExtNat::finite(static_cast<uint32_t>(module_rank(dd.presentation)));
            rep.status = Status::exact;
            rep.method = "dual-rank";
            // cross-check: grow witnesses inside D_+ itself
            DPlus dp = d_plus(flow);
            BernoulliWitnesses bw = bernoulli_witnesses(dp.restricted_flow, bounds);
            rep.witness_count = bw.count;
            rep.witness_family = std::move(bw.witnesses);
            rep.routes_consistent =
                bw.count == rep.value.n ||
                (bw.bounds_exhausted && bw.count < rep.value.n);  // a true lower bound
            return rep;
        }
        case FlowKind::findim: {
            const MatrixGF& a = *flow.findim_action();
            rep.method = "exhaustive";
            rep.status = Status::exact;
            if (a.field().modulus() <= 3 && a.rows() <= 6) {
                // D_+ honestly: a nonzero invariant subspace always has the
                // zero-entropy quotient by 0, so only 0 is completely positive
                FiniteLattice inv = invariant_subspaces(AlgebraicFlow::findim(a));
                int d_plus_index = inv.bottom();
                FLOWENT_CHECK(inv.at(d_plus_index).is_zero(),
                              "findim invariant lattice must contain 0");
                FiniteLattice trivial = FiniteLattice::from_elements({inv.at(d_plus_index)});
                rep.value = ExtNat::finite(static_cast<uint32_t>(dual_goldie_dim(trivial).value));
            } else {
                rep.value = ExtNat::finite(0);
                rep.method = "dual-rank";
            }
            return rep;
        }
        case FlowKind::periodic: throw UnsupportedDescriptor("cork needs a module side");
    }
    invariant_failure("bad flow kind");
}

}  // namespace flowent
