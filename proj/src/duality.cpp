#include "flowent/duality.hpp"

#include <algorithm>
#include <random>

namespace flowent {

DualityContext::DualityContext(ModulePresentation w, std::string label)
    : module_flow_(AlgebraicFlow::module(w)),
      dual_flow_(ProfiniteFlow::dual_of_module(std::move(w), std::move(label))) {}

FiniteSubspaceOfW DualityContext::annihilator(const OpenSubspace& u) const {
    return make_span(module_flow_, annihilator_generators(dual_flow_, u));
}

OpenSubspace DualityContext::co_annihilator(const FiniteSubspaceOfW& f) const {
    const DualModuleData& dd = *dual_flow_.module_side();
    const PrimeField& F = module().field();
    if (f.generators.empty()) return full_open(dual_flow_);
    int level = 1;
    for (const PolyVec& g : f.generators)
        level = std::max(level, dd.representing_level(g));
    std::vector<VecGF> rows;
    rows.reserve(f.generators.size());
    for (const PolyVec& g : f.generators) rows.push_back(dd.element_to_level_vector(g, level));
    MatrixGF m = MatrixGF::from_rows(F, dd.level_dim(level), rows);
    return {level, kernel(m)};
}

std::vector<PolyVec> torsion_k_basis(const ModulePresentation& w) {
    TorsionPart t = torsion_submodule(w);
    AlgebraicFlow flow = AlgebraicFlow::module(w);
    std::vector<PolyVec> basis;
    for (size_t i = 0; i < t.embedding.size(); ++i) {
        PolyVec v = t.embedding[i];
        for (int d = 0; d < t.invariant_factors[i].degree(); ++d) {
            basis.push_back(v);
            v = act(flow, v);
        }
    }
    return make_span(flow, basis).generators;
}

namespace {

// deterministic sample opens: hyperplanes in search order, their pairwise
// intersection, then the full space as a degenerate fallback
std::vector<OpenSubspace> sample_opens(const ProfiniteFlow& dual, int want,
                                       std::optional<uint64_t> seed) {
    std::vector<OpenSubspace> opens;
    for_each_cocyclic_candidate(dual, 3, [&](const OpenSubspace& u) {
        opens.push_back(u);
        return static_cast<int>(opens.size()) < want;
    });
    if (opens.size() >= 2)
        opens.push_back(open_intersect(dual, opens[0], opens[1]));
    if (opens.empty()) opens.push_back(full_open(dual));
    if (seed) {
        std::mt19937_64 rng(*seed);
        for (int extra = 0; extra < 2; ++extra) {
            int level = 1 + static_cast<int>(rng() % 3);
            int dim = dual.level_dim(level);
            if (dim == 0) continue;
            MatrixGF rows(dual.field(), 2, dim);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < dim; ++c)
                    rows.at(r, c) = static_cast<uint32_t>(rng() % dual.field().modulus());
            opens.push_back({level, kernel(rows)});
        }
    }
    return opens;
}

}  // namespace

BridgeReport bridge_check(const ModulePresentation& w, int n_bound, int min_samples,
                          std::optional<uint64_t> extra_sample_seed, SearchBounds bounds) {
    DualityContext ctx(w);
    BridgeReport rep;
    rep.algebraic = ent_alg(ctx.module_flow());
    EntStarReport star = ent_star(ctx.dual_flow(), EntStrategy::both, bounds);
    rep.structural = *star.structural;
    rep.witness = *star.witness;
    rep.entropies_equal = rep.algebraic.value == rep.structural.value &&
                          rep.algebraic.value == rep.witness.value &&
                          rep.structural.status == Status::exact &&
                          rep.witness.status == Status::exact;

    rep.evidence_ok = true;
    for (const OpenSubspace& u : sample_opens(ctx.dual_flow(), min_samples, extra_sample_seed)) {
        BridgeEvidence ev{u, {}, {}, false};
        Cotrajectory cot = cotrajectory(ctx.dual_flow(), u, n_bound);
        for (int n = 1; n <= n_bound; ++n) {
            size_t idx = std::min(cot.chain.size() - 1, static_cast<size_t>(n - 1));
            ev.chain_dims.push_back(cot.chain[idx].codim() - u.codim());
        }
        FiniteSubspaceOfW ann = ctx.annihilator(u);
        Trajectory traj = trajectory(ctx.module_flow(), ann, n_bound);
        ev.trajectory_dims = traj.dims;
        ev.equal = ev.chain_dims == ev.trajectory_dims;
        rep.evidence_ok = rep.evidence_ok && ev.equal;
        rep.evidence.push_back(std::move(ev));
    }
    return rep;
}

PinskerDualityReport pinsker_duality_check(const ModulePresentation& w, int level_bound) {
    DualityContext ctx(w);
    PinskerDualityReport rep;
    rep.level_bound = level_bound;
    rep.torsion_dim = w.torsion_k_dim();

    DPlus dp = d_plus(ctx.dual_flow());
    FiniteSubspaceOfW torsion{torsion_k_basis(w)};
    OpenSubspace perp = ctx.co_annihilator(torsion);

    rep.levels_ok = true;
    bool dplus_full_everywhere = true;
    for (int k = 0; k <= level_bound; ++k) {
        Subspace via_layout = dp.level_subspace(k);
        Subspace via_pairing = level_image(ctx.dual_flow(), perp, k);
        if (!(via_layout == via_pairing)) rep.levels_ok = false;
        if (!via_layout.is_full()) dplus_full_everywhere = false;
    }

    rep.pinsker_factor_dim = pinsker_factor(ctx.dual_flow()).level_dim(0);
    rep.factor_dim_ok = rep.pinsker_factor_dim == rep.torsion_dim;
    rep.cpa_iff_dplus_full = is_cpa(ctx.module_flow()) == dplus_full_everywhere;
    return rep;
}

ZeroEntropyReport zero_entropy_duality_check(const ModulePresentation& w, SearchBounds bounds) {
    DualityContext ctx(w);
    ZeroEntropyReport rep;
    rep.algebraic = ent_alg(ctx.module_flow());
    rep.topological = *ent_star(ctx.dual_flow(), EntStrategy::witness, bounds).witness;
    bool alg_zero = rep.algebraic.value == ExtNat::finite(0);
    bool top_zero = rep.topological.value == ExtNat::finite(0) &&
                    rep.topological.status == Status::exact;
    rep.equivalent = alg_zero == top_zero;
    return rep;
}

bool double_dual_levels_match(const DualityContext& ctx, int level_bound) {
    const DualModuleData& dd = *ctx.dual_flow().module_side();
    ModulePresentation canonical = ModulePresentation::direct_sum_of_cyclic(
        ctx.module().field(), dd.torsion_factors, dd.free_rank);
    ProfiniteFlow again = ProfiniteFlow::dual_of_module(std::move(canonical));
    for (int k = 0; k <= level_bound; ++k) {
        LevelData a = ctx.dual_flow().level(k);
        LevelData b = again.level(k);
        if (a.dim != b.dim || !(a.proj == b.proj) || !(a.act == b.act)) return false;
    }
    return true;
}

DPlusCharacterization d_plus_characterization(const DualityContext& ctx, int level_bound) {
    DPlusCharacterization rep;
    rep.level_bound = level_bound;
    const ProfiniteFlow& dual = ctx.dual_flow();
    DPlus dp = d_plus(dual);

    // (1) join side: the torsion annihilator is a completely-positive
    // closed invariant subspace attaining D+ level-wise
    FiniteSubspaceOfW torsion{torsion_k_basis(ctx.module())};
    OpenSubspace z0 = ctx.co_annihilator(torsion);
    rep.join_ok = true;
    for (int k = 0; k <= level_bound; ++k)
        if (!(level_image(dual, z0, k) == dp.level_subspace(k))) rep.join_ok = false;

    // (2) meet side: every kernel of a zero-entropy quotient contains D+,
    // and the sampled meet comes down to D+ itself
    std::vector<FiniteSubspaceOfW> torsion_cyclics;
    TorsionPart t = torsion_submodule(ctx.module());
    AlgebraicFlow wf = ctx.module_flow();
    for (size_t i = 0; i < t.embedding.size(); ++i) {
        std::vector<PolyVec> basis;
        PolyVec v = t.embedding[i];
        for (int d = 0; d < t.invariant_factors[i].degree(); ++d) {
            basis.push_back(v);
            v = act(wf, v);
        }
        torsion_cyclics.push_back(make_span(wf, basis));
    }
    rep.meet_ok = true;
    for (int k = 0; k <= level_bound; ++k) {
        Subspace meet = Subspace::full(dual.field(), dual.level_dim(k));
        for (const FiniteSubspaceOfW& s : torsion_cyclics) {
            Subspace z = level_image(dual, ctx.co_annihilator(s), k);
            if (!z.contains(dp.level_subspace(k))) rep.meet_ok = false;
            meet = subspace_intersect(meet, z);
        }
        meet = subspace_intersect(meet, level_image(dual, z0, k));
        if (!(meet == dp.level_subspace(k))) rep.meet_ok = false;
    }
    return rep;
}

}  // namespace flowent
