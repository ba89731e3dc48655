#pragma once

#include <optional>
#include <vector>

#include "flowent/topflow.hpp"

namespace flowent {

/// The two sides of Lefschetz duality for one module: the discrete flow
/// (W, t) and its linearly compact dual, with explicit finite-level
/// pairings between them.
class DualityContext {
  public:
    explicit DualityContext(ModulePresentation w, std::string label = {});

    const ModulePresentation& module() const { return module_flow_.presentation(); }
    const AlgebraicFlow& module_flow() const { return module_flow_; }
    const ProfiniteFlow& dual_flow() const { return dual_flow_; }

    /// U^perp: the finite-dimensional subspace of W paired to zero with U;
    /// dim = codim(U).
    FiniteSubspaceOfW annihilator(const OpenSubspace& u) const;
    /// F^perp: the open subspace of the dual paired to zero with F;
    /// codim = dim(F).
    OpenSubspace co_annihilator(const FiniteSubspaceOfW& f) const;

  private:
    AlgebraicFlow module_flow_;
    ProfiniteFlow dual_flow_;
};

struct BridgeEvidence {
    OpenSubspace u;
    std::vector<int> chain_dims;       // dim(U / C_n), n = 1..bound
    std::vector<int> trajectory_dims;  // dim(T_n(psi, U^perp) / U^perp)
    bool equal = false;
};

struct BridgeReport {
    EntropyReport algebraic;   // ent(W), rank pipeline
    EntropyReport structural;  // ent*(dual), structural pipeline
    EntropyReport witness;     // ent*(dual), witness pipeline
    bool entropies_equal = false;
    std::vector<BridgeEvidence> evidence;
    bool evidence_ok = false;
    bool ok() const { return entropies_equal && evidence_ok; }
};

/// ent(W) = ent*(dual W) by all three pipelines, plus the per-open identity
/// dim(U/C_n) = dim(T_n(psi, U^perp)/U^perp) on sampled opens. A seed adds
/// extra pseudo-random sample opens on top of the deterministic ones.
BridgeReport bridge_check(const ModulePresentation& w, int n_bound = 8, int min_samples = 3,
                          std::optional<uint64_t> extra_sample_seed = std::nullopt,
                          SearchBounds bounds = {});

struct PinskerDualityReport {
    int level_bound = 0;
    bool levels_ok = false;          // D+ = (torsion part)^perp level-wise
    int pinsker_factor_dim = -1;     // dim of V/D+
    int torsion_dim = -1;            // dim_K of the torsion submodule
    bool factor_dim_ok = false;
    bool cpa_iff_dplus_full = false; // W cpa <=> D+ is the whole space
    bool ok() const { return levels_ok && factor_dim_ok && cpa_iff_dplus_full; }
};

/// Level-wise verification that the domain of completely positive entropy
/// of the dual flow is the annihilator of the module's torsion part, with
/// the Pinsker factor carrying exactly the torsion dimension.
PinskerDualityReport pinsker_duality_check(const ModulePresentation& w, int level_bound = 8);

struct ZeroEntropyReport {
    EntropyReport algebraic;    // ent(W)
    EntropyReport topological;  // ent*(dual), witness pipeline
    bool equivalent = false;    // ent = 0 <=> ent* = 0
};

ZeroEntropyReport zero_entropy_duality_check(const ModulePresentation& w,
                                             SearchBounds bounds = {});

/// Rebuilds the module from the dual flow and dualizes again; level data
/// must come back identical up to the bound.
bool double_dual_levels_match(const DualityContext& ctx, int level_bound);

struct DPlusCharacterization {
    int level_bound = 0;
    bool join_ok = false;  // attained as the annihilator of the torsion part
    bool meet_ok = false;  // meets every zero-entropy-quotient kernel from below
    bool ok() const { return join_ok && meet_ok; }
};

/// The two lattice-style descriptions of D+, checked level-wise against
/// annihilators of torsion submodules.
DPlusCharacterization d_plus_characterization(const DualityContext& ctx, int level_bound);

/// K-basis of the (finite-dimensional) torsion submodule of W.
std::vector<PolyVec> torsion_k_basis(const ModulePresentation& w);

}  // namespace flowent
