#pragma once

#include <optional>
#include <vector>

#include "flowent/polymat.hpp"
#include "flowent/report.hpp"

namespace flowent {

/// A discrete flow (W, psi): either a finite-dimensional space with an
/// explicit action matrix, or a finitely presented K[t]-module with psi =
/// multiplication by t.
class AlgebraicFlow {
  public:
    static AlgebraicFlow findim(MatrixGF action);
    static AlgebraicFlow module(ModulePresentation w);

    bool is_module() const { return presentation_.has_value(); }
    bool is_findim() const { return action_.has_value(); }
    const MatrixGF& action() const { return *action_; }
    const ModulePresentation& presentation() const { return *presentation_; }
    const PrimeField& field() const { return field_; }
    /// Coordinate count of elements: g for modules, d for findim flows.
    int coordinates() const;

  private:
    explicit AlgebraicFlow(PrimeField f) : field_(f) {}
    PrimeField field_;
    std::optional<MatrixGF> action_;
    std::optional<ModulePresentation> presentation_;
};

/// Elements are coordinate vectors of polynomials: canonical coset
/// representatives for module flows, constants for findim flows.
using FlowVec = PolyVec;

FlowVec act(const AlgebraicFlow& flow, const FlowVec& v);
FlowVec act_power(const AlgebraicFlow& flow, FlowVec v, int k);
FlowVec canonical_element(const AlgebraicFlow& flow, const FlowVec& v);

/// A finite-dimensional K-subspace of W, kept as an independent list of
/// canonical generators.
struct FiniteSubspaceOfW {
    std::vector<FlowVec> generators;
    int dim() const { return static_cast<int>(generators.size()); }
};

FiniteSubspaceOfW make_span(const AlgebraicFlow& flow, const std::vector<FlowVec>& gens);
FiniteSubspaceOfW span_sum(const AlgebraicFlow& flow, const FiniteSubspaceOfW& a,
                           const FiniteSubspaceOfW& b);
bool span_contains(const AlgebraicFlow& flow, const FiniteSubspaceOfW& s, const FlowVec& v);

struct Trajectory {
    FiniteSubspaceOfW t_n;   // T_n = f + psi f + ... + psi^{n-1} f
    std::vector<int> dims;   // dim(T_i / T_1) for i = 1..n (first entry 0)
};

/// Partial trajectory under psi^step.
Trajectory trajectory(const AlgebraicFlow& flow, const FiniteSubspaceOfW& f, int n, int step = 1);

struct HAlgOptions {
    int horizon = 0;   // 0: 4*g*(1 + max relation degree), resp. 4*d
    int patience = 0;  // 0: first increment + 1
    int step = 1;      // entropy of psi^step
};

/// Limit-formula entropy H(psi, f): the stabilized trajectory increment.
/// Status is exact only when the stabilized value is certified as the true
/// limit (it reached 0, or it equals the torsion-free rank of the
/// K[t]-submodule generated by f).
EntropyReport h_alg(const AlgebraicFlow& flow, const FiniteSubspaceOfW& f, HAlgOptions opt = {});

/// Certified algebraic entropy: 0 for findim flows, the torsion-free rank
/// for module flows.
EntropyReport ent_alg(const AlgebraicFlow& flow);

struct PinskerSubflow {
    AlgebraicFlow subflow;             // the largest zero-entropy subflow
    std::vector<FlowVec> embedding;    // its generators inside W
};

/// Largest invariant subspace of zero algebraic entropy (the K[t]-torsion
/// part for module flows; the whole flow in the findim case).
PinskerSubflow pinsker_subflow(const AlgebraicFlow& flow);

/// W / P_alg: the factor of completely positive algebraic entropy.
AlgebraicFlow cpa_factor(const AlgebraicFlow& flow);

/// True iff every nonzero invariant subspace has nonzero entropy (zero
/// flows count as a member of the class by convention).
bool is_cpa(const AlgebraicFlow& flow);

/// The flow (W, psi^k).
AlgebraicFlow power_flow(const AlgebraicFlow& flow, int k);

/// Smallest action-invariant subspace of K^d containing the given vectors.
Subspace invariant_subspace_generated(const MatrixGF& action, const std::vector<VecGF>& gens);

}  // namespace flowent
