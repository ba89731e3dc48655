#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowent/algflow.hpp"
#include "flowent/report.hpp"

namespace flowent {

/// Presentation data of one level of an inverse-limit flow.
struct LevelData {
    int dim;        // d_k
    MatrixGF proj;  // pi_k : V_{k+1} -> V_k, surjective, d_k x d_{k+1}
    MatrixGF act;   // M_k : V_{k+s} -> V_k, the level-k window of phi
};

enum class FlowKind { dual_of_module, findim, periodic };

/// Slot layout of the dual of a module in Smith coordinates: one block per
/// torsion factor (width capped by its degree) followed by one block per
/// free generator. Level k of the dual flow is the dual of the degree-<k
/// filtration piece.
struct DualModuleData {
    ModulePresentation presentation;  // the module W in user coordinates
    std::vector<Poly> torsion_factors;
    int free_rank = 0;
    std::vector<int> torsion_rows;  // smith-coordinate rows of the torsion factors
    std::vector<int> free_rows;     // smith-coordinate rows of the free generators

    // the flow is (dual W, phi^power); for power > 1 module-side ranks are
    // taken over K[t^power] through this restricted presentation
    int power = 1;
    std::optional<ModulePresentation> restricted;

    int factor_count() const { return static_cast<int>(torsion_factors.size()) + free_rank; }
    int factor_width(int factor, int level) const;
    int level_dim(int level) const;
    int slot_index(int level, int factor, int degree) const;
    std::pair<int, int> slot_info(int level, int slot) const;  // (factor, degree)

    /// W_k coordinate vector -> canonical element of W in user coordinates.
    PolyVec level_vector_to_element(const VecGF& coords, int level) const;
    /// Element of W -> its W_k coordinate vector; the level must be large
    /// enough to carry every monomial of the canonical representative.
    VecGF element_to_level_vector(const PolyVec& v, int level) const;
    /// Smallest level that carries the canonical representative of v.
    int representing_level(const PolyVec& v) const;

    /// Module-side presentation over the acting ring (W itself, or its
    /// K[t^power] restriction) plus the coordinates of an element there.
    const ModulePresentation& acting_presentation() const;
    PolyVec acting_coordinates(const PolyVec& user_element) const;
};

struct PeriodicData {
    int window = 1;
    // raw level entries: dims plus projection/action matrices; entry i's
    // projection maps from the dims of entry i+1 (cyclically inside the
    // period)
    std::vector<LevelData> preperiod;
    std::vector<LevelData> period;
};

/// A linearly compact flow presented by finite-dimensional levels with
/// surjective connecting projections and a window-s endomorphism. Cheap to
/// copy; levels are memoized behind an internal lock.
class ProfiniteFlow {
  public:
    static ProfiniteFlow dual_of_module(ModulePresentation w, std::string label = {});
    /// Dual of the free module of rank k: the k-fold left Bernoulli shift.
    static ProfiniteFlow bernoulli(PrimeField field, int k);
    static ProfiniteFlow findim(MatrixGF action, std::string label = {});
    static ProfiniteFlow periodic(PrimeField field, PeriodicData data, std::string label = {});

    FlowKind kind() const;
    const PrimeField& field() const;
    int window() const;
    const std::string& label() const;
    const DualModuleData* module_side() const;  // kind dual_of_module only
    const MatrixGF* findim_action() const;

    /// (d_k, pi_k, M_k); deterministic and cached.
    LevelData level(int k) const;
    int level_dim(int k) const;
    /// Composite projection V_from -> V_to, to <= from.
    MatrixGF projection(int to, int from) const;

    /// The flow (V, phi^k), with window k*s and composed level actions.
    ProfiniteFlow power(int k) const;

    /// Chains that descend strictly past this bound can never stabilize
    /// (dual-of-module flows); absent when no certificate is available.
    std::optional<int> non_stationarity_bound() const;

  private:
    struct Impl;
    explicit ProfiniteFlow(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// U = (projection V -> V_level)^{-1}(space): an open linearly compact
/// subspace, with codim_V(U) = codim(space).
struct OpenSubspace {
    int level;
    Subspace space;
    int codim() const { return space.codim(); }
};

OpenSubspace full_open(const ProfiniteFlow& flow);
OpenSubspace lift(const ProfiniteFlow& flow, const OpenSubspace& u, int to_level);
bool open_equal(const ProfiniteFlow& flow, const OpenSubspace& a, const OpenSubspace& b);
OpenSubspace open_intersect(const ProfiniteFlow& flow, const OpenSubspace& a,
                            const OpenSubspace& b);
OpenSubspace open_sum(const ProfiniteFlow& flow, const OpenSubspace& a, const OpenSubspace& b);
/// pi_level(U) as a subspace of V_level (image below the defining level,
/// preimage above it).
Subspace level_image(const ProfiniteFlow& flow, const OpenSubspace& u, int level);

/// phi^{-1}(U), represented at level u.level + window.
OpenSubspace preimage_endo(const ProfiniteFlow& flow, const OpenSubspace& u);

struct Cotrajectory {
    OpenSubspace base;                 // C_1 = U
    std::vector<OpenSubspace> chain;   // C_1, C_2, ... at levels k, k+s, ...
    std::vector<int> increments;       // dim(C_n / C_{n+1})
    std::optional<int> stationary_at;  // first n with C_n = C_{n+1} (conclusive)
    bool certified_nonstationary = false;
    int horizon = 0;

    bool nonstationary_up_to_horizon() const { return !stationary_at.has_value(); }
};

/// The descending chain C_n = U and phi^{-1}U and ... computed to the
/// horizon (or to stationarity, whichever is first).
Cotrajectory cotrajectory(const ProfiniteFlow& flow, const OpenSubspace& u, int horizon);

/// Limit-formula topological entropy H*(phi, U): the stabilized increment
/// of the cotrajectory chain.
EntropyReport h_star(const ProfiniteFlow& flow, const OpenSubspace& u, int horizon);

/// U^perp as module elements in user coordinates (dual-of-module flows).
std::vector<PolyVec> annihilator_generators(const ProfiniteFlow& flow, const OpenSubspace& u);

/// Codimension-1 open subspaces at levels <= max_level whose cotrajectory
/// is non-stationary up to the horizon; deterministic order (level
/// ascending, then lexicographic normal vector), lifts skipped.
std::vector<OpenSubspace> find_cocyclic_cotrajectories(const ProfiniteFlow& flow, int max_level,
                                                       int horizon);

/// Enumerates codimension-1 candidates in search order, invoking f on the
/// open subspace; stops when f returns false.
void for_each_cocyclic_candidate(const ProfiniteFlow& flow, int max_level,
                                 const std::function<bool(const OpenSubspace&)>& f);

struct ConjugacyWitness {
    std::vector<OpenSubspace> preimages;  // phi^{-n}U for n = 0..horizon
    std::vector<VecGF> normals;           // functionals cutting them out, chain-normalized
    std::vector<VecGF> e_vectors;         // x_n with <omega_n, x_n> = 1, phi(x_n) = x_{n-1} mod ...
    std::vector<int> quotient_dims;       // dim(V / C_{n+1}) for n = 0..horizon-1
    bool codim1_ok = false;
    bool theta_dims_ok = false;   // dim(V/C_n) = n
    bool chain_ok = false;        // the e_n chain maps forward correctly
    bool commutes_ok = false;     // conjugacy square commutes at the truncation
    bool all_ok() const { return codim1_ok && theta_dims_ok && chain_ok && commutes_ok; }
};

/// Builds the finite-stage conjugacy data of V/C(phi,U) with the left
/// Bernoulli shift; throws std::invalid_argument unless u is cocyclic with
/// a non-stationary cotrajectory up to the horizon.
ConjugacyWitness bernoulli_conjugacy(const ProfiniteFlow& flow, const OpenSubspace& u,
                                     int horizon);

/// Exact coindependence check for finitely many open subspaces.
bool coindependent_opens(const ProfiniteFlow& flow, const std::vector<OpenSubspace>& subs);

struct CoindependenceVerdict {
    bool ok = true;                    // verified up to the level bound
    int level_bound = 0;
    std::optional<int> failing_index;  // conclusive counterexample when set
    std::optional<int> failing_level;
};

/// Level-wise coindependence of the (truncated) cotrajectories: failure is
/// conclusive, success means verified up to the bound.
CoindependenceVerdict coindependent_check(const ProfiniteFlow& flow,
                                          const std::vector<Cotrajectory>& cots, int level_bound);

struct SearchBounds {
    int max_witnesses = 8;
    int max_level = 4;
    int horizon = 16;
};

struct BernoulliWitnesses {
    std::vector<OpenSubspace> witnesses;
    std::vector<Cotrajectory> cotrajectories;
    EntropyReport remainder;     // entropy of the intersection of the C(phi, U_i)
    uint32_t count = 0;
    bool bounds_exhausted = false;
};

/// Greedy accumulation of coindependent non-stationary cocyclic
/// cotrajectories until the remainder flow has zero entropy (certified via
/// the module side for dual-of-module flows) or the bounds are exhausted.
BernoulliWitnesses bernoulli_witnesses(const ProfiniteFlow& flow, SearchBounds bounds = {});

enum class EntStrategy { structural, witness, both };

struct EntStarReport {
    std::optional<EntropyReport> structural;
    std::optional<EntropyReport> witness;
    std::optional<BernoulliWitnesses> witness_data;

    const EntropyReport& primary() const { return structural ? *structural : *witness; }
};

/// Topological entropy by the requested pipeline(s). The structural route
/// needs a module side (dual-of-module or findim); generic periodic flows
/// are rejected there with UnsupportedDescriptor.
EntStarReport ent_star(const ProfiniteFlow& flow, EntStrategy strategy,
                       SearchBounds bounds = {});

struct DPlus {
    ProfiniteFlow ambient;
    ProfiniteFlow restricted_flow;  // D_+ with the restricted action
    int ambient_torsion_dim = 0;    // codim of D_+ inside each deep level
    /// The level-k subspace of the ambient flow that D_+ occupies.
    Subspace level_subspace(int k) const;
};

/// Largest closed invariant subspace of completely positive entropy,
/// computed as the annihilator of the dual module's torsion part.
/// Supported for dual-of-module and findim descriptors.
DPlus d_plus(const ProfiniteFlow& flow);

/// V / D_+ : the largest zero-entropy factor, a finite-dimensional flow.
ProfiniteFlow pinsker_factor(const ProfiniteFlow& flow);

}  // namespace flowent
