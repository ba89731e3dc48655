#include "flowent/algflow.hpp"

#include <algorithm>

namespace flowent {
namespace {

// degree window per coordinate for flattening polynomial vectors into K-vectors
struct FlattenWindow {
    std::vector<int> widths;
    std::vector<int> offsets;
    int total = 0;
};

FlattenWindow window_for(const std::vector<FlowVec>& vs, int coords) {
    FlattenWindow w;
    w.widths.assign(static_cast<size_t>(coords), 1);
    for (const FlowVec& v : vs)
        for (size_t i = 0; i < v.size(); ++i)
            w.widths[i] = std::max(w.widths[i], v[i].degree() + 1);
    w.offsets.resize(static_cast<size_t>(coords));
    for (size_t i = 0; i < w.widths.size(); ++i) {
        w.offsets[i] = w.total;
        w.total += w.widths[i];
    }
    return w;
}

VecGF flatten(const FlowVec& v, const FlattenWindow& w) {
    VecGF out(static_cast<size_t>(w.total), 0);
    for (size_t i = 0; i < v.size(); ++i)
        for (int d = 0; d <= v[i].degree(); ++d)
            out[static_cast<size_t>(w.offsets[i] + d)] = v[i].coeff(d);
    return out;
}

FlowVec unflatten(std::span<const uint32_t> row, const FlattenWindow& w, PrimeField field) {
    FlowVec v;
    v.reserve(w.widths.size());
    for (size_t i = 0; i < w.widths.size(); ++i) {
        std::vector<uint32_t> coeffs(row.begin() + w.offsets[i],
                                     row.begin() + w.offsets[i] + w.widths[i]);
        v.emplace_back(field, std::move(coeffs));
    }
    return v;
}

std::vector<FlowVec> independent_subset(const AlgebraicFlow& flow,
                                        const std::vector<FlowVec>& gens) {
    if (gens.empty()) return {};
    FlattenWindow w = window_for(gens, flow.coordinates());
    MatrixGF m(flow.field(), static_cast<int>(gens.size()), w.total);
    for (size_t i = 0; i < gens.size(); ++i) {
        VecGF row = flatten(gens[i], w);
        std::copy(row.begin(), row.end(), m.row(static_cast<int>(i)));
    }
    RrefResult e = rref(m);
    std::vector<FlowVec> out;
    out.reserve(static_cast<size_t>(e.rank));
    for (int r = 0; r < e.rank; ++r)
        out.push_back(unflatten(e.echelon.row_span(r), w, flow.field()));
    return out;
}

}  // namespace

AlgebraicFlow AlgebraicFlow::findim(MatrixGF action) {
    FLOWENT_CHECK(action.rows() == action.cols(), "findim action must be square");
    AlgebraicFlow f(action.field());
    f.action_ = std::move(action);
    return f;
}

AlgebraicFlow AlgebraicFlow::module(ModulePresentation w) {
    AlgebraicFlow f(w.field());
    f.presentation_ = std::move(w);
    return f;
}

int AlgebraicFlow::coordinates() const {
    return is_module() ? presentation_->generators() : action_->rows();
}

FlowVec canonical_element(const AlgebraicFlow& flow, const FlowVec& v) {
    if (v.size() != static_cast<size_t>(flow.coordinates()))
        throw std::invalid_argument("element coordinate count mismatch");
    if (flow.is_module()) return canonical_form(v, flow.presentation());
    for (const Poly& c : v)
        if (!c.is_constant())
            throw std::invalid_argument("findim element coordinates must be constants");
    return v;
}

FlowVec act(const AlgebraicFlow& flow, const FlowVec& v) {
    if (flow.is_module()) {
        FlowVec tv;
        tv.reserve(v.size());
        for (const Poly& c : v) tv.push_back(shift(c, 1));
        return canonical_form(tv, flow.presentation());
    }
    VecGF x(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_constant())
            throw std::invalid_argument("findim element coordinates must be constants");
        x[i] = v[i].coeff(0);
    }
    VecGF y = mul_vec(flow.action(), x);
    FlowVec out;
    out.reserve(y.size());
    for (uint32_t c : y) out.push_back(Poly::constant(flow.field(), c));
    return out;
}

FlowVec act_power(const AlgebraicFlow& flow, FlowVec v, int k) {
    for (int i = 0; i < k; ++i) v = act(flow, v);
    return v;
}

FiniteSubspaceOfW make_span(const AlgebraicFlow& flow, const std::vector<FlowVec>& gens) {
    std::vector<FlowVec> canon;
    canon.reserve(gens.size());
    for (const FlowVec& g : gens) canon.push_back(canonical_element(flow, g));
    return {independent_subset(flow, canon)};
}

FiniteSubspaceOfW span_sum(const AlgebraicFlow& flow, const FiniteSubspaceOfW& a,
                           const FiniteSubspaceOfW& b) {
    std::vector<FlowVec> all = a.generators;
    all.insert(all.end(), b.generators.begin(), b.generators.end());
    return {independent_subset(flow, all)};
}

bool span_contains(const AlgebraicFlow& flow, const FiniteSubspaceOfW& s, const FlowVec& v) {
    FlowVec cv = canonical_element(flow, v);
    std::vector<FlowVec> all = s.generators;
    all.push_back(std::move(cv));
    return static_cast<int>(independent_subset(flow, all).size()) == s.dim();
}

Trajectory trajectory(const AlgebraicFlow& flow, const FiniteSubspaceOfW& f, int n, int step) {
    FLOWENT_CHECK(n >= 1, "trajectory needs n >= 1");
    FLOWENT_CHECK(step >= 1, "trajectory step must be >= 1");
    std::vector<FlowVec> basis = independent_subset(flow, f.generators);
    const int base_dim = static_cast<int>(basis.size());
    std::vector<int> dims{0};
    std::vector<FlowVec> layer = basis;
    for (int i = 2; i <= n; ++i) {
        std::vector<FlowVec> next_layer;
        next_layer.reserve(layer.size());
        for (const FlowVec& v : layer) next_layer.push_back(act_power(flow, v, step));
        std::vector<FlowVec> all = basis;
        all.insert(all.end(), next_layer.begin(), next_layer.end());
        basis = independent_subset(flow, all);
        dims.push_back(static_cast<int>(basis.size()) - base_dim);
        layer = std::move(next_layer);
    }
    return {FiniteSubspaceOfW{std::move(basis)}, std::move(dims)};
}

namespace {

int default_horizon(const AlgebraicFlow& flow) {
    if (flow.is_findim()) return std::max(4, 4 * flow.action().rows());
    const ModulePresentation& w = flow.presentation();
    int max_deg = 0;
    for (int r = 0; r < w.relations().rows(); ++r)
        for (int c = 0; c < w.relations().cols(); ++c)
            max_deg = std::max(max_deg, w.relations().at(r, c).degree());
    return std::max(4, 4 * w.generators() * (1 + max_deg));
}

}  // namespace

namespace {

// the true limit of the trajectory increments: the rank of the submodule
// generated by f over the acting ring (K[t], or K[t^step] after restriction)
int limit_target(const AlgebraicFlow& flow, const FiniteSubspaceOfW& f, int step) {
    if (flow.is_findim()) return 0;
    if (step == 1)
        return module_rank(submodule_presentation(flow.presentation(), f.generators));
    ModulePresentation rw = restriction_presentation(flow.presentation(), step);
    std::vector<PolyVec> rgens;
    rgens.reserve(f.generators.size());
    for (const FlowVec& g : f.generators)
        rgens.push_back(restrict_element(g, step, flow.field()));
    return module_rank(submodule_presentation(rw, rgens));
}

}  // namespace

EntropyReport h_alg(const AlgebraicFlow& flow, const FiniteSubspaceOfW& f, HAlgOptions opt) {
    std::vector<FlowVec> basis = independent_subset(flow, f.generators);
    const int base_dim = static_cast<int>(basis.size());

    // first increment fixes the default patience
    Trajectory two = trajectory(flow, f, 2, opt.step);
    int delta = two.dims[1];
    int patience = opt.patience > 0 ? opt.patience : delta + 1;
    patience = std::max(patience, 2);
    int horizon = opt.horizon > 0 ? opt.horizon : std::max(default_horizon(flow), patience);
    if (horizon < patience)
        throw std::invalid_argument("h_alg requires horizon >= patience");

    const int target = limit_target(flow, f, opt.step);

    int streak = 1;
    int prev_dim = two.dims[1] + base_dim;
    std::vector<FlowVec> cur = two.t_n.generators;
    std::vector<FlowVec> layer;
    // rebuild the step-image layer of T_2
    layer.reserve(basis.size());
    for (const FlowVec& v : basis) layer.push_back(act_power(flow, v, opt.step));
    int last_delta = delta;
    // stop once the increment has both settled for `patience` steps and hit
    // the certified limit; a plateau above the limit is not convergence
    for (int i = 3; i <= horizon + 1 && !(streak >= patience && last_delta == target); ++i) {
        std::vector<FlowVec> next_layer;
        next_layer.reserve(layer.size());
        for (const FlowVec& v : layer) next_layer.push_back(act_power(flow, v, opt.step));
        std::vector<FlowVec> all = cur;
        all.insert(all.end(), next_layer.begin(), next_layer.end());
        cur = independent_subset(flow, all);
        int d = static_cast<int>(cur.size());
        int inc = d - prev_dim;
        FLOWENT_CHECK(inc <= last_delta, "trajectory increments must be non-increasing");
        streak = inc == last_delta ? streak + 1 : 1;
        last_delta = inc;
        prev_dim = d;
        layer = std::move(next_layer);
    }

    EntropyReport rep;
    rep.value = ExtNat::finite(static_cast<uint32_t>(last_delta));
    rep.provenance = "limit";
    rep.status = last_delta == target ? Status::exact : Status::horizon_limited;
    return rep;
}

EntropyReport ent_alg(const AlgebraicFlow& flow) {
    EntropyReport rep;
    if (flow.is_findim()) {
        rep.value = ExtNat::finite(0);
        rep.status = Status::exact;
        rep.provenance = "vanishing";
    } else {
        rep.value = ExtNat::finite(static_cast<uint32_t>(module_rank(flow.presentation())));
        rep.status = Status::exact;
        rep.provenance = "rank";
    }
    return rep;
}

PinskerSubflow pinsker_subflow(const AlgebraicFlow& flow) {
    if (flow.is_findim()) {
        std::vector<FlowVec> basis;
        for (int i = 0; i < flow.action().rows(); ++i) {
            FlowVec e(static_cast<size_t>(flow.action().rows()), Poly(flow.field()));
            e[static_cast<size_t>(i)] = Poly::constant(flow.field(), 1);
            basis.push_back(std::move(e));
        }
        return {flow, std::move(basis)};
    }
    TorsionPart t = torsion_submodule(flow.presentation());
    return {AlgebraicFlow::module(t.presentation), t.embedding};
}

AlgebraicFlow cpa_factor(const AlgebraicFlow& flow) {
    if (flow.is_findim())
        return AlgebraicFlow::module(ModulePresentation::free_module(flow.field(), 0));
    TorsionPart t = torsion_submodule(flow.presentation());
    return AlgebraicFlow::module(quotient_presentation(flow.presentation(), t.embedding));
}

bool is_cpa(const AlgebraicFlow& flow) {
    if (flow.is_findim()) return flow.action().rows() == 0;
    return flow.presentation().torsion_k_dim() == 0;
}

AlgebraicFlow power_flow(const AlgebraicFlow& flow, int k) {
    FLOWENT_CHECK(k >= 1, "power_flow needs k >= 1");
    if (flow.is_module())
        return AlgebraicFlow::module(restriction_presentation(flow.presentation(), k));
    MatrixGF m = MatrixGF::identity(flow.field(), flow.action().rows());
    for (int i = 0; i < k; ++i) m = mul(m, flow.action());
    return AlgebraicFlow::findim(std::move(m));
}

Subspace invariant_subspace_generated(const MatrixGF& action, const std::vector<VecGF>& gens) {
    Subspace s = Subspace::from_generators(
        MatrixGF::from_rows(action.field(), action.cols(), gens));
    for (;;) {
        Subspace next = subspace_sum(s, image(action, s));
        if (next == s) return s;
        s = next;
    }
}

}  // namespace flowent
