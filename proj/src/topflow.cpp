#include "flowent/topflow.hpp"
#include "flowent/kernels.hpp"

#include <algorithm>
#include <map>

namespace flowent {

// ---------------------------------------------------------------------------
// DualModuleData: slot layout of the Smith-coordinate dual

int DualModuleData::factor_width(int factor, int level) const {
    const int nt = static_cast<int>(torsion_factors.size());
    if (factor < nt)
        return std::min(level, torsion_factors[static_cast<size_t>(factor)].degree());
    return level;
}

int DualModuleData::level_dim(int level) const {
    int dim = 0;
    for (int f = 0; f < factor_count(); ++f) dim += factor_width(f, level);
    return dim;
}

int DualModuleData::slot_index(int level, int factor, int degree) const {
    FLOWENT_CHECK(degree < factor_width(factor, level), "slot degree outside level window");
    int idx = 0;
    for (int f = 0; f < factor; ++f) idx += factor_width(f, level);
    return idx + degree;
}

std::pair<int, int> DualModuleData::slot_info(int level, int slot) const {
    for (int f = 0; f < factor_count(); ++f) {
        int w = factor_width(f, level);
        if (slot < w) return {f, slot};
        slot -= w;
    }
    invariant_failure("slot index outside level");
}

PolyVec DualModuleData::level_vector_to_element(const VecGF& coords, int level) const {
    const PrimeField& F = presentation.field();
    const int g = presentation.generators();
    const int nt = static_cast<int>(torsion_factors.size());
    PolyVec smith(static_cast<size_t>(g), Poly(F));
    FLOWENT_CHECK(static_cast<int>(coords.size()) == level_dim(level),
                  "level vector length mismatch");
    for (size_t a = 0; a < coords.size(); ++a) {
        if (coords[a] == 0) continue;
        auto [f, d] = slot_info(level, static_cast<int>(a));
        int row = f < nt ? torsion_rows[static_cast<size_t>(f)]
                         : free_rows[static_cast<size_t>(f - nt)];
        smith[static_cast<size_t>(row)] =
            add(smith[static_cast<size_t>(row)], Poly::monomial(F, d, coords[a]));
    }
    return canonical_form(mul_vec(presentation.smith().u_inv, smith), presentation);
}

namespace {

// Smith coordinates of an element, torsion rows reduced by their factors.
PolyVec smith_coordinates(const DualModuleData& dd, const PolyVec& v) {
    PolyVec smith = mul_vec(dd.presentation.smith().u, canonical_form(v, dd.presentation));
    for (size_t f = 0; f < dd.torsion_factors.size(); ++f) {
        size_t row = static_cast<size_t>(dd.torsion_rows[f]);
        smith[row] = divmod(smith[row], dd.torsion_factors[f]).remainder;
    }
    return smith;
}

}  // namespace

VecGF DualModuleData::element_to_level_vector(const PolyVec& v, int level) const {
    const int nt = static_cast<int>(torsion_factors.size());
    PolyVec smith = smith_coordinates(*this, v);
    VecGF out(static_cast<size_t>(level_dim(level)), 0);
    for (int f = 0; f < factor_count(); ++f) {
        int row = f < nt ? torsion_rows[static_cast<size_t>(f)]
                         : free_rows[static_cast<size_t>(f - nt)];
        const Poly& p = smith[static_cast<size_t>(row)];
        FLOWENT_CHECK(p.degree() < factor_width(f, level),
                      "element does not fit the requested level");
        for (int d = 0; d <= p.degree(); ++d)
            out[static_cast<size_t>(slot_index(level, f, d))] = p.coeff(d);
    }
    return out;
}

int DualModuleData::representing_level(const PolyVec& v) const {
    PolyVec smith = smith_coordinates(*this, v);
    int level = 1;
    const int nt = static_cast<int>(torsion_rows.size());
    for (int f = 0; f < factor_count(); ++f) {
        int row = f < nt ? torsion_rows[static_cast<size_t>(f)]
                         : free_rows[static_cast<size_t>(f - nt)];
        level = std::max(level, smith[static_cast<size_t>(row)].degree() + 1);
    }
    return level;
}

const ModulePresentation& DualModuleData::acting_presentation() const {
    return power == 1 ? presentation : *restricted;
}

PolyVec DualModuleData::acting_coordinates(const PolyVec& user_element) const {
    PolyVec canon = canonical_form(user_element, presentation);
    if (power == 1) return canon;
    return restrict_element(canon, power, presentation.field());
}

// ---------------------------------------------------------------------------
// ProfiniteFlow

struct ProfiniteFlow::Impl {
    PrimeField field;
    FlowKind kind;
    int base_window = 1;  // window of the unpowered presentation
    int power = 1;
    std::string label;
    std::optional<DualModuleData> dual;
    std::optional<MatrixGF> findim_action;
    std::optional<PeriodicData> periodic;

    mutable std::mutex mu;
    mutable std::vector<std::optional<LevelData>> level_cache;
    mutable std::map<std::pair<int, int>, MatrixGF> proj_cache;

    explicit Impl(PrimeField f, FlowKind k) : field(f), kind(k) {}

    int window() const { return base_window * power; }

    int base_dim(int k) const {
        switch (kind) {
            case FlowKind::dual_of_module: return dual->level_dim(k);
            case FlowKind::findim: return findim_action->rows();
            case FlowKind::periodic: return raw_level(k).dim;
        }
        return 0;
    }

    const LevelData& raw_level(int k) const {
        const auto& pre = periodic->preperiod;
        const auto& per = periodic->period;
        if (k < static_cast<int>(pre.size())) return pre[static_cast<size_t>(k)];
        FLOWENT_CHECK(!per.empty(), "periodic flow needs a non-empty period");
        return per[static_cast<size_t>((k - pre.size()) % per.size())];
    }

    MatrixGF base_proj(int k) const {
        switch (kind) {
            case FlowKind::dual_of_module: {
                const DualModuleData& dd = *dual;
                MatrixGF proj(field, dd.level_dim(k), dd.level_dim(k + 1));
                for (int slot = 0; slot < proj.rows(); ++slot) {
                    auto [f, d] = dd.slot_info(k, slot);
                    proj.at(slot, dd.slot_index(k + 1, f, d)) = 1;
                }
                return proj;
            }
            case FlowKind::findim: return MatrixGF::identity(field, findim_action->rows());
            case FlowKind::periodic: return raw_level(k).proj;
        }
        invariant_failure("bad flow kind");
    }

    // single-step action M_k : V_{k + base_window} -> V_k
    MatrixGF base_act(int k) const {
        switch (kind) {
            case FlowKind::dual_of_module: {
                const DualModuleData& dd = *dual;
                const int nt = static_cast<int>(dd.torsion_factors.size());
                MatrixGF act(field, dd.level_dim(k), dd.level_dim(k + 1));
                for (int slot = 0; slot < act.rows(); ++slot) {
                    auto [f, d] = dd.slot_info(k, slot);
                    if (f >= nt || d + 1 < dd.torsion_factors[static_cast<size_t>(f)].degree()) {
                        act.at(slot, dd.slot_index(k + 1, f, d + 1)) = 1;
                    } else {
                        // top torsion slot wraps through the factor
                        const Poly& tau = dd.torsion_factors[static_cast<size_t>(f)];
                        for (int j = 0; j < tau.degree(); ++j)
                            if (tau.coeff(j) != 0)
                                act.at(slot, dd.slot_index(k + 1, f, j)) = field.neg(tau.coeff(j));
                    }
                }
                return act;
            }
            case FlowKind::findim: return *findim_action;
            case FlowKind::periodic: return raw_level(k).act;
        }
        invariant_failure("bad flow kind");
    }

    LevelData compute_level(int k) const {
        MatrixGF act = base_act(k);
        for (int step = 1; step < power; ++step) act = mul(act, base_act(k + step * base_window));
        return LevelData{base_dim(k), base_proj(k), std::move(act)};
    }
};

ProfiniteFlow ProfiniteFlow::dual_of_module(ModulePresentation w, std::string label) {
    auto impl = std::make_shared<Impl>(w.field(), FlowKind::dual_of_module);
    DualModuleData dd{std::move(w), {}, 0, {}, {}, 1, std::nullopt};
    const SmithForm& sf = dd.presentation.smith();
    for (size_t i = 0; i < sf.factors.size(); ++i) {
        if (sf.factors[i].is_unit()) continue;
        dd.torsion_factors.push_back(sf.factors[i]);
        dd.torsion_rows.push_back(static_cast<int>(i));
    }
    for (int i = static_cast<int>(sf.factors.size()); i < dd.presentation.generators(); ++i)
        dd.free_rows.push_back(i);
    dd.free_rank = static_cast<int>(dd.free_rows.size());
    impl->dual = std::move(dd);
    impl->label = label.empty() ? "dual-of-module" : std::move(label);
    return ProfiniteFlow(std::move(impl));
}

ProfiniteFlow ProfiniteFlow::bernoulli(PrimeField field, int k) {
    FLOWENT_CHECK(k >= 0, "bernoulli fold count must be non-negative");
    return dual_of_module(ModulePresentation::free_module(field, k),
                          "bernoulli-" + std::to_string(k));
}

ProfiniteFlow ProfiniteFlow::findim(MatrixGF action, std::string label) {
    FLOWENT_CHECK(action.rows() == action.cols(), "findim action must be square");
    auto impl = std::make_shared<Impl>(action.field(), FlowKind::findim);
    impl->findim_action = std::move(action);
    impl->label = label.empty() ? "findim" : std::move(label);
    return ProfiniteFlow(std::move(impl));
}

ProfiniteFlow ProfiniteFlow::periodic(PrimeField field, PeriodicData data, std::string label) {
    FLOWENT_CHECK(data.window >= 0, "window must be non-negative");
    FLOWENT_CHECK(!data.period.empty(), "periodic flow needs a non-empty period");
    auto impl = std::make_shared<Impl>(field, FlowKind::periodic);
    impl->base_window = data.window;
    impl->periodic = std::move(data);
    impl->label = label.empty() ? "periodic" : std::move(label);
    ProfiniteFlow flow(std::move(impl));

    // validate the supplied level data across the preperiod and one full
    // cycle: shapes, surjectivity, monotone dims and the compatibility square
    const auto& pd = *flow.impl_->periodic;
    const int s = pd.window;
    const int span = static_cast<int>(pd.preperiod.size() + 2 * pd.period.size()) + s + 1;
    for (int k = 0; k < span; ++k) {
        LevelData ld = flow.level(k);
        int next = flow.level_dim(k + 1);
        if (ld.proj.rows() != ld.dim || ld.proj.cols() != next)
            throw ParseError("periodic level projection has the wrong shape");
        if (ld.act.rows() != ld.dim || ld.act.cols() != flow.level_dim(k + s))
            throw ParseError("periodic level action has the wrong shape");
        if (rref(ld.proj).rank != ld.dim)
            throw ParseError("periodic level projection is not surjective");
        if (next < ld.dim) throw ParseError("periodic level dimensions must be non-decreasing");
    }
    for (int k = 0; k + 1 < span - s; ++k) {
        MatrixGF lhs = mul(flow.level(k).proj, flow.level(k + 1).act);
        MatrixGF rhs = mul(flow.level(k).act, flow.level(k + s).proj);
        if (!(lhs == rhs)) throw ParseError("periodic level data violates compatibility");
    }
    return flow;
}

FlowKind ProfiniteFlow::kind() const { return impl_->kind; }
const PrimeField& ProfiniteFlow::field() const { return impl_->field; }
int ProfiniteFlow::window() const { return impl_->window(); }
const std::string& ProfiniteFlow::label() const { return impl_->label; }
const DualModuleData* ProfiniteFlow::module_side() const {
    return impl_->dual ? &*impl_->dual : nullptr;
}
const MatrixGF* ProfiniteFlow::findim_action() const {
    return impl_->findim_action ? &*impl_->findim_action : nullptr;
}

LevelData ProfiniteFlow::level(int k) const {
    FLOWENT_CHECK(k >= 0, "level index must be non-negative");
    {
        std::lock_guard<std::mutex> lock(impl_->mu);
        if (k < static_cast<int>(impl_->level_cache.size()) && impl_->level_cache[k])
            return *impl_->level_cache[k];
    }
    LevelData ld = impl_->compute_level(k);
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (k >= static_cast<int>(impl_->level_cache.size()))
        impl_->level_cache.resize(static_cast<size_t>(k) + 1);
    impl_->level_cache[k] = ld;
    return ld;
}

int ProfiniteFlow::level_dim(int k) const { return impl_->base_dim(k); }

MatrixGF ProfiniteFlow::projection(int to, int from) const {
    FLOWENT_CHECK(0 <= to && to <= from, "projection wants to <= from");
    {
        std::lock_guard<std::mutex> lock(impl_->mu);
        auto it = impl_->proj_cache.find({to, from});
        if (it != impl_->proj_cache.end()) return it->second;
    }
    MatrixGF p = MatrixGF::identity(impl_->field, level_dim(to));
    for (int j = to; j < from; ++j) p = mul(p, level(j).proj);
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->proj_cache.emplace(std::make_pair(to, from), std::move(p)).first->second;
}

ProfiniteFlow ProfiniteFlow::power(int k) const {
    FLOWENT_CHECK(k >= 1, "power must be >= 1");
    if (k == 1) return *this;
    if (impl_->kind == FlowKind::findim) {
        MatrixGF m = MatrixGF::identity(impl_->field, impl_->findim_action->rows());
        for (int i = 0; i < k; ++i) m = mul(m, *impl_->findim_action);
        return findim(std::move(m), impl_->label + "^" + std::to_string(k));
    }
    auto impl = std::make_shared<Impl>(impl_->field, impl_->kind);
    impl->base_window = impl_->base_window;
    impl->power = impl_->power * k;
    impl->label = impl_->label + "^" + std::to_string(k);
    impl->dual = impl_->dual;
    impl->periodic = impl_->periodic;
    if (impl->dual) {
        impl->dual->power = impl->power;
        impl->dual->restricted =
            restriction_presentation(impl->dual->presentation, impl->power);
    }
    return ProfiniteFlow(std::move(impl));
}

std::optional<int> ProfiniteFlow::non_stationarity_bound() const {
    if (impl_->kind != FlowKind::dual_of_module) return std::nullopt;
    return impl_->dual->presentation.torsion_k_dim();
}

// ---------------------------------------------------------------------------
// Open subspaces

OpenSubspace full_open(const ProfiniteFlow& flow) {
    return {0, Subspace::full(flow.field(), flow.level_dim(0))};
}

OpenSubspace lift(const ProfiniteFlow& flow, const OpenSubspace& u, int to_level) {
    FLOWENT_CHECK(to_level >= u.level, "open subspaces only lift to higher levels");
    if (to_level == u.level) return u;
    return {to_level, preimage(flow.projection(u.level, to_level), u.space)};
}

bool open_equal(const ProfiniteFlow& flow, const OpenSubspace& a, const OpenSubspace& b) {
    int common = std::max(a.level, b.level);
    return lift(flow, a, common).space == lift(flow, b, common).space;
}

OpenSubspace open_intersect(const ProfiniteFlow& flow, const OpenSubspace& a,
                            const OpenSubspace& b) {
    int common = std::max(a.level, b.level);
    return {common,
            subspace_intersect(lift(flow, a, common).space, lift(flow, b, common).space)};
}

OpenSubspace open_sum(const ProfiniteFlow& flow, const OpenSubspace& a, const OpenSubspace& b) {
    int common = std::max(a.level, b.level);
    return {common, subspace_sum(lift(flow, a, common).space, lift(flow, b, common).space)};
}

Subspace level_image(const ProfiniteFlow& flow, const OpenSubspace& u, int level) {
    if (level >= u.level) return lift(flow, u, level).space;
    return image(flow.projection(level, u.level), u.space);
}

OpenSubspace preimage_endo(const ProfiniteFlow& flow, const OpenSubspace& u) {
    LevelData ld = flow.level(u.level);
    FLOWENT_CHECK(u.space.ambient_dim() == ld.dim, "open subspace has wrong ambient dimension");
    return {u.level + flow.window(), preimage(ld.act, u.space)};
}

// ---------------------------------------------------------------------------
// Cotrajectories

Cotrajectory cotrajectory(const ProfiniteFlow& flow, const OpenSubspace& u, int horizon) {
    FLOWENT_CHECK(horizon >= 2, "cotrajectory horizon must be >= 2");
    Cotrajectory cot{u, {u}, {}, std::nullopt, false, horizon};
    const int s = flow.window();
    for (int n = 1; n < horizon; ++n) {
        const OpenSubspace& cn = cot.chain.back();
        OpenSubspace phi_inv = preimage_endo(flow, cn);
        OpenSubspace next = open_intersect(flow, lift(flow, u, phi_inv.level), phi_inv);
        FLOWENT_CHECK(next.level == u.level + n * s, "cotrajectory level bookkeeping broke");
        cot.increments.push_back(next.codim() - cn.codim());
        bool same = next.codim() == cn.codim() &&
                    lift(flow, cn, next.level).space == next.space;
        cot.chain.push_back(std::move(next));
        if (same) {
            cot.stationary_at = n;
            break;
        }
    }
    if (!cot.stationary_at) {
        if (auto bound = flow.non_stationarity_bound();
            bound && cot.chain.back().codim() > *bound)
            cot.certified_nonstationary = true;
    }
    return cot;
}

EntropyReport h_star(const ProfiniteFlow& flow, const OpenSubspace& u, int horizon) {
    Cotrajectory cot = cotrajectory(flow, u, horizon);
    for (size_t i = 1; i < cot.increments.size(); ++i)
        FLOWENT_CHECK(cot.increments[i] <= cot.increments[i - 1],
                      "cotrajectory increments must be non-increasing");
    EntropyReport rep;
    rep.provenance = "limit";
    int value = cot.increments.empty() ? 0 : cot.increments.back();
    rep.value = ExtNat::finite(static_cast<uint32_t>(value));
    if (cot.stationary_at) {
        FLOWENT_CHECK(value == 0, "stationary chain must end with a zero increment");
        rep.status = Status::exact;
        return rep;
    }
    if (flow.kind() == FlowKind::dual_of_module) {
        const DualModuleData& dd = *flow.module_side();
        std::vector<PolyVec> gens = annihilator_generators(flow, u);
        std::vector<PolyVec> acting;
        acting.reserve(gens.size());
        for (const PolyVec& g : gens) acting.push_back(dd.acting_coordinates(g));
        int target = module_rank(submodule_presentation(dd.acting_presentation(), acting));
        // increments are non-increasing with limit equal to the module rank,
        // so touching the rank certifies convergence
        rep.status = value == target ? Status::exact : Status::horizon_limited;
    } else {
        rep.status = Status::horizon_limited;
    }
    return rep;
}

std::vector<PolyVec> annihilator_generators(const ProfiniteFlow& flow, const OpenSubspace& u) {
    const DualModuleData* dd = flow.module_side();
    if (dd == nullptr)
        throw UnsupportedDescriptor("annihilators need a dual-of-module flow");
    MatrixGF ann = kernel(u.space.basis()).basis();
    std::vector<PolyVec> gens;
    gens.reserve(static_cast<size_t>(ann.rows()));
    for (int r = 0; r < ann.rows(); ++r)
        gens.push_back(dd->level_vector_to_element(
            VecGF(ann.row(r), ann.row(r) + ann.cols()), u.level));
    return gens;
}

// ---------------------------------------------------------------------------
// Hyperplane search

// Beyond this many normals per level the candidate stream switches from
// exhaustive to a deterministic lexicographic-prefix sample.
constexpr long kHyperplaneSampleCap = 4096;

void for_each_cocyclic_candidate(const ProfiniteFlow& flow, int max_level,
                                 const std::function<bool(const OpenSubspace&)>& f) {
    for (int k = 0; k <= max_level; ++k) {
        int dk = flow.level_dim(k);
        if (dk == 0) continue;
        // hyperplanes already representable one level down are lifts; their
        // normals live in the row space of the connecting projection
        std::optional<Subspace> lifted_normals;
        if (k > 0) lifted_normals = Subspace::from_generators(flow.level(k - 1).proj);
        bool go_on = true;
        long seen = 0;
        for_each_hyperplane_normal(flow.field(), dk, [&](std::span<const uint32_t> normal) {
            if (++seen > kHyperplaneSampleCap) return false;
            if (lifted_normals && lifted_normals->contains(normal)) return true;
            OpenSubspace u{k, hyperplane(flow.field(), normal)};
            go_on = f(u);
            return go_on;
        });
        if (!go_on) return;
    }
}

std::vector<OpenSubspace> find_cocyclic_cotrajectories(const ProfiniteFlow& flow, int max_level,
                                                       int horizon) {
    FLOWENT_CHECK(max_level >= 0 && horizon >= 2, "search bounds must be positive");
    std::vector<OpenSubspace> found;
    for_each_cocyclic_candidate(flow, max_level, [&](const OpenSubspace& u) {
        Cotrajectory cot = cotrajectory(flow, u, horizon);
        if (!cot.stationary_at) found.push_back(u);
        return true;
    });
    return found;
}

// ---------------------------------------------------------------------------
// Bernoulli conjugacy data

ConjugacyWitness bernoulli_conjugacy(const ProfiniteFlow& flow, const OpenSubspace& u,
                                     int horizon) {
    FLOWENT_CHECK(horizon >= 2, "conjugacy horizon must be >= 2");
    if (u.codim() != 1) throw std::invalid_argument("bernoulli_conjugacy needs a cocyclic open");
    Cotrajectory cot = cotrajectory(flow, u, horizon + 1);
    if (cot.stationary_at)
        throw std::invalid_argument("bernoulli_conjugacy needs a non-stationary cotrajectory");

    const PrimeField& F = flow.field();
    const int s = flow.window();
    ConjugacyWitness w;
    w.codim1_ok = true;
    w.theta_dims_ok = true;
    w.chain_ok = true;

    OpenSubspace pre = u;
    for (int n = 0; n <= horizon; ++n) {
        if (n > 0) pre = preimage_endo(flow, pre);
        w.preimages.push_back(pre);
        if (pre.codim() != 1) w.codim1_ok = false;
    }
    // dim(V / C_m) = m for every stage of a cocyclic non-stationary chain
    for (size_t i = 0; i < cot.chain.size() && static_cast<int>(i) <= horizon; ++i) {
        w.quotient_dims.push_back(cot.chain[i].codim());
        if (w.quotient_dims.back() != static_cast<int>(i) + 1) w.theta_dims_ok = false;
    }
    if (!w.codim1_ok) return w;

    // chain-normalized functionals: omega_0 from the hyperplane, then
    // omega_{n+1} = omega_n . M; each must cut out phi^{-(n+1)}U
    MatrixGF ann0 = kernel(u.space.basis()).basis();
    FLOWENT_CHECK(ann0.rows() == 1, "cocyclic open must have a one-dimensional annihilator");
    VecGF omega(ann0.row(0), ann0.row(0) + ann0.cols());
    for (int n = 0; n <= horizon; ++n) {
        if (n > 0) {
            LevelData ld = flow.level(u.level + (n - 1) * s);
            // omega . M as a row functional on the next chain level
            VecGF next(static_cast<size_t>(ld.act.cols()), 0);
            for (int r = 0; r < ld.act.rows(); ++r)
                if (omega[static_cast<size_t>(r)] != 0)
                    gfp::row_axpy(next.data(), ld.act.row(r), omega[static_cast<size_t>(r)],
                                  next.size(), F.modulus());
            omega = std::move(next);
        }
        // the functional must cut out exactly the computed preimage
        Subspace cut = hyperplane(F, omega);
        if (!(cut == w.preimages[static_cast<size_t>(n)].space)) w.chain_ok = false;
        w.normals.push_back(omega);
        auto x = solve(MatrixGF(F, 1, static_cast<int>(omega.size()), omega), VecGF{1});
        if (!x) {
            w.chain_ok = false;
            w.e_vectors.emplace_back();
        } else {
            w.e_vectors.push_back(*x);
        }
    }

    // e-chain: phi(x_n) = x_{n-1} modulo phi^{-(n-1)}U
    for (int n = 1; n <= horizon && w.chain_ok; ++n) {
        LevelData ld = flow.level(u.level + (n - 1) * s);
        VecGF img = mul_vec(ld.act, w.e_vectors[static_cast<size_t>(n)]);
        VecGF diff(img.size());
        for (size_t i = 0; i < img.size(); ++i)
            diff[i] = F.sub(img[i], w.e_vectors[static_cast<size_t>(n - 1)][i]);
        if (!w.preimages[static_cast<size_t>(n - 1)].space.contains(diff)) w.chain_ok = false;
    }

    // conjugacy square at the truncation: with Omega_N = the omega_i pulled
    // to the deep level, theta(phi v) = shift(theta v) for all v, and
    // ker(Omega_N) = C_{N+1}
    w.commutes_ok = w.chain_ok;
    const int deep = u.level + horizon * s;
    MatrixGF omega_deep(F, horizon + 1, flow.level_dim(deep));
    for (int i = 0; i <= horizon; ++i) {
        MatrixGF p = flow.projection(u.level + i * s, deep);
        VecGF row(static_cast<size_t>(p.cols()), 0);
        for (int r = 0; r < p.rows(); ++r)
            if (w.normals[static_cast<size_t>(i)][static_cast<size_t>(r)] != 0)
                gfp::row_axpy(row.data(), p.row(r),
                              w.normals[static_cast<size_t>(i)][static_cast<size_t>(r)],
                              row.size(), F.modulus());
        std::copy(row.begin(), row.end(), omega_deep.row(i));
    }
    if (rref(omega_deep).rank != horizon + 1) w.commutes_ok = false;
    if (static_cast<int>(cot.chain.size()) > horizon) {
        Subspace c_deep = lift(flow, cot.chain[static_cast<size_t>(horizon)], deep).space;
        if (!(kernel(omega_deep) == c_deep)) w.commutes_ok = false;
    }
    // theta(phi v) = shift(theta v): row_i(Omega') * M_deep == row_{i+1}(Omega)
    const int deep_prev = u.level + (horizon - 1) * s;
    MatrixGF m_deep = flow.level(deep_prev).act;  // V_deep -> V_deep_prev... level map of phi
    for (int i = 0; i + 1 <= horizon && w.commutes_ok; ++i) {
        MatrixGF p = flow.projection(u.level + i * s, deep_prev);
        VecGF row(static_cast<size_t>(p.cols()), 0);
        for (int r = 0; r < p.rows(); ++r)
            if (w.normals[static_cast<size_t>(i)][static_cast<size_t>(r)] != 0)
                gfp::row_axpy(row.data(), p.row(r),
                              w.normals[static_cast<size_t>(i)][static_cast<size_t>(r)],
                              row.size(), F.modulus());
        // row . M_deep
        VecGF lhs(static_cast<size_t>(m_deep.cols()), 0);
        for (int r = 0; r < m_deep.rows(); ++r)
            if (row[static_cast<size_t>(r)] != 0)
                gfp::row_axpy(lhs.data(), m_deep.row(r), row[static_cast<size_t>(r)], lhs.size(),
                              F.modulus());
        VecGF rhs(omega_deep.row(i + 1), omega_deep.row(i + 1) + omega_deep.cols());
        if (lhs != rhs) w.commutes_ok = false;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Coindependence

bool coindependent_opens(const ProfiniteFlow& flow, const std::vector<OpenSubspace>& subs) {
    FLOWENT_CHECK(!subs.empty(), "coindependence of an empty family is vacuous");
    int common = 0;
    for (const OpenSubspace& u : subs) common = std::max(common, u.level);
    std::vector<Subspace> lifted;
    lifted.reserve(subs.size());
    for (const OpenSubspace& u : subs) lifted.push_back(lift(flow, u, common).space);
    for (size_t i = 0; i < lifted.size(); ++i) {
        Subspace meet = Subspace::full(flow.field(), flow.level_dim(common));
        for (size_t j = 0; j < lifted.size(); ++j)
            if (j != i) meet = subspace_intersect(meet, lifted[j]);
        if (!subspace_sum(lifted[i], meet).is_full()) return false;
    }
    return true;
}

CoindependenceVerdict coindependent_check(const ProfiniteFlow& flow,
                                          const std::vector<Cotrajectory>& cots,
                                          int level_bound) {
    FLOWENT_CHECK(!cots.empty(), "coindependent_check needs a non-empty family");
    CoindependenceVerdict verdict;
    verdict.level_bound = level_bound;
    // the truncated cotrajectories, intersected at a common level
    std::vector<OpenSubspace> tails;
    tails.reserve(cots.size());
    int common = 0;
    for (const Cotrajectory& c : cots) {
        tails.push_back(c.chain.back());
        common = std::max(common, tails.back().level);
    }
    for (int l = 0; l <= level_bound; ++l) {
        for (size_t i = 0; i < tails.size(); ++i) {
            std::optional<OpenSubspace> meet;
            for (size_t j = 0; j < tails.size(); ++j) {
                if (j == i) continue;
                meet = meet ? open_intersect(flow, *meet, tails[j]) : tails[j];
            }
            Subspace lhs = level_image(flow, tails[i], l);
            Subspace rhs = meet ? level_image(flow, *meet, l)
                                : Subspace::full(flow.field(), flow.level_dim(l));
            if (!subspace_sum(lhs, rhs).is_full()) {
                verdict.ok = false;
                verdict.failing_index = static_cast<int>(i);
                verdict.failing_level = l;
                return verdict;
            }
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Witness accumulation

BernoulliWitnesses bernoulli_witnesses(const ProfiniteFlow& flow, SearchBounds bounds) {
    FLOWENT_CHECK(bounds.max_witnesses >= 1 && bounds.max_level >= 0 && bounds.horizon >= 2,
                  "search bounds must be positive");
    BernoulliWitnesses out;

    if (flow.kind() == FlowKind::findim) {
        // finite-dimensional flows: every chain stabilizes, entropy vanishes
        out.remainder = {ExtNat::finite(0), Status::exact, "vanishing", false};
        return out;
    }

    if (flow.kind() == FlowKind::dual_of_module) {
        const DualModuleData& dd = *flow.module_side();
        const ModulePresentation& acting = dd.acting_presentation();
        std::vector<PolyVec> s_gens;
        int remainder_rank = module_rank(acting);
        int chain_horizon = std::max(bounds.horizon, *flow.non_stationarity_bound() + 2);

        if (remainder_rank > 0) {
            for_each_cocyclic_candidate(flow, bounds.max_level, [&](const OpenSubspace& u) {
                Cotrajectory cot = cotrajectory(flow, u, chain_horizon);
                if (cot.stationary_at || !cot.certified_nonstationary) return true;
                PolyVec a_u = dd.acting_coordinates(annihilator_generators(flow, u).at(0));
                std::vector<PolyVec> trial = s_gens;
                trial.push_back(a_u);
                int new_rank = module_rank(quotient_presentation(acting, trial));
                if (new_rank != remainder_rank - 1) return true;  // not coindependent
                out.witnesses.push_back(u);
                out.cotrajectories.push_back(std::move(cot));
                s_gens = std::move(trial);
                remainder_rank = new_rank;
                ++out.count;
                return remainder_rank > 0 &&
                       static_cast<int>(out.count) < bounds.max_witnesses;
            });
        }
        out.remainder = {ExtNat::finite(static_cast<uint32_t>(remainder_rank)), Status::exact,
                         "rank", false};
        out.bounds_exhausted = remainder_rank > 0;
        return out;
    }

    // generic periodic flows: verified-up-to-level incremental checks only
    std::optional<OpenSubspace> meet;  // running truncated intersection
    for_each_cocyclic_candidate(flow, bounds.max_level, [&](const OpenSubspace& u) {
        Cotrajectory cot = cotrajectory(flow, u, bounds.horizon);
        if (cot.stationary_at) return true;
        OpenSubspace tail = cot.chain.back();
        if (meet && !open_sum(flow, tail, *meet).space.is_full()) return true;
        meet = meet ? open_intersect(flow, *meet, tail) : tail;
        out.witnesses.push_back(u);
        out.cotrajectories.push_back(std::move(cot));
        ++out.count;
        return static_cast<int>(out.count) < bounds.max_witnesses;
    });
    out.remainder = {ExtNat::finite(0), Status::horizon_limited, "witness", true};
    out.bounds_exhausted = true;
    return out;
}

EntStarReport ent_star(const ProfiniteFlow& flow, EntStrategy strategy, SearchBounds bounds) {
    EntStarReport rep;
    if (strategy != EntStrategy::witness) {
        EntropyReport st;
        st.provenance = "structural";
        st.status = Status::exact;
        switch (flow.kind()) {
            case FlowKind::dual_of_module:
                st.value = ExtNat::finite(static_cast<uint32_t>(
                    module_rank(flow.module_side()->acting_presentation())));
                break;
            case FlowKind::findim: st.value = ExtNat::finite(0); break;
            case FlowKind::periodic:
                throw UnsupportedDescriptor(
                    "structural entropy needs a module side; use the witness strategy");
        }
        rep.structural = st;
    }
    if (strategy != EntStrategy::structural) {
        BernoulliWitnesses bw = bernoulli_witnesses(flow, bounds);
        EntropyReport wt;
        wt.provenance = "witness";
        wt.value = ExtNat::finite(bw.count);
        bool certified_zero_remainder =
            bw.remainder.status == Status::exact && bw.remainder.value == ExtNat::finite(0);
        wt.status = certified_zero_remainder ? Status::exact : Status::lower_bound;
        wt.bounds_exhausted = bw.bounds_exhausted;
        rep.witness = wt;
        rep.witness_data = std::move(bw);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// D_+ and the Pinsker factor

Subspace DPlus::level_subspace(int k) const {
    const PrimeField& F = ambient.field();
    if (ambient.kind() == FlowKind::findim)
        return Subspace::zero(F, ambient.level_dim(k));
    const DualModuleData& dd = *ambient.module_side();
    const int nt = static_cast<int>(dd.torsion_factors.size());
    std::vector<VecGF> gens;
    for (int f = nt; f < dd.factor_count(); ++f)
        for (int d = 0; d < dd.factor_width(f, k); ++d) {
            VecGF e(static_cast<size_t>(dd.level_dim(k)), 0);
            e[static_cast<size_t>(dd.slot_index(k, f, d))] = 1;
            gens.push_back(std::move(e));
        }
    return Subspace::from_generators(MatrixGF::from_rows(F, dd.level_dim(k), gens));
}

DPlus d_plus(const ProfiniteFlow& flow) {
    switch (flow.kind()) {
        case FlowKind::findim:
            return DPlus{flow, ProfiniteFlow::bernoulli(flow.field(), 0),
                         flow.level_dim(0)};
        case FlowKind::dual_of_module: {
            const DualModuleData& dd = *flow.module_side();
            if (dd.power != 1)
                throw UnsupportedDescriptor("d_plus is not defined for powered flows here");
            return DPlus{flow, ProfiniteFlow::bernoulli(flow.field(), dd.free_rank),
                         dd.presentation.torsion_k_dim()};
        }
        case FlowKind::periodic:
            throw UnsupportedDescriptor("d_plus needs a module side");
    }
    invariant_failure("bad flow kind");
}

ProfiniteFlow pinsker_factor(const ProfiniteFlow& flow) {
    switch (flow.kind()) {
        case FlowKind::findim: return flow;
        case FlowKind::dual_of_module: {
            const DualModuleData& dd = *flow.module_side();
            if (dd.power != 1)
                throw UnsupportedDescriptor("pinsker_factor is not defined for powered flows");
            const PrimeField& F = flow.field();
            const int tdim = dd.presentation.torsion_k_dim();
            // transposed multiplication-by-t on the sum of the cyclic parts
            MatrixGF mult(F, tdim, tdim);
            int off = 0;
            for (const Poly& tau : dd.torsion_factors) {
                int delta = tau.degree();
                for (int d = 0; d + 1 < delta; ++d) mult.at(off + d + 1, off + d) = 1;
                for (int j = 0; j < delta; ++j)
                    if (tau.coeff(j) != 0) mult.at(off + j, off + delta - 1) = F.neg(tau.coeff(j));
                off += delta;
            }
            return ProfiniteFlow::findim(mult.transpose(), flow.label() + "/D+");
        }
        case FlowKind::periodic:
            throw UnsupportedDescriptor("pinsker_factor needs a module side");
    }
    invariant_failure("bad flow kind");
}

}  // namespace flowent
