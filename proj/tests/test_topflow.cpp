#include "flowent/topflow.hpp"

#include <random>

#include "doctest.h"

using namespace flowent;

namespace {

Poly P(PrimeField F, std::vector<uint32_t> c) { return Poly(F, std::move(c)); }

ModulePresentation cyclic_plus_free(PrimeField F, std::vector<Poly> torsion, int free_rank) {
    return ModulePresentation::direct_sum_of_cyclic(F, torsion, free_rank);
}

// U = {x_0 = 0} on a flow whose first level is one-dimensional
OpenSubspace first_coordinate_hyperplane(const ProfiniteFlow& flow, int level) {
    VecGF normal(static_cast<size_t>(flow.level_dim(level)), 0);
    normal[0] = 1;
    return {level, hyperplane(flow.field(), normal)};
}

}  // namespace

TEST_CASE("level data of the Bernoulli shift") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    CHECK(b.level_dim(0) == 0);
    CHECK(b.level_dim(3) == 3);

    LevelData l3 = b.level(3);
    // projection drops the last coordinate
    MatrixGF proj_expect(F2, 3, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0});
    CHECK(l3.proj == proj_expect);
    // the action drops the first coordinate
    MatrixGF act_expect(F2, 3, 4, {0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
    CHECK(l3.act == act_expect);

    ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
    CHECK(b2.level_dim(2) == 4);

    MatrixGF action(F2, 2, 2, {1, 1, 0, 1});
    ProfiniteFlow fd = ProfiniteFlow::findim(action);
    CHECK(fd.level_dim(7) == 2);
    CHECK(fd.level(7).act == action);
    CHECK(fd.level(7).proj == MatrixGF::identity(F2, 2));
}

TEST_CASE("level compatibility of dual flows") {
    PrimeField F3(3);
    std::mt19937 rng(42);
    for (int trial = 0; trial < 8; ++trial) {
        int g = static_cast<int>(rng() % 3) + 1;
        PolyMatrix rel(F3, g, static_cast<int>(rng() % 3));
        for (int r = 0; r < rel.rows(); ++r)
            for (int c = 0; c < rel.cols(); ++c) {
                std::vector<uint32_t> coeffs;
                for (int i = 0; i <= static_cast<int>(rng() % 4); ++i)
                    coeffs.push_back(rng() % 3);
                rel.at(r, c) = Poly(F3, coeffs);
            }
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(ModulePresentation(F3, g, rel));
        for (int k = 0; k < 6; ++k) {
            MatrixGF lhs = mul(flow.level(k).proj, flow.level(k + 1).act);
            MatrixGF rhs = mul(flow.level(k).act, flow.level(k + flow.window()).proj);
            CHECK(lhs == rhs);
            CHECK(rref(flow.level(k).proj).rank == flow.level_dim(k));
        }
    }
}

TEST_CASE("preimage_endo") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    SUBCASE("shifts coordinate hyperplanes") {
        OpenSubspace u = first_coordinate_hyperplane(b, 1);
        OpenSubspace v = preimage_endo(b, u);
        CHECK(v.level == 2);
        // {x : x_1 = 0} = span{(1,0)}
        CHECK(v.space == Subspace::from_generators(MatrixGF(F2, 1, 2, {1, 0})));
    }
    SUBCASE("full subspace is fixed") {
        OpenSubspace v = preimage_endo(b, full_open(b));
        CHECK(open_equal(b, v, full_open(b)));
    }
    SUBCASE("identity findim flow fixes every open") {
        ProfiniteFlow fd = ProfiniteFlow::findim(MatrixGF::identity(F2, 2));
        OpenSubspace u{0, Subspace::from_generators(MatrixGF(F2, 1, 2, {1, 1}))};
        CHECK(open_equal(fd, preimage_endo(fd, u), u));
    }
    SUBCASE("commutes with re-representation at higher levels") {
        OpenSubspace u = first_coordinate_hyperplane(b, 1);
        for (int j = 1; j <= 3; ++j)
            CHECK(open_equal(b, preimage_endo(b, lift(b, u, 1 + j)),
                             preimage_endo(b, u)));
    }
}

TEST_CASE("cotrajectory") {
    PrimeField F2(2);
    SUBCASE("Bernoulli chain descends forever") {
        ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
        OpenSubspace u = first_coordinate_hyperplane(b, 1);
        Cotrajectory cot = cotrajectory(b, u, 6);
        CHECK(!cot.stationary_at.has_value());
        CHECK(cot.certified_nonstationary);
        CHECK(cot.chain.size() == 6);
        for (size_t n = 0; n < cot.chain.size(); ++n) {
            // C_{n+1} = {x_0 = ... = x_n = 0}
            CHECK(cot.chain[n].codim() == static_cast<int>(n) + 1);
        }
        CHECK(cot.increments == std::vector<int>{1, 1, 1, 1, 1});
    }
    SUBCASE("findim flows stabilize within d + 1 steps") {
        std::mt19937 rng(7);
        for (int trial = 0; trial < 10; ++trial) {
            MatrixGF a(F2, 3, 3);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) a.at(r, c) = rng() % 2;
            ProfiniteFlow fd = ProfiniteFlow::findim(a);
            OpenSubspace u{0, Subspace::from_generators(MatrixGF(F2, 2, 3, {1, 0, 0, 0, 1, 0}))};
            Cotrajectory cot = cotrajectory(fd, u, 10);
            REQUIRE(cot.stationary_at.has_value());
            CHECK(*cot.stationary_at <= 4);
        }
    }
    SUBCASE("dual of a torsion module stabilizes") {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {P(F2, {0, 0, 1})}, 0));
        OpenSubspace u = first_coordinate_hyperplane(flow, 1);
        Cotrajectory cot = cotrajectory(flow, u, 8);
        REQUIRE(cot.stationary_at.has_value());
        CHECK(*cot.stationary_at <= 3);
    }
}

TEST_CASE("h_star") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    SUBCASE("cocyclic non-stationary gives 1, exactly") {
        EntropyReport r = h_star(b, first_coordinate_hyperplane(b, 1), 8);
        CHECK(r.value == ExtNat::finite(1));
        CHECK(r.status == Status::exact);
    }
    SUBCASE("whole space gives 0") {
        EntropyReport r = h_star(b, full_open(b), 4);
        CHECK(r.value == ExtNat::finite(0));
        CHECK(r.status == Status::exact);
    }
    SUBCASE("codim-2 open on the 2-fold Bernoulli gives 2") {
        ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
        OpenSubspace u{1, Subspace::zero(F2, 2)};  // annihilator of span{e1, e2}
        EntropyReport r = h_star(b2, u, 8);
        CHECK(r.value == ExtNat::finite(2));
        CHECK(r.status == Status::exact);
    }
}

TEST_CASE("find_cocyclic_cotrajectories") {
    PrimeField F2(2);
    SUBCASE("Bernoulli finds the coordinate hyperplane first") {
        ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
        auto found = find_cocyclic_cotrajectories(b, 2, 6);
        REQUIRE(!found.empty());
        CHECK(found[0].level == 1);
        CHECK(found[0].space == Subspace::zero(F2, 1));
    }
    SUBCASE("findim flows have none") {
        MatrixGF a(F2, 2, 2, {0, 1, 1, 1});
        CHECK(find_cocyclic_cotrajectories(ProfiniteFlow::findim(a), 3, 8).empty());
    }
    SUBCASE("mixed dual flow hits the Bernoulli component") {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {Poly::t(F2)}, 1));
        auto found = find_cocyclic_cotrajectories(flow, 2, 8);
        CHECK(!found.empty());
    }
}

TEST_CASE("bernoulli conjugacy witness") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    SUBCASE("coordinate functionals on the shift") {
        ConjugacyWitness w = bernoulli_conjugacy(b, first_coordinate_hyperplane(b, 1), 6);
        CHECK(w.all_ok());
        // e_n is the n-th coordinate vector at its chain level
        for (size_t n = 0; n < w.e_vectors.size(); ++n) {
            REQUIRE(w.e_vectors[n].size() == n + 1);
            for (size_t i = 0; i <= n; ++i)
                CHECK(w.e_vectors[n][i] == (i == n ? 1 : 0));
        }
    }
    SUBCASE("stationary opens are rejected") {
        ProfiniteFlow fd = ProfiniteFlow::findim(MatrixGF::identity(F2, 2));
        OpenSubspace u{0, Subspace::from_generators(MatrixGF(F2, 1, 2, {1, 0}))};
        CHECK_THROWS_AS(bernoulli_conjugacy(fd, u, 5), std::invalid_argument);
    }
    SUBCASE("non-cocyclic opens are rejected") {
        ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
        CHECK_THROWS_AS(bernoulli_conjugacy(b2, OpenSubspace{1, Subspace::zero(F2, 2)}, 5),
                        std::invalid_argument);
    }
    SUBCASE("first component hyperplane of the 2-fold shift") {
        ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
        ConjugacyWitness w = bernoulli_conjugacy(b2, first_coordinate_hyperplane(b2, 1), 5);
        CHECK(w.all_ok());
    }
}

TEST_CASE("coindependence") {
    PrimeField F2(2);
    ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
    // the two component hyperplanes at level 1
    OpenSubspace u1{1, Subspace::from_generators(MatrixGF(F2, 1, 2, {0, 1}))};
    OpenSubspace u2{1, Subspace::from_generators(MatrixGF(F2, 1, 2, {1, 0}))};
    SUBCASE("component cotrajectories are coindependent") {
        std::vector<Cotrajectory> cots{cotrajectory(b2, u1, 6), cotrajectory(b2, u2, 6)};
        CoindependenceVerdict v = coindependent_check(b2, cots, 4);
        CHECK(v.ok);
    }
    SUBCASE("a duplicated member fails conclusively") {
        std::vector<Cotrajectory> cots{cotrajectory(b2, u1, 6), cotrajectory(b2, u1, 6)};
        CoindependenceVerdict v = coindependent_check(b2, cots, 4);
        CHECK(!v.ok);
        CHECK(v.failing_index.has_value());
    }
    SUBCASE("singletons are coindependent") {
        std::vector<Cotrajectory> cots{cotrajectory(b2, u1, 6)};
        CHECK(coindependent_check(b2, cots, 4).ok);
    }
    SUBCASE("exact open-family version") {
        CHECK(coindependent_opens(b2, {u1, u2}));
        CHECK(!coindependent_opens(b2, {u1, u1}));
        CHECK(coindependent_opens(b2, {u1}));
    }
}

TEST_CASE("witness preimages: codimension one, coindependent, unit increment") {
    PrimeField F2(2);
    for (int fold = 1; fold <= 2; ++fold) {
        ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, fold);
        OpenSubspace u = first_coordinate_hyperplane(b, 1);
        const int horizon = 6;
        std::vector<OpenSubspace> preimages{u};
        for (int n = 1; n <= horizon; ++n)
            preimages.push_back(preimage_endo(b, preimages.back()));
        for (const OpenSubspace& p : preimages) CHECK(p.codim() == 1);
        CHECK(coindependent_opens(b, preimages));
        EntropyReport r = h_star(b, u, horizon + 2);
        CHECK(r.value == ExtNat::finite(1));
        CHECK(r.status == Status::exact);
    }
}

TEST_CASE("bernoulli witness search") {
    PrimeField F2(2);
    SUBCASE("k-fold Bernoulli yields k witnesses with zero remainder") {
        for (int k = 1; k <= 3; ++k) {
            ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, k);
            BernoulliWitnesses bw = bernoulli_witnesses(b);
            CHECK(bw.count == static_cast<uint32_t>(k));
            CHECK(bw.remainder.value == ExtNat::finite(0));
            CHECK(bw.remainder.status == Status::exact);
            CHECK(!bw.bounds_exhausted);
            CoindependenceVerdict v = coindependent_check(b, bw.cotrajectories, 4);
            CHECK(v.ok);
        }
    }
    SUBCASE("findim flows have no witnesses") {
        MatrixGF a(F2, 2, 2, {1, 1, 0, 1});
        BernoulliWitnesses bw = bernoulli_witnesses(ProfiniteFlow::findim(a));
        CHECK(bw.count == 0);
        CHECK(bw.remainder.status == Status::exact);
    }
    SUBCASE("mixed flow: one witness, torsion remainder") {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {P(F2, {0, 0, 1})}, 1));
        BernoulliWitnesses bw = bernoulli_witnesses(flow);
        CHECK(bw.count == 1);
        CHECK(bw.remainder.value == ExtNat::finite(0));
        CHECK(bw.remainder.status == Status::exact);
    }
    SUBCASE("witness cap reports exhaustion") {
        ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 3);
        BernoulliWitnesses bw = bernoulli_witnesses(b, {.max_witnesses = 2});
        CHECK(bw.count == 2);
        CHECK(bw.bounds_exhausted);
    }
}

TEST_CASE("ent_star") {
    PrimeField F2(2);
    SUBCASE("Bernoulli has entropy 1 by both pipelines") {
        EntStarReport r = ent_star(ProfiniteFlow::bernoulli(F2, 1), EntStrategy::both);
        CHECK(r.structural->value == ExtNat::finite(1));
        CHECK(r.structural->status == Status::exact);
        CHECK(r.witness->value == ExtNat::finite(1));
        CHECK(r.witness->status == Status::exact);
    }
    SUBCASE("findim flows vanish") {
        MatrixGF a(F2, 3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
        EntStarReport r = ent_star(ProfiniteFlow::findim(a), EntStrategy::both);
        CHECK(r.structural->value == ExtNat::finite(0));
        CHECK(r.witness->value == ExtNat::finite(0));
        CHECK(r.witness->status == Status::exact);
    }
    SUBCASE("dual of K[t]^3 + K[t]/(t^4)") {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {P(F2, {0, 0, 0, 0, 1})}, 3));
        EntStarReport r = ent_star(flow, EntStrategy::both);
        CHECK(r.structural->value == ExtNat::finite(3));
        CHECK(r.witness->value == ExtNat::finite(3));
        CHECK(r.witness->status == Status::exact);
    }
}

TEST_CASE("d_plus and the pinsker factor") {
    PrimeField F2(2);
    SUBCASE("mixed flow: D+ is the Bernoulli part") {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {P(F2, {0, 0, 1})}, 1));
        DPlus dp = d_plus(flow);
        CHECK(dp.ambient_torsion_dim == 2);
        CHECK(dp.restricted_flow.module_side()->free_rank == 1);
        // level dims of the embedded subspace grow like the Bernoulli part
        for (int k = 1; k <= 5; ++k) CHECK(dp.level_subspace(k).dim() == k);
        // the subspace is invariant under the level action: M maps D+ at
        // level k+1 into D+ at level k
        for (int k = 1; k <= 4; ++k) {
            Subspace img = image(flow.level(k).act, dp.level_subspace(k + 1));
            CHECK(dp.level_subspace(k).contains(img));
        }
        ProfiniteFlow pf = pinsker_factor(flow);
        CHECK(pf.kind() == FlowKind::findim);
        CHECK(pf.level_dim(0) == 2);
        CHECK(ent_star(pf, EntStrategy::structural).structural->value == ExtNat::finite(0));
    }
    SUBCASE("findim: D+ vanishes, the factor is everything") {
        ProfiniteFlow fd = ProfiniteFlow::findim(MatrixGF::identity(F2, 2));
        DPlus dp = d_plus(fd);
        CHECK(dp.level_subspace(3).is_zero());
        CHECK(pinsker_factor(fd).level_dim(0) == 2);
    }
    SUBCASE("Bernoulli: D+ is everything, the factor vanishes") {
        ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
        DPlus dp = d_plus(b);
        for (int k = 1; k <= 4; ++k) CHECK(dp.level_subspace(k).is_full());
        CHECK(pinsker_factor(b).level_dim(0) == 0);
    }
}

TEST_CASE("restricted D+ flows have no proper invariant opens") {
    PrimeField F2(2);
    // hyperplane-generated search over GF(2) at levels <= 4: an invariant
    // proper open would show up as a stationary hyperplane cotrajectory
    for (int fold = 1; fold <= 2; ++fold) {
        ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
            cyclic_plus_free(F2, {Poly::t(F2)}, fold));
        ProfiniteFlow restricted = d_plus(flow).restricted_flow;
        for_each_cocyclic_candidate(restricted, 4, [&](const OpenSubspace& u) {
            Cotrajectory cot =
                cotrajectory(restricted, u, *restricted.non_stationarity_bound() + 2);
            CHECK(!cot.stationary_at.has_value());
            CHECK(cot.certified_nonstationary);
            return true;
        });
    }
}

TEST_CASE("powered flows") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    for (int k = 2; k <= 4; ++k) {
        ProfiniteFlow bk = b.power(k);
        CHECK(bk.window() == k);
        // level action is the k-step shift
        LevelData ld = bk.level(1);
        CHECK(ld.act.rows() == 1);
        CHECK(ld.act.cols() == 1 + k);
        CHECK(ld.act.at(0, k) == 1);
        EntStarReport r = ent_star(bk, EntStrategy::both, {.max_level = k + 1});
        CHECK(r.structural->value == ExtNat::finite(static_cast<uint32_t>(k)));
        CHECK(r.witness->value == ExtNat::finite(static_cast<uint32_t>(k)));
        CHECK(r.witness->status == Status::exact);
    }
}

TEST_CASE("periodic descriptor") {
    PrimeField F2(2);
    MatrixGF act(F2, 2, 2, {0, 1, 1, 0});
    LevelData entry{2, MatrixGF::identity(F2, 2), act};
    PeriodicData pd{1, {}, {entry}};
    ProfiniteFlow flow = ProfiniteFlow::periodic(F2, pd, "swap");

    SUBCASE("levels cycle") {
        CHECK(flow.level_dim(5) == 2);
        CHECK(flow.level(3).act == act);
    }
    SUBCASE("structural strategy is unsupported") {
        CHECK_THROWS_AS(ent_star(flow, EntStrategy::structural), UnsupportedDescriptor);
        CHECK_THROWS_AS(d_plus(flow), UnsupportedDescriptor);
        CHECK_THROWS_AS(pinsker_factor(flow), UnsupportedDescriptor);
    }
    SUBCASE("witness strategy reports a lower bound") {
        EntStarReport r = ent_star(flow, EntStrategy::witness);
        CHECK(r.witness->value == ExtNat::finite(0));
        CHECK(r.witness->status == Status::lower_bound);
    }
    SUBCASE("invalid level data is rejected") {
        MatrixGF bad_proj(F2, 2, 2);  // zero matrix, not surjective
        PeriodicData bad{1, {}, {LevelData{2, bad_proj, act}}};
        CHECK_THROWS_AS(ProfiniteFlow::periodic(F2, bad), ParseError);
    }
}

TEST_CASE("annihilators of coordinate hyperplanes") {
    PrimeField F2(2);
    ProfiniteFlow b = ProfiniteFlow::bernoulli(F2, 1);
    auto gens = annihilator_generators(b, first_coordinate_hyperplane(b, 1));
    REQUIRE(gens.size() == 1);
    CHECK(gens[0] == PolyVec{Poly::constant(F2, 1)});

    // codim matches the annihilator dimension on deeper opens
    ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 2);
    OpenSubspace u{2, Subspace::from_generators(MatrixGF(F2, 1, 4, {1, 1, 0, 1}))};
    CHECK(annihilator_generators(b2, u).size() == static_cast<size_t>(u.codim()));
}

TEST_CASE("witness search skips torsion-first candidates") {
    // in smith coordinates the torsion slot comes first, so the search sees
    // a stationary candidate before the free one
    PrimeField F2(2);
    ProfiniteFlow flow = ProfiniteFlow::dual_of_module(
        cyclic_plus_free(F2, {P(F2, {0, 0, 0, 0, 1})}, 1));  // K[t]/(t^4) + K[t]
    BernoulliWitnesses bw = bernoulli_witnesses(flow);
    REQUIRE(bw.count == 1);
    CHECK(bw.remainder.value == ExtNat::finite(0));
    // the accepted hyperplane kills the free coordinate, not the torsion one
    const OpenSubspace& u = bw.witnesses[0];
    CHECK(u.level == 1);
    auto gens = annihilator_generators(flow, u);
    REQUIRE(gens.size() == 1);
    ModulePresentation sub = submodule_presentation(flow.module_side()->presentation, gens);
    CHECK(module_rank(sub) == 1);
}

TEST_CASE("deep torsion keeps certification honest") {
    PrimeField F2(2);
    std::vector<uint32_t> t12(13, 0);
    t12[12] = 1;
    ProfiniteFlow flow =
        ProfiniteFlow::dual_of_module(cyclic_plus_free(F2, {Poly(F2, t12)}, 1));
    CHECK(*flow.non_stationarity_bound() == 12);
    BernoulliWitnesses bw = bernoulli_witnesses(flow, {.horizon = 4});  // chain auto-extends
    CHECK(bw.count == 1);
    CHECK(bw.remainder.status == Status::exact);
    EntStarReport es = ent_star(flow, EntStrategy::both);
    CHECK(es.structural->value == ExtNat::finite(1));
    CHECK(es.witness->value == ExtNat::finite(1));
    CHECK(es.witness->status == Status::exact);
}

TEST_CASE("conjugacy data works on powered flows") {
    PrimeField F2(2);
    ProfiniteFlow b2 = ProfiniteFlow::bernoulli(F2, 1).power(2);
    OpenSubspace u = first_coordinate_hyperplane(b2, 1);
    Cotrajectory cot = cotrajectory(b2, u, 6);
    CHECK(!cot.stationary_at.has_value());
    ConjugacyWitness w = bernoulli_conjugacy(b2, u, 5);
    CHECK(w.all_ok());
}

TEST_CASE("periodic flows with window 2") {
    PrimeField F2(2);
    MatrixGF act(F2, 2, 2, {1, 1, 0, 1});
    PeriodicData pd{2, {}, {LevelData{2, MatrixGF::identity(F2, 2), act}}};
    ProfiniteFlow flow = ProfiniteFlow::periodic(F2, pd, "win2");
    CHECK(flow.window() == 2);
    OpenSubspace u{0, Subspace::from_generators(MatrixGF(F2, 1, 2, {1, 0}))};
    Cotrajectory cot = cotrajectory(flow, u, 8);
    CHECK(cot.stationary_at.has_value());  // finite-dimensional space
    EntropyReport hs = h_star(flow, u, 8);
    CHECK(hs.value == ExtNat::finite(0));
    CHECK(hs.status == Status::exact);
}
