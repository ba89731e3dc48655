#include "flowent/duality.hpp"

#include <random>

#include "doctest.h"

using namespace flowent;

namespace {

Poly P(PrimeField F, std::vector<uint32_t> c) { return Poly(F, std::move(c)); }

ModulePresentation random_presentation(PrimeField F, std::mt19937& rng, int max_g = 3,
                                       int max_deg = 2) {
    int g = static_cast<int>(rng() % max_g) + 1;
    int m = static_cast<int>(rng() % 3);
    PolyMatrix rel(F, g, m);
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < m; ++c) {
            std::vector<uint32_t> coeffs;
            int deg = static_cast<int>(rng() % (max_deg + 2)) - 1;
            for (int i = 0; i <= deg; ++i) coeffs.push_back(rng() % F.modulus());
            rel.at(r, c) = Poly(F, coeffs);
        }
    return ModulePresentation(F, g, rel);
}

}  // namespace

TEST_CASE("dual_of_module level dimensions") {
    PrimeField F2(2);
    SUBCASE("free rank 1 is the Bernoulli shift") {
        DualityContext ctx(ModulePresentation::free_module(F2, 1));
        for (int k = 0; k <= 6; ++k) CHECK(ctx.dual_flow().level_dim(k) == k);
    }
    SUBCASE("K[t]/(t^2) is two-dimensional with nilpotent transposed action") {
        DualityContext ctx(ModulePresentation::direct_sum_of_cyclic(F2, {P(F2, {0, 0, 1})}, 0));
        CHECK(ctx.dual_flow().level_dim(5) == 2);
        LevelData l5 = ctx.dual_flow().level(5);
        MatrixGF sq = mul(l5.act, ctx.dual_flow().level(6).act);
        CHECK(sq.is_zero());
    }
    SUBCASE("K[t]/(t) + K[t]^2 has level dims 1 + 2k") {
        DualityContext ctx(ModulePresentation::direct_sum_of_cyclic(F2, {Poly::t(F2)}, 2));
        for (int k = 1; k <= 5; ++k) CHECK(ctx.dual_flow().level_dim(k) == 1 + 2 * k);
    }
}

TEST_CASE("annihilator pairs the Bernoulli hyperplane with span{1}") {
    PrimeField F2(2);
    DualityContext ctx(ModulePresentation::free_module(F2, 1));
    OpenSubspace u{1, Subspace::zero(F2, 1)};  // {x_0 = 0}
    FiniteSubspaceOfW f = ctx.annihilator(u);
    REQUIRE(f.dim() == 1);
    CHECK(f.generators[0] == PolyVec{Poly::constant(F2, 1)});

    CHECK(ctx.annihilator(full_open(ctx.dual_flow())).dim() == 0);
    CHECK(open_equal(ctx.dual_flow(), ctx.co_annihilator(FiniteSubspaceOfW{}),
                     full_open(ctx.dual_flow())));
}

TEST_CASE("annihilator and co_annihilator invert each other") {
    std::mt19937 rng(1234);
    for (uint32_t p : {2u, 3u}) {
        PrimeField F(p);
        for (int trial = 0; trial < 15; ++trial) {
            DualityContext ctx(random_presentation(F, rng));
            const ProfiniteFlow& dual = ctx.dual_flow();
            for (int level = 1; level <= 3; ++level) {
                int dim = dual.level_dim(level);
                if (dim == 0) continue;
                MatrixGF rows(F, std::min(2, dim), dim);
                for (int r = 0; r < rows.rows(); ++r)
                    for (int c = 0; c < dim; ++c) rows.at(r, c) = rng() % p;
                OpenSubspace u{level, kernel(rows)};
                FiniteSubspaceOfW f = ctx.annihilator(u);
                CHECK(f.dim() == u.codim());
                CHECK(open_equal(dual, ctx.co_annihilator(f), u));
            }
        }
    }
}

TEST_CASE("annihilators reverse inclusions") {
    PrimeField F2(2);
    std::mt19937 rng(77);
    DualityContext ctx(ModulePresentation::free_module(F2, 2));
    const ProfiniteFlow& dual = ctx.dual_flow();
    for (int trial = 0; trial < 10; ++trial) {
        int level = 2;
        int dim = dual.level_dim(level);
        MatrixGF rows(F2, 2, dim);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < dim; ++c) rows.at(r, c) = rng() % 2;
        OpenSubspace small{level, kernel(rows)};
        MatrixGF one_row(F2, 1, dim);
        for (int c = 0; c < dim; ++c) one_row.at(0, c) = rows.at(0, c);
        OpenSubspace big{level, kernel(one_row)};
        REQUIRE(big.space.contains(small.space));
        FiniteSubspaceOfW ann_small = ctx.annihilator(small);
        FiniteSubspaceOfW ann_big = ctx.annihilator(big);
        // U1 <= U2 implies ann(U2) <= ann(U1)
        AlgebraicFlow wf = ctx.module_flow();
        for (const PolyVec& g : ann_big.generators)
            CHECK(span_contains(wf, ann_small, g));
    }
}

TEST_CASE("double dual returns the original level data") {
    std::mt19937 rng(99);
    for (uint32_t p : {2u, 3u}) {
        PrimeField F(p);
        for (int trial = 0; trial < 10; ++trial) {
            DualityContext ctx(random_presentation(F, rng));
            CHECK(double_dual_levels_match(ctx, 6));
        }
    }
}

TEST_CASE("bridge_check on fixed flows") {
    PrimeField F2(2);
    SUBCASE("rank-1 presentation with one relation column") {
        PolyMatrix rel(F2, 2, 1);
        rel.at(0, 0) = Poly::t(F2);
        BridgeReport rep = bridge_check(ModulePresentation(F2, 2, rel));
        CHECK(rep.algebraic.value == ExtNat::finite(1));
        CHECK(rep.ok());
    }
    SUBCASE("zero module") {
        BridgeReport rep = bridge_check(ModulePresentation::free_module(F2, 0));
        CHECK(rep.algebraic.value == ExtNat::finite(0));
        CHECK(rep.ok());
    }
    SUBCASE("free rank 3") {
        BridgeReport rep = bridge_check(ModulePresentation::free_module(F2, 3));
        CHECK(rep.algebraic.value == ExtNat::finite(3));
        CHECK(rep.structural.value == ExtNat::finite(3));
        CHECK(rep.witness.value == ExtNat::finite(3));
        CHECK(rep.ok());
    }
    SUBCASE("seeded extra samples stay consistent") {
        BridgeReport rep = bridge_check(ModulePresentation::free_module(F2, 2), 6, 3,
                                        uint64_t{20240601});
        CHECK(rep.ok());
        CHECK(rep.evidence.size() > 3);
    }
}

TEST_CASE("pinsker duality on fixed flows") {
    PrimeField F2(2);
    SUBCASE("K[t]/(t^2) + K[t]") {
        PinskerDualityReport rep = pinsker_duality_check(
            ModulePresentation::direct_sum_of_cyclic(F2, {P(F2, {0, 0, 1})}, 1));
        CHECK(rep.ok());
        CHECK(rep.pinsker_factor_dim == 2);
    }
    SUBCASE("pure torsion: D+ vanishes, the factor is everything") {
        PinskerDualityReport rep = pinsker_duality_check(
            ModulePresentation::direct_sum_of_cyclic(F2, {P(F2, {1, 1}), P(F2, {1, 1, 0, 1})}, 0));
        CHECK(rep.ok());
        CHECK(rep.pinsker_factor_dim == 4);
    }
    SUBCASE("free module: D+ is everything, the factor vanishes") {
        PinskerDualityReport rep =
            pinsker_duality_check(ModulePresentation::free_module(F2, 2));
        CHECK(rep.ok());
        CHECK(rep.pinsker_factor_dim == 0);
    }
}

TEST_CASE("zero entropy duality") {
    PrimeField F2(2);
    SUBCASE("torsion module: both vanish") {
        ZeroEntropyReport rep = zero_entropy_duality_check(
            ModulePresentation::direct_sum_of_cyclic(F2, {P(F2, {0, 0, 0, 1})}, 0));
        CHECK(rep.equivalent);
        CHECK(rep.algebraic.value == ExtNat::finite(0));
        CHECK(rep.topological.value == ExtNat::finite(0));
    }
    SUBCASE("Bernoulli: both positive") {
        ZeroEntropyReport rep =
            zero_entropy_duality_check(ModulePresentation::free_module(F2, 1));
        CHECK(rep.equivalent);
        CHECK(rep.algebraic.value == ExtNat::finite(1));
        CHECK(rep.topological.value == ExtNat::finite(1));
    }
    SUBCASE("random torsion presentations vanish on both sides") {
        std::mt19937 rng(5);
        PrimeField F3(3);
        for (int trial = 0; trial < 10; ++trial) {
            // make a relation matrix with full column support so rank is 0
            int g = static_cast<int>(rng() % 2) + 1;
            std::vector<Poly> factors;
            for (int i = 0; i < g; ++i) {
                std::vector<uint32_t> coeffs;
                for (int d = 0; d < 1 + static_cast<int>(rng() % 3); ++d)
                    coeffs.push_back(rng() % 3);
                coeffs.push_back(1);  // monic, degree >= 1
                factors.push_back(Poly(F3, coeffs));
            }
            ZeroEntropyReport rep = zero_entropy_duality_check(
                ModulePresentation::direct_sum_of_cyclic(F3, factors, 0));
            CHECK(rep.equivalent);
            CHECK(rep.algebraic.value == ExtNat::finite(0));
        }
    }
}

TEST_CASE("D+ double characterization") {
    std::mt19937 rng(31);
    for (uint32_t p : {2u, 3u}) {
        PrimeField F(p);
        for (int trial = 0; trial < 8; ++trial) {
            DualityContext ctx(random_presentation(F, rng));
            DPlusCharacterization rep = d_plus_characterization(ctx, 6);
            CHECK(rep.join_ok);
            CHECK(rep.meet_ok);
        }
    }
}

TEST_CASE("bridge holds on random presentations") {
    std::mt19937 rng(424242);
    for (uint32_t p : {2u, 3u}) {
        PrimeField F(p);
        for (int trial = 0; trial < 8; ++trial) {
            BridgeReport rep = bridge_check(random_presentation(F, rng), 6);
            CHECK(rep.ok());
        }
    }
}

TEST_CASE("bridge holds over GF(5) too") {
    PrimeField F5(5);
    std::mt19937 rng(555);
    for (int trial = 0; trial < 4; ++trial) {
        int g = static_cast<int>(rng() % 3) + 1;
        PolyMatrix rel(F5, g, static_cast<int>(rng() % 3));
        for (int r = 0; r < rel.rows(); ++r)
            for (int c = 0; c < rel.cols(); ++c) {
                std::vector<uint32_t> coeffs;
                int deg = static_cast<int>(rng() % 4) - 1;
                for (int i = 0; i <= deg; ++i) coeffs.push_back(rng() % 5);
                rel.at(r, c) = Poly(F5, coeffs);
            }
        BridgeReport rep = bridge_check(ModulePresentation(F5, g, rel), 6);
        CHECK(rep.ok());
    }
}
