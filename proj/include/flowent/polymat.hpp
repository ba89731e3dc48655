#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowent/poly.hpp"

namespace flowent {

/// Dense row-major matrix over GF(p)[t].
class PolyMatrix {
  public:
    PolyMatrix(PrimeField field, int rows, int cols)
        : field_(field), rows_(rows), cols_(cols),
          data_(static_cast<size_t>(rows) * cols, Poly(field)) {}
    static PolyMatrix identity(PrimeField field, int n);

    const PrimeField& field() const { return field_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Poly& at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    Poly& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    bool is_zero() const;
    PolyMatrix transpose() const;
    std::vector<Poly> column(int c) const;

    bool operator==(const PolyMatrix&) const = default;

  private:
    PrimeField field_;
    int rows_;
    int cols_;
    std::vector<Poly> data_;
};

PolyMatrix mul(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix hstack(const PolyMatrix& left, const PolyMatrix& right);
std::string to_string(const PolyMatrix& m);
Poly determinant(const PolyMatrix& m);
/// Rank of m over the fraction field K(t), by fraction-free elimination.
int rank_over_fractions(const PolyMatrix& m);

using PolyVec = std::vector<Poly>;
PolyVec mul_vec(const PolyMatrix& m, const PolyVec& v);

struct HermitePivot {
    int row;
    int col;
};

/// Column-echelon Hermite form: h = a * transform with transform
/// unimodular, monic pivots, and every other entry in a pivot row of
/// degree strictly below the pivot degree.
struct HermiteResult {
    PolyMatrix h;
    PolyMatrix transform;
    std::vector<HermitePivot> pivots;
};
HermiteResult hermite_form(const PolyMatrix& a);

/// Smith normal form u * a * v = diag(factors), factors monic nonzero with
/// d_i | d_{i+1}; free_rank = rows - #factors.
struct SmithForm {
    std::vector<Poly> factors;
    int free_rank;
    PolyMatrix u, u_inv;
    PolyMatrix v, v_inv;
};
SmithForm smith_form(const PolyMatrix& a);
PolyMatrix smith_diagonal(const SmithForm& sf, int rows, int cols, PrimeField field);

/// A finitely presented K[t]-module W = K[t]^g / colspan(relations); the
/// flow endomorphism is multiplication by t. Hermite and Smith data of the
/// relation matrix are computed eagerly and shared.
class ModulePresentation {
  public:
    ModulePresentation(PrimeField field, int generators, PolyMatrix relations);
    static ModulePresentation free_module(PrimeField field, int rank);
    static ModulePresentation direct_sum_of_cyclic(PrimeField field,
                                                   const std::vector<Poly>& torsion_factors,
                                                   int free_rank);

    const PrimeField& field() const { return field_; }
    int generators() const { return generators_; }
    const PolyMatrix& relations() const { return relations_; }
    const HermiteResult& hermite() const { return forms_->hermite; }
    const SmithForm& smith() const { return forms_->smith; }

    /// Torsion-free rank: generators - #nonzero invariant factors.
    int rank() const;
    /// Non-unit invariant factors of the relation matrix.
    std::vector<Poly> torsion_factors() const;
    /// dim_K of the torsion submodule.
    int torsion_k_dim() const;
    bool is_zero_module() const { return rank() == 0 && torsion_k_dim() == 0; }

  private:
    struct Forms {
        HermiteResult hermite;
        SmithForm smith;
    };
    PrimeField field_;
    int generators_;
    PolyMatrix relations_;
    std::shared_ptr<const Forms> forms_;
};

int module_rank(const ModulePresentation& w);

/// Unique coset representative of v modulo the relation span; K-linear and
/// idempotent. Throws std::invalid_argument on coordinate-count mismatch.
PolyVec canonical_form(const PolyVec& v, const ModulePresentation& w);
bool in_relation_span(const PolyVec& v, const ModulePresentation& w);

struct TorsionPart {
    ModulePresentation presentation;        // direct sum of K[t]/(d_i)
    std::vector<PolyVec> embedding;         // its generators in W coordinates
    std::vector<Poly> invariant_factors;    // the non-unit d_i
    int k_dimension;                        // sum of their degrees
};
TorsionPart torsion_submodule(const ModulePresentation& w);

/// Presentation of the submodule of W generated by `gens` (kernel of the
/// evaluation map K[t]^k -> W computed by a syzygy of [G | relations]).
ModulePresentation submodule_presentation(const ModulePresentation& w,
                                          const std::vector<PolyVec>& gens);

/// Presentation of W / <gens> (relations augmented by the generators).
ModulePresentation quotient_presentation(const ModulePresentation& w,
                                         const std::vector<PolyVec>& gens);

/// W viewed as a module over K[t^k]: g*k generators e_i t^j, relations
/// obtained by splitting each original relation column into t-residue
/// classes. Generator (i, j) sits at index i*k + j.
ModulePresentation restriction_presentation(const ModulePresentation& w, int k);
/// Coordinates of an element of W in the restriction presentation.
PolyVec restrict_element(const PolyVec& v, int k, PrimeField field);

}  // namespace flowent
