#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "flowent/errors.hpp"

namespace flowent {

/// The prime field GF(p), 2 <= p <= 2^31 - 1. Elements are canonical
/// residues in [0, p) stored as uint32_t.
class PrimeField {
  public:
    explicit PrimeField(uint32_t p);

    uint32_t modulus() const { return p_; }

    uint32_t add(uint32_t a, uint32_t b) const {
        uint32_t s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    uint32_t sub(uint32_t a, uint32_t b) const { return a >= b ? a - b : a + (p_ - b); }
    uint32_t neg(uint32_t a) const { return a == 0 ? 0 : p_ - a; }
    uint32_t mul(uint32_t a, uint32_t b) const {
        return static_cast<uint32_t>(static_cast<uint64_t>(a) * b % p_);
    }
    uint32_t inv(uint32_t a) const;
    uint32_t div(uint32_t a, uint32_t b) const { return mul(a, inv(b)); }
    uint32_t reduce(int64_t v) const {
        int64_t r = v % static_cast<int64_t>(p_);
        return static_cast<uint32_t>(r < 0 ? r + p_ : r);
    }

    bool operator==(const PrimeField&) const = default;

  private:
    uint32_t p_;
};

using VecGF = std::vector<uint32_t>;

/// Dense row-major matrix over GF(p).
class MatrixGF {
  public:
    MatrixGF(PrimeField field, int rows, int cols)
        : field_(field), rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0) {
        FLOWENT_CHECK(rows >= 0 && cols >= 0, "matrix shape must be non-negative");
    }
    MatrixGF(PrimeField field, int rows, int cols, std::vector<uint32_t> entries);
    static MatrixGF identity(PrimeField field, int n);
    static MatrixGF from_rows(PrimeField field, int cols,
                              const std::vector<std::vector<uint32_t>>& rows);

    const PrimeField& field() const { return field_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    uint32_t at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    uint32_t& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const uint32_t* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
    uint32_t* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    std::span<const uint32_t> row_span(int r) const { return {row(r), static_cast<size_t>(cols_)}; }
    const std::vector<uint32_t>& data() const { return data_; }

    void swap_rows(int a, int b);
    MatrixGF transpose() const;
    bool is_zero() const;

    bool operator==(const MatrixGF&) const = default;

  private:
    PrimeField field_;
    int rows_;
    int cols_;
    std::vector<uint32_t> data_;
};

MatrixGF mul(const MatrixGF& a, const MatrixGF& b);
VecGF mul_vec(const MatrixGF& a, std::span<const uint32_t> v);
MatrixGF stack_rows(const MatrixGF& top, const MatrixGF& bottom);
std::string to_string(const MatrixGF& m);

struct RrefResult {
    MatrixGF echelon;        // unique reduced row-echelon form, same shape
    int rank;                // number of nonzero rows
    std::vector<int> pivots; // pivot column of each nonzero row
};

RrefResult rref(const MatrixGF& m);

/// A K-subspace of K^d held as its reduced row-echelon basis, which makes
/// equality a plain data comparison.
class Subspace {
  public:
    static Subspace zero(PrimeField field, int ambient_dim);
    static Subspace full(PrimeField field, int ambient_dim);
    /// Span of the rows of `generators`.
    static Subspace from_generators(const MatrixGF& generators);

    const PrimeField& field() const { return basis_.field(); }
    int ambient_dim() const { return basis_.cols(); }
    int dim() const { return basis_.rows(); }
    int codim() const { return ambient_dim() - dim(); }
    const MatrixGF& basis() const { return basis_; }
    const std::vector<int>& pivots() const { return pivots_; }

    bool contains(std::span<const uint32_t> v) const;
    bool contains(const Subspace& other) const;
    bool is_full() const { return dim() == ambient_dim(); }
    bool is_zero() const { return dim() == 0; }

    bool operator==(const Subspace& other) const {
        return basis_ == other.basis_;
    }

  private:
    Subspace(MatrixGF basis, std::vector<int> pivots)
        : basis_(std::move(basis)), pivots_(std::move(pivots)) {}
    MatrixGF basis_;
    std::vector<int> pivots_;
};

Subspace subspace_sum(const Subspace& a, const Subspace& b);
Subspace subspace_intersect(const Subspace& a, const Subspace& b);

/// Right null space {v : m v = 0} of m, inside K^cols.
Subspace kernel(const MatrixGF& m);

/// {v : m v in s}; requires s.ambient_dim == m.rows.
Subspace preimage(const MatrixGF& m, const Subspace& s);

/// Span of {m v : v in s}, inside K^rows.
Subspace image(const MatrixGF& m, const Subspace& s);

/// dim(ambient) - dim(sub); throws std::invalid_argument unless sub is
/// contained in ambient.
int quotient_dim(const Subspace& ambient, const Subspace& sub);

/// Rows spanning {f : f v = 0 for all v in s} under the standard bilinear
/// form; s equals the solution set of the returned constraint rows.
MatrixGF annihilator_rows(const Subspace& s);

/// One solution x of m x = b, if any.
std::optional<VecGF> solve(const MatrixGF& m, std::span<const uint32_t> b);

/// First standard basis vector outside a proper subspace.
VecGF vector_outside(const Subspace& s);

/// The hyperplane {x : <normal, x> = 0}.
Subspace hyperplane(PrimeField field, std::span<const uint32_t> normal);

/// Visits every hyperplane normal of K^d exactly once, as the lexicographic
/// stream of tuples whose first nonzero coordinate is 1: leads later in the
/// tuple come first, suffixes count up in lexicographic order. The callable
/// may return void, or bool with false meaning stop.
template <class F>
void for_each_hyperplane_normal(const PrimeField& field, int d, F&& f) {
    const uint32_t p = field.modulus();
    auto emit = [&](const VecGF& v) {
        if constexpr (std::is_same_v<decltype(f(std::span<const uint32_t>(v))), bool>) {
            return f(std::span<const uint32_t>(v));
        } else {
            f(std::span<const uint32_t>(v));
            return true;
        }
    };
    for (int lead = d - 1; lead >= 0; --lead) {
        VecGF v(static_cast<size_t>(d), 0);
        v[static_cast<size_t>(lead)] = 1;
        for (;;) {
            if (!emit(v)) return;
            int i = d - 1;  // suffix odometer over positions right of the lead
            while (i > lead) {
                if (++v[static_cast<size_t>(i)] < p) break;
                v[static_cast<size_t>(i)] = 0;
                --i;
            }
            if (i == lead) break;
        }
    }
}

}  // namespace flowent
