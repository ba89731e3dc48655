#include "flowent/gfp.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "flowent/kernels.hpp"

namespace flowent {
namespace {

bool is_prime(uint32_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

PrimeField::PrimeField(uint32_t p) : p_(p) {
    if (p < 2 || p > 0x7fffffffu || !is_prime(p))
        throw std::invalid_argument("field modulus must be a prime in [2, 2^31 - 1]");
}

uint32_t PrimeField::inv(uint32_t a) const {
    if (a == 0) throw std::invalid_argument("inverse of zero in GF(p)");
    // extended Euclid on (a, p)
    int64_t t = 0, new_t = 1;
    int64_t r = p_, new_r = a;
    while (new_r != 0) {
        int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    return reduce(t);
}

MatrixGF::MatrixGF(PrimeField field, int rows, int cols, std::vector<uint32_t> entries)
    : field_(field), rows_(rows), cols_(cols), data_(std::move(entries)) {
    FLOWENT_CHECK(data_.size() == static_cast<size_t>(rows) * cols,
                  "matrix entry count must equal rows*cols");
    for (uint32_t& e : data_)
        FLOWENT_CHECK(e < field_.modulus(), "matrix entry out of range");
}

MatrixGF MatrixGF::identity(PrimeField field, int n) {
    MatrixGF m(field, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

MatrixGF MatrixGF::from_rows(PrimeField field, int cols,
                             const std::vector<std::vector<uint32_t>>& rows) {
    MatrixGF m(field, static_cast<int>(rows.size()), cols);
    for (size_t r = 0; r < rows.size(); ++r) {
        FLOWENT_CHECK(rows[r].size() == static_cast<size_t>(cols), "row length mismatch");
        for (int c = 0; c < cols; ++c) m.at(static_cast<int>(r), c) = rows[r][c] % field.modulus();
    }
    return m;
}

void MatrixGF::swap_rows(int a, int b) {
    if (a == b) return;
    std::swap_ranges(row(a), row(a) + cols_, row(b));
}

MatrixGF MatrixGF::transpose() const {
    MatrixGF t(field_, cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
    return t;
}

bool MatrixGF::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](uint32_t e) { return e == 0; });
}

MatrixGF mul(const MatrixGF& a, const MatrixGF& b) {
    FLOWENT_CHECK(a.cols() == b.rows(), "matrix product shape mismatch");
    FLOWENT_CHECK(a.field() == b.field(), "matrix product field mismatch");
    MatrixGF c(a.field(), a.rows(), b.cols());
    const uint32_t p = a.field().modulus();
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
            if (uint32_t f = a.at(i, k); f != 0)
                gfp::row_axpy(c.row(i), b.row(k), f, static_cast<size_t>(b.cols()), p);
    return c;
}

VecGF mul_vec(const MatrixGF& a, std::span<const uint32_t> v) {
    FLOWENT_CHECK(static_cast<size_t>(a.cols()) == v.size(), "matrix-vector shape mismatch");
    const uint32_t p = a.field().modulus();
    VecGF out(static_cast<size_t>(a.rows()), 0);
    for (int i = 0; i < a.rows(); ++i) {
        uint64_t acc = 0;
        const uint32_t* r = a.row(i);
        for (int j = 0; j < a.cols(); ++j) {
            acc += static_cast<uint64_t>(r[j]) * v[static_cast<size_t>(j)] % p;
            if (acc >= (uint64_t(1) << 62)) acc %= p;
        }
        out[static_cast<size_t>(i)] = static_cast<uint32_t>(acc % p);
    }
    return out;
}

MatrixGF stack_rows(const MatrixGF& top, const MatrixGF& bottom) {
    FLOWENT_CHECK(top.cols() == bottom.cols() && top.field() == bottom.field(),
                  "stack_rows shape mismatch");
    MatrixGF m(top.field(), top.rows() + bottom.rows(), top.cols());
    for (int r = 0; r < top.rows(); ++r)
        std::copy(top.row(r), top.row(r) + top.cols(), m.row(r));
    for (int r = 0; r < bottom.rows(); ++r)
        std::copy(bottom.row(r), bottom.row(r) + bottom.cols(), m.row(top.rows() + r));
    return m;
}

std::string to_string(const MatrixGF& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols() << " over GF(" << m.field().modulus() << ")";
    for (int r = 0; r < m.rows(); ++r) {
        os << "\n  [";
        for (int c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m.at(r, c);
        os << "]";
    }
    return os.str();
}

RrefResult rref(const MatrixGF& input) {
    MatrixGF m = input;
    const PrimeField& F = m.field();
    const uint32_t p = F.modulus();
    const size_t width = static_cast<size_t>(m.cols());
    std::vector<int> pivots;
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int pr = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (m.at(r, col) != 0) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        m.swap_rows(rank, pr);
        if (uint32_t lead = m.at(rank, col); lead != 1)
            gfp::row_scale(m.row(rank), F.inv(lead), width, p);
        for (int r = 0; r < m.rows(); ++r) {
            if (r == rank) continue;
            if (uint32_t f = m.at(r, col); f != 0)
                gfp::row_axpy(m.row(r), m.row(rank), F.neg(f), width, p);
        }
        pivots.push_back(col);
        ++rank;
    }
    return {std::move(m), rank, std::move(pivots)};
}

Subspace Subspace::zero(PrimeField field, int ambient_dim) {
    return Subspace(MatrixGF(field, 0, ambient_dim), {});
}

Subspace Subspace::full(PrimeField field, int ambient_dim) {
    std::vector<int> piv(static_cast<size_t>(ambient_dim));
    for (int i = 0; i < ambient_dim; ++i) piv[static_cast<size_t>(i)] = i;
    return Subspace(MatrixGF::identity(field, ambient_dim), std::move(piv));
}

Subspace Subspace::from_generators(const MatrixGF& generators) {
    RrefResult r = rref(generators);
    MatrixGF basis(generators.field(), r.rank, generators.cols());
    for (int i = 0; i < r.rank; ++i)
        std::copy(r.echelon.row(i), r.echelon.row(i) + generators.cols(), basis.row(i));
    return Subspace(std::move(basis), std::move(r.pivots));
}

bool Subspace::contains(std::span<const uint32_t> v) const {
    FLOWENT_CHECK(v.size() == static_cast<size_t>(ambient_dim()), "vector dimension mismatch");
    const PrimeField& F = field();
    VecGF w(v.begin(), v.end());
    for (int i = 0; i < dim(); ++i) {
        uint32_t c = w[static_cast<size_t>(pivots_[static_cast<size_t>(i)])];
        if (c != 0)
            gfp::row_axpy(w.data(), basis_.row(i), F.neg(c), w.size(), F.modulus());
    }
    return std::all_of(w.begin(), w.end(), [](uint32_t e) { return e == 0; });
}

bool Subspace::contains(const Subspace& other) const {
    FLOWENT_CHECK(ambient_dim() == other.ambient_dim(), "ambient dimension mismatch");
    for (int i = 0; i < other.dim(); ++i)
        if (!contains(other.basis_.row_span(i))) return false;
    return true;
}

Subspace subspace_sum(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim() || !(a.field() == b.field()))
        throw std::invalid_argument("subspace_sum: ambient mismatch");
    return Subspace::from_generators(stack_rows(a.basis(), b.basis()));
}

Subspace subspace_intersect(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim() || !(a.field() == b.field()))
        throw std::invalid_argument("subspace_intersect: ambient mismatch");
    // Zassenhaus: rref of [A|A ; B|0]; rows with zero left half carry the
    // intersection in their right half.
    const int d = a.ambient_dim();
    MatrixGF z(a.field(), a.dim() + b.dim(), 2 * d);
    for (int r = 0; r < a.dim(); ++r)
        for (int c = 0; c < d; ++c) {
            z.at(r, c) = a.basis().at(r, c);
            z.at(r, d + c) = a.basis().at(r, c);
        }
    for (int r = 0; r < b.dim(); ++r)
        for (int c = 0; c < d; ++c) z.at(a.dim() + r, c) = b.basis().at(r, c);
    RrefResult e = rref(z);
    std::vector<std::vector<uint32_t>> gens;
    for (int r = 0; r < e.rank; ++r) {
        bool left_zero = true;
        for (int c = 0; c < d && left_zero; ++c) left_zero = e.echelon.at(r, c) == 0;
        if (left_zero)
            gens.emplace_back(e.echelon.row(r) + d, e.echelon.row(r) + 2 * d);
    }
    return Subspace::from_generators(MatrixGF::from_rows(a.field(), d, gens));
}

Subspace kernel(const MatrixGF& m) {
    RrefResult e = rref(m);
    const int n = m.cols();
    std::vector<bool> is_pivot(static_cast<size_t>(n), false);
    for (int c : e.pivots) is_pivot[static_cast<size_t>(c)] = true;
    std::vector<std::vector<uint32_t>> gens;
    const PrimeField& F = m.field();
    for (int j = 0; j < n; ++j) {
        if (is_pivot[static_cast<size_t>(j)]) continue;
        std::vector<uint32_t> v(static_cast<size_t>(n), 0);
        v[static_cast<size_t>(j)] = 1;
        for (int i = 0; i < e.rank; ++i)
            v[static_cast<size_t>(e.pivots[static_cast<size_t>(i)])] = F.neg(e.echelon.at(i, j));
        gens.push_back(std::move(v));
    }
    return Subspace::from_generators(MatrixGF::from_rows(F, n, gens));
}

MatrixGF annihilator_rows(const Subspace& s) {
    return kernel(s.basis()).basis();
}

Subspace preimage(const MatrixGF& m, const Subspace& s) {
    if (s.ambient_dim() != m.rows())
        throw std::invalid_argument("preimage: codomain dimension mismatch");
    if (s.is_full()) return Subspace::full(m.field(), m.cols());
    return kernel(mul(annihilator_rows(s), m));
}

Subspace image(const MatrixGF& m, const Subspace& s) {
    FLOWENT_CHECK(s.ambient_dim() == m.cols(), "image: domain dimension mismatch");
    std::vector<std::vector<uint32_t>> gens;
    gens.reserve(static_cast<size_t>(s.dim()));
    for (int i = 0; i < s.dim(); ++i) gens.push_back(mul_vec(m, s.basis().row_span(i)));
    return Subspace::from_generators(MatrixGF::from_rows(m.field(), m.rows(), gens));
}

int quotient_dim(const Subspace& ambient, const Subspace& sub) {
    if (!ambient.contains(sub))
        throw std::invalid_argument("quotient_dim: sub is not contained in ambient");
    return ambient.dim() - sub.dim();
}

std::optional<VecGF> solve(const MatrixGF& m, std::span<const uint32_t> b) {
    FLOWENT_CHECK(b.size() == static_cast<size_t>(m.rows()), "solve: rhs dimension mismatch");
    MatrixGF aug(m.field(), m.rows(), m.cols() + 1);
    for (int r = 0; r < m.rows(); ++r) {
        std::copy(m.row(r), m.row(r) + m.cols(), aug.row(r));
        aug.at(r, m.cols()) = b[static_cast<size_t>(r)];
    }
    RrefResult e = rref(aug);
    VecGF x(static_cast<size_t>(m.cols()), 0);
    for (int i = 0; i < e.rank; ++i) {
        int pc = e.pivots[static_cast<size_t>(i)];
        if (pc == m.cols()) return std::nullopt;  // inconsistent system
        x[static_cast<size_t>(pc)] = e.echelon.at(i, m.cols());
    }
    return x;
}

VecGF vector_outside(const Subspace& s) {
    FLOWENT_CHECK(!s.is_full(), "vector_outside: subspace is the whole space");
    for (int j = 0; j < s.ambient_dim(); ++j) {
        VecGF e(static_cast<size_t>(s.ambient_dim()), 0);
        e[static_cast<size_t>(j)] = 1;
        if (!s.contains(e)) return e;
    }
    invariant_failure("vector_outside: no standard basis vector escapes a proper subspace");
}

Subspace hyperplane(PrimeField field, std::span<const uint32_t> normal) {
    MatrixGF m(field, 1, static_cast<int>(normal.size()),
               std::vector<uint32_t>(normal.begin(), normal.end()));
    return kernel(m);
}

}  // namespace flowent
