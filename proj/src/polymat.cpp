#include "flowent/polymat.hpp"

#include <algorithm>
#include <sstream>

namespace flowent {

PolyMatrix PolyMatrix::identity(PrimeField field, int n) {
    PolyMatrix m(field, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Poly::constant(field, 1);
    return m;
}

bool PolyMatrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Poly& p) { return p.is_zero(); });
}

PolyMatrix PolyMatrix::transpose() const {
    PolyMatrix t(field_, cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
    return t;
}

std::vector<Poly> PolyMatrix::column(int c) const {
    std::vector<Poly> col;
    col.reserve(static_cast<size_t>(rows_));
    for (int r = 0; r < rows_; ++r) col.push_back(at(r, c));
    return col;
}

PolyMatrix mul(const PolyMatrix& a, const PolyMatrix& b) {
    FLOWENT_CHECK(a.cols() == b.rows(), "poly matrix product shape mismatch");
    PolyMatrix c(a.field(), a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            if (a.at(i, k).is_zero()) continue;
            for (int j = 0; j < b.cols(); ++j)
                if (!b.at(k, j).is_zero())
                    c.at(i, j) = add(c.at(i, j), mul(a.at(i, k), b.at(k, j)));
        }
    return c;
}

PolyMatrix hstack(const PolyMatrix& left, const PolyMatrix& right) {
    FLOWENT_CHECK(left.rows() == right.rows(), "hstack row mismatch");
    PolyMatrix m(left.field(), left.rows(), left.cols() + right.cols());
    for (int r = 0; r < left.rows(); ++r) {
        for (int c = 0; c < left.cols(); ++c) m.at(r, c) = left.at(r, c);
        for (int c = 0; c < right.cols(); ++c) m.at(r, left.cols() + c) = right.at(r, c);
    }
    return m;
}

std::string to_string(const PolyMatrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols() << " over GF(" << m.field().modulus() << ")[t]";
    for (int r = 0; r < m.rows(); ++r) {
        os << "\n  [";
        for (int c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << to_string(m.at(r, c));
        os << "]";
    }
    return os.str();
}

Poly determinant(const PolyMatrix& m) {
    FLOWENT_CHECK(m.rows() == m.cols(), "determinant of a non-square matrix");
    const PrimeField& F = m.field();
    const int n = m.rows();
    if (n == 0) return Poly::constant(F, 1);
    if (n == 1) return m.at(0, 0);
    Poly acc(F);
    for (int j = 0; j < n; ++j) {
        if (m.at(0, j).is_zero()) continue;
        PolyMatrix minor(F, n - 1, n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c)
                if (c != j) minor.at(r - 1, cc++) = m.at(r, c);
        }
        Poly term = mul(m.at(0, j), determinant(minor));
        acc = j % 2 == 0 ? add(acc, term) : sub(acc, term);
    }
    return acc;
}

int rank_over_fractions(const PolyMatrix& input) {
    PolyMatrix m = input;
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int pr = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (!m.at(r, col).is_zero()) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        for (int c = 0; c < m.cols(); ++c) std::swap(m.at(rank, c), m.at(pr, c));
        Poly piv = m.at(rank, col);
        for (int r = rank + 1; r < m.rows(); ++r) {
            Poly f = m.at(r, col);
            if (f.is_zero()) continue;
            // fraction-free: row_r = piv*row_r - f*row_rank
            for (int c = 0; c < m.cols(); ++c)
                m.at(r, c) = sub(mul(piv, m.at(r, c)), mul(f, m.at(rank, c)));
        }
        ++rank;
    }
    return rank;
}

PolyVec mul_vec(const PolyMatrix& m, const PolyVec& v) {
    FLOWENT_CHECK(static_cast<size_t>(m.cols()) == v.size(), "poly matrix-vector shape mismatch");
    PolyVec out(static_cast<size_t>(m.rows()), Poly(m.field()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!m.at(i, j).is_zero() && !v[static_cast<size_t>(j)].is_zero())
                out[static_cast<size_t>(i)] =
                    add(out[static_cast<size_t>(i)], mul(m.at(i, j), v[static_cast<size_t>(j)]));
    return out;
}

namespace {

// Elementary column operations applied to the working matrix and mirrored
// on the accumulated transform (and its inverse when tracked).
struct ColOps {
    PolyMatrix& m;
    PolyMatrix& v;
    PolyMatrix* vinv;  // optional

    void swap_cols(int a, int b) {
        if (a == b) return;
        for (int r = 0; r < m.rows(); ++r) std::swap(m.at(r, a), m.at(r, b));
        for (int r = 0; r < v.rows(); ++r) std::swap(v.at(r, a), v.at(r, b));
        if (vinv)
            for (int c = 0; c < vinv->cols(); ++c) std::swap(vinv->at(a, c), vinv->at(b, c));
    }
    // col_i += q * col_j
    void addmul(int i, int j, const Poly& q) {
        if (q.is_zero()) return;
        for (int r = 0; r < m.rows(); ++r) m.at(r, i) = add(m.at(r, i), mul(q, m.at(r, j)));
        for (int r = 0; r < v.rows(); ++r) v.at(r, i) = add(v.at(r, i), mul(q, v.at(r, j)));
        if (vinv) {
            // inverse op subtracts on the j-th row
            for (int c = 0; c < vinv->cols(); ++c)
                vinv->at(j, c) = sub(vinv->at(j, c), mul(q, vinv->at(i, c)));
        }
    }
    void scale(int i, uint32_t c) {
        if (c == 1) return;
        for (int r = 0; r < m.rows(); ++r) m.at(r, i) = mul(m.at(r, i), c);
        for (int r = 0; r < v.rows(); ++r) v.at(r, i) = mul(v.at(r, i), c);
        if (vinv) {
            uint32_t ci = m.field().inv(c);
            for (int cc = 0; cc < vinv->cols(); ++cc) vinv->at(i, cc) = mul(vinv->at(i, cc), ci);
        }
    }
};

struct RowOps {
    PolyMatrix& m;
    PolyMatrix& u;
    PolyMatrix* uinv;

    void swap_rows(int a, int b) {
        if (a == b) return;
        for (int c = 0; c < m.cols(); ++c) std::swap(m.at(a, c), m.at(b, c));
        for (int c = 0; c < u.cols(); ++c) std::swap(u.at(a, c), u.at(b, c));
        if (uinv)
            for (int r = 0; r < uinv->rows(); ++r) std::swap(uinv->at(r, a), uinv->at(r, b));
    }
    // row_i += q * row_j
    void addmul(int i, int j, const Poly& q) {
        if (q.is_zero()) return;
        for (int c = 0; c < m.cols(); ++c) m.at(i, c) = add(m.at(i, c), mul(q, m.at(j, c)));
        for (int c = 0; c < u.cols(); ++c) u.at(i, c) = add(u.at(i, c), mul(q, u.at(j, c)));
        if (uinv)
            for (int r = 0; r < uinv->rows(); ++r)
                uinv->at(r, j) = sub(uinv->at(r, j), mul(q, uinv->at(r, i)));
    }
    void scale(int i, uint32_t c) {
        if (c == 1) return;
        for (int cc = 0; cc < m.cols(); ++cc) m.at(i, cc) = mul(m.at(i, cc), c);
        for (int cc = 0; cc < u.cols(); ++cc) u.at(i, cc) = mul(u.at(i, cc), c);
        if (uinv) {
            uint32_t ci = m.field().inv(c);
            for (int r = 0; r < uinv->rows(); ++r) uinv->at(r, i) = mul(uinv->at(r, i), ci);
        }
    }
};

}  // namespace

HermiteResult hermite_form(const PolyMatrix& a) {
    PolyMatrix m = a;
    PolyMatrix v = PolyMatrix::identity(a.field(), a.cols());
    ColOps ops{m, v, nullptr};
    std::vector<HermitePivot> pivots;
    int cursor = 0;
    for (int i = 0; i < m.rows() && cursor < m.cols(); ++i) {
        for (;;) {
            int best = -1;
            for (int j = cursor; j < m.cols(); ++j)
                if (!m.at(i, j).is_zero() &&
                    (best < 0 || m.at(i, j).degree() < m.at(i, best).degree()))
                    best = j;
            if (best < 0) break;
            bool clean = true;
            for (int j = cursor; j < m.cols(); ++j) {
                if (j == best || m.at(i, j).is_zero()) continue;
                Poly q = divmod(m.at(i, j), m.at(i, best)).quotient;
                ops.addmul(j, best, neg(q));
                if (!m.at(i, j).is_zero()) clean = false;
            }
            if (!clean) continue;
            ops.swap_cols(cursor, best);
            if (!m.at(i, cursor).is_monic()) ops.scale(cursor, m.field().inv(m.at(i, cursor).lead()));
            // keep earlier pivot columns reduced in this pivot row
            for (const HermitePivot& pv : pivots) {
                if (m.at(i, pv.col).degree() >= m.at(i, cursor).degree()) {
                    Poly q = divmod(m.at(i, pv.col), m.at(i, cursor)).quotient;
                    ops.addmul(pv.col, cursor, neg(q));
                }
            }
            pivots.push_back({i, cursor});
            ++cursor;
            break;
        }
    }
    FLOWENT_CHECK(mul(a, v) == m, "hermite transform self-check failed");
    return {std::move(m), std::move(v), std::move(pivots)};
}

SmithForm smith_form(const PolyMatrix& a) {
    const PrimeField& F = a.field();
    PolyMatrix m = a;
    PolyMatrix u = PolyMatrix::identity(F, a.rows());
    PolyMatrix uinv = PolyMatrix::identity(F, a.rows());
    PolyMatrix v = PolyMatrix::identity(F, a.cols());
    PolyMatrix vinv = PolyMatrix::identity(F, a.cols());
    RowOps rops{m, u, &uinv};
    ColOps cops{m, v, &vinv};

    const int steps = std::min(a.rows(), a.cols());
    int r = 0;
    for (int k = 0; k < steps; ++k) {
        bool have_pivot = false;
        for (;;) {
            int bi = -1, bj = -1;
            for (int i = k; i < m.rows(); ++i)
                for (int j = k; j < m.cols(); ++j)
                    if (!m.at(i, j).is_zero() &&
                        (bi < 0 || m.at(i, j).degree() < m.at(bi, bj).degree())) {
                        bi = i;
                        bj = j;
                    }
            if (bi < 0) break;
            have_pivot = true;
            rops.swap_rows(k, bi);
            cops.swap_cols(k, bj);
            bool dirty = false;
            for (int i = k + 1; i < m.rows(); ++i) {
                if (m.at(i, k).is_zero()) continue;
                Poly q = divmod(m.at(i, k), m.at(k, k)).quotient;
                rops.addmul(i, k, neg(q));
                if (!m.at(i, k).is_zero()) dirty = true;
            }
            for (int j = k + 1; j < m.cols(); ++j) {
                if (m.at(k, j).is_zero()) continue;
                Poly q = divmod(m.at(k, j), m.at(k, k)).quotient;
                cops.addmul(j, k, neg(q));
                if (!m.at(k, j).is_zero()) dirty = true;
            }
            if (dirty) continue;
            // divisibility: the pivot must divide the whole trailing block
            int vi = -1;
            for (int i = k + 1; i < m.rows() && vi < 0; ++i)
                for (int j = k + 1; j < m.cols(); ++j)
                    if (!divmod(m.at(i, j), m.at(k, k)).remainder.is_zero()) {
                        vi = i;
                        break;
                    }
            if (vi >= 0) {
                rops.addmul(k, vi, Poly::constant(F, 1));
                continue;
            }
            break;
        }
        if (!have_pivot) break;
        if (!m.at(k, k).is_monic()) rops.scale(k, F.inv(m.at(k, k).lead()));
        ++r;
    }

    SmithForm sf{{}, a.rows() - r, std::move(u), std::move(uinv), std::move(v), std::move(vinv)};
    for (int i = 0; i < r; ++i) sf.factors.push_back(m.at(i, i));

    // always-on self-checks: the transforms really are inverse pairs and
    // u*a*v really is the diagonal we report
    FLOWENT_CHECK(mul(sf.u, sf.u_inv) == PolyMatrix::identity(F, a.rows()),
                  "smith u transform not invertible");
    FLOWENT_CHECK(mul(sf.v, sf.v_inv) == PolyMatrix::identity(F, a.cols()),
                  "smith v transform not invertible");
    FLOWENT_CHECK(mul(mul(sf.u, a), sf.v) == smith_diagonal(sf, a.rows(), a.cols(), F),
                  "smith diagonal self-check failed");
    for (size_t i = 0; i + 1 < sf.factors.size(); ++i)
        FLOWENT_CHECK(divmod(sf.factors[i + 1], sf.factors[i]).remainder.is_zero(),
                      "smith divisibility chain broken");
    return sf;
}

PolyMatrix smith_diagonal(const SmithForm& sf, int rows, int cols, PrimeField field) {
    PolyMatrix d(field, rows, cols);
    for (size_t i = 0; i < sf.factors.size(); ++i)
        d.at(static_cast<int>(i), static_cast<int>(i)) = sf.factors[i];
    return d;
}

ModulePresentation::ModulePresentation(PrimeField field, int generators, PolyMatrix relations)
    : field_(field), generators_(generators), relations_(std::move(relations)) {
    FLOWENT_CHECK(generators_ >= 0, "generator count must be non-negative");
    FLOWENT_CHECK(relations_.rows() == generators_, "relation matrix must have g rows");
    forms_ = std::make_shared<const Forms>(Forms{hermite_form(relations_), smith_form(relations_)});
}

ModulePresentation ModulePresentation::free_module(PrimeField field, int rank) {
    return ModulePresentation(field, rank, PolyMatrix(field, rank, 0));
}

ModulePresentation ModulePresentation::direct_sum_of_cyclic(PrimeField field,
                                                            const std::vector<Poly>& torsion_factors,
                                                            int free_rank) {
    const int t = static_cast<int>(torsion_factors.size());
    PolyMatrix rel(field, t + free_rank, t);
    for (int i = 0; i < t; ++i) {
        FLOWENT_CHECK(!torsion_factors[static_cast<size_t>(i)].is_zero(),
                      "cyclic factor must be nonzero");
        rel.at(i, i) = torsion_factors[static_cast<size_t>(i)].monic();
    }
    return ModulePresentation(field, t + free_rank, std::move(rel));
}

int ModulePresentation::rank() const {
    return generators_ - static_cast<int>(smith().factors.size());
}

std::vector<Poly> ModulePresentation::torsion_factors() const {
    std::vector<Poly> out;
    for (const Poly& d : smith().factors)
        if (!d.is_unit()) out.push_back(d);
    return out;
}

int ModulePresentation::torsion_k_dim() const {
    int dim = 0;
    for (const Poly& d : smith().factors)
        if (!d.is_unit()) dim += d.degree();
    return dim;
}

int module_rank(const ModulePresentation& w) { return w.rank(); }

PolyVec canonical_form(const PolyVec& v, const ModulePresentation& w) {
    if (v.size() != static_cast<size_t>(w.generators()))
        throw std::invalid_argument("canonical_form: coordinate count mismatch");
    const HermiteResult& h = w.hermite();
    PolyVec out = v;
    for (const HermitePivot& pv : h.pivots) {
        const Poly& pivot = h.h.at(pv.row, pv.col);
        Poly q = divmod(out[static_cast<size_t>(pv.row)], pivot).quotient;
        if (q.is_zero()) continue;
        for (int r = 0; r < w.generators(); ++r)
            out[static_cast<size_t>(r)] =
                sub(out[static_cast<size_t>(r)], mul(q, h.h.at(r, pv.col)));
    }
    return out;
}

bool in_relation_span(const PolyVec& v, const ModulePresentation& w) {
    PolyVec c = canonical_form(v, w);
    return std::all_of(c.begin(), c.end(), [](const Poly& p) { return p.is_zero(); });
}

TorsionPart torsion_submodule(const ModulePresentation& w) {
    const SmithForm& sf = w.smith();
    std::vector<Poly> factors;
    std::vector<PolyVec> embedding;
    int k_dim = 0;
    for (size_t i = 0; i < sf.factors.size(); ++i) {
        if (sf.factors[i].is_unit()) continue;
        factors.push_back(sf.factors[i]);
        k_dim += sf.factors[i].degree();
        embedding.push_back(canonical_form(sf.u_inv.column(static_cast<int>(i)), w));
    }
    return TorsionPart{
        ModulePresentation::direct_sum_of_cyclic(w.field(), factors, 0),
        std::move(embedding), std::move(factors), k_dim};
}

ModulePresentation submodule_presentation(const ModulePresentation& w,
                                          const std::vector<PolyVec>& gens) {
    const int k = static_cast<int>(gens.size());
    const int m = w.relations().cols();
    PolyMatrix b(w.field(), w.generators(), k + m);
    for (int j = 0; j < k; ++j) {
        FLOWENT_CHECK(gens[static_cast<size_t>(j)].size() == static_cast<size_t>(w.generators()),
                      "submodule generator has wrong coordinate count");
        for (int i = 0; i < w.generators(); ++i)
            b.at(i, j) = gens[static_cast<size_t>(j)][static_cast<size_t>(i)];
    }
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < w.generators(); ++i) b.at(i, k + j) = w.relations().at(i, j);

    SmithForm sf = smith_form(b);
    const int r = static_cast<int>(sf.factors.size());
    // kernel of [G | relations] = span of the trailing columns of v;
    // the first k coordinates of each give a relation among the gens
    PolyMatrix rel(w.field(), k, k + m - r);
    for (int j = r; j < k + m; ++j)
        for (int i = 0; i < k; ++i) rel.at(i, j - r) = sf.v.at(i, j);
    return ModulePresentation(w.field(), k, std::move(rel));
}

ModulePresentation quotient_presentation(const ModulePresentation& w,
                                         const std::vector<PolyVec>& gens) {
    PolyMatrix extra(w.field(), w.generators(), static_cast<int>(gens.size()));
    for (size_t j = 0; j < gens.size(); ++j) {
        FLOWENT_CHECK(gens[j].size() == static_cast<size_t>(w.generators()),
                      "quotient generator has wrong coordinate count");
        for (int i = 0; i < w.generators(); ++i)
            extra.at(i, static_cast<int>(j)) = gens[j][static_cast<size_t>(i)];
    }
    return ModulePresentation(w.field(), w.generators(), hstack(w.relations(), extra));
}

PolyVec restrict_element(const PolyVec& v, int k, PrimeField field) {
    PolyVec out(v.size() * static_cast<size_t>(k), Poly(field));
    for (size_t i = 0; i < v.size(); ++i) {
        const Poly& p = v[i];
        for (int l = 0; l <= p.degree(); ++l) {
            uint32_t c = p.coeff(l);
            if (c == 0) continue;
            int q = l / k, rem = l % k;
            size_t idx = i * static_cast<size_t>(k) + static_cast<size_t>(rem);
            out[idx] = add(out[idx], Poly::monomial(field, q, c));
        }
    }
    return out;
}

ModulePresentation restriction_presentation(const ModulePresentation& w, int k) {
    FLOWENT_CHECK(k >= 1, "restriction power must be >= 1");
    const PrimeField& F = w.field();
    const int g = w.generators();
    const int m = w.relations().cols();
    PolyMatrix rel(F, g * k, m * k);
    for (int c = 0; c < m; ++c) {
        PolyVec col = w.relations().column(c);
        for (int j = 0; j < k; ++j) {
            PolyVec shifted;
            shifted.reserve(col.size());
            for (const Poly& p : col) shifted.push_back(shift(p, j));
            PolyVec split = restrict_element(shifted, k, F);
            for (int i = 0; i < g * k; ++i) rel.at(i, c * k + j) = split[static_cast<size_t>(i)];
        }
    }
    return ModulePresentation(F, g * k, std::move(rel));
}

}  // namespace flowent
