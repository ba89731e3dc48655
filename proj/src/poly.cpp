#include "flowent/poly.hpp"

#include <sstream>

namespace flowent {

Poly::Poly(PrimeField field, std::vector<uint32_t> coeffs) : field_(field), c_(std::move(coeffs)) {
    for (uint32_t& c : c_) c %= field_.modulus();
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::monomial(PrimeField field, int deg, uint32_t c) {
    std::vector<uint32_t> v(static_cast<size_t>(deg) + 1, 0);
    v.back() = c;
    return Poly(field, std::move(v));
}

Poly Poly::monic() const {
    if (is_zero() || is_monic()) return *this;
    return mul(*this, field_.inv(lead()));
}

Poly add(const Poly& a, const Poly& b) {
    const PrimeField& F = a.field();
    std::vector<uint32_t> c(std::max(a.coeffs().size(), b.coeffs().size()), 0);
    for (size_t i = 0; i < c.size(); ++i)
        c[i] = F.add(a.coeff(static_cast<int>(i)), b.coeff(static_cast<int>(i)));
    return Poly(F, std::move(c));
}

Poly sub(const Poly& a, const Poly& b) {
    const PrimeField& F = a.field();
    std::vector<uint32_t> c(std::max(a.coeffs().size(), b.coeffs().size()), 0);
    for (size_t i = 0; i < c.size(); ++i)
        c[i] = F.sub(a.coeff(static_cast<int>(i)), b.coeff(static_cast<int>(i)));
    return Poly(F, std::move(c));
}

Poly neg(const Poly& a) {
    const PrimeField& F = a.field();
    std::vector<uint32_t> c(a.coeffs());
    for (uint32_t& x : c) x = F.neg(x);
    return Poly(F, std::move(c));
}

Poly mul(const Poly& a, const Poly& b) {
    const PrimeField& F = a.field();
    if (a.is_zero() || b.is_zero()) return Poly(F);
    std::vector<uint32_t> c(a.coeffs().size() + b.coeffs().size() - 1, 0);
    for (size_t i = 0; i < a.coeffs().size(); ++i) {
        if (a.coeffs()[i] == 0) continue;
        for (size_t j = 0; j < b.coeffs().size(); ++j)
            c[i + j] = F.add(c[i + j], F.mul(a.coeffs()[i], b.coeffs()[j]));
    }
    return Poly(F, std::move(c));
}

Poly mul(const Poly& a, uint32_t c) {
    const PrimeField& F = a.field();
    std::vector<uint32_t> v(a.coeffs());
    for (uint32_t& x : v) x = F.mul(x, c);
    return Poly(F, std::move(v));
}

Poly shift(const Poly& a, int k) {
    if (a.is_zero()) return a;
    std::vector<uint32_t> c(static_cast<size_t>(k), 0);
    c.insert(c.end(), a.coeffs().begin(), a.coeffs().end());
    return Poly(a.field(), std::move(c));
}

PolyDivMod divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::invalid_argument("polynomial division by zero");
    const PrimeField& F = a.field();
    if (a.degree() < b.degree()) return {Poly(F), a};
    std::vector<uint32_t> rem(a.coeffs());
    std::vector<uint32_t> quo(static_cast<size_t>(a.degree() - b.degree()) + 1, 0);
    const uint32_t lead_inv = F.inv(b.lead());
    for (int d = a.degree(); d >= b.degree(); --d) {
        uint32_t top = rem[static_cast<size_t>(d)];
        if (top == 0) continue;
        uint32_t q = F.mul(top, lead_inv);
        quo[static_cast<size_t>(d - b.degree())] = q;
        for (int i = 0; i <= b.degree(); ++i) {
            size_t idx = static_cast<size_t>(d - b.degree() + i);
            rem[idx] = F.sub(rem[idx], F.mul(q, b.coeff(i)));
        }
    }
    return {Poly(F, std::move(quo)), Poly(F, std::move(rem))};
}

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero() && b.is_zero())
        throw std::invalid_argument("gcd of two zero polynomials");
    Poly x = a, y = b;
    while (!y.is_zero()) {
        Poly r = divmod(x, y).remainder;
        x = y;
        y = r;
    }
    return x.monic();
}

std::string to_string(const Poly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int d = p.degree(); d >= 0; --d) {
        uint32_t c = p.coeff(d);
        if (c == 0) continue;
        if (!first) os << "+";
        first = false;
        if (d == 0 || c != 1) os << c;
        if (d >= 1) os << "t";
        if (d >= 2) os << "^" << d;
    }
    return os.str();
}

}  // namespace flowent
