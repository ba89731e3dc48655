#pragma once

#include <string>
#include <vector>

#include "flowent/gfp.hpp"

namespace flowent {

/// Polynomial over GF(p) with ascending coefficients in canonical form
/// (no trailing zeros). The zero polynomial has an empty coefficient list
/// and degree() == -1.
class Poly {
  public:
    explicit Poly(PrimeField field) : field_(field) {}
    Poly(PrimeField field, std::vector<uint32_t> coeffs);

    static Poly constant(PrimeField field, uint32_t c) { return Poly(field, {c}); }
    static Poly t(PrimeField field) { return Poly(field, {0, 1}); }
    static Poly monomial(PrimeField field, int deg, uint32_t c = 1);

    const PrimeField& field() const { return field_; }
    const std::vector<uint32_t>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    uint32_t coeff(int i) const {
        return i >= 0 && i < static_cast<int>(c_.size()) ? c_[static_cast<size_t>(i)] : 0;
    }
    uint32_t lead() const { return c_.empty() ? 0 : c_.back(); }
    bool is_constant() const { return c_.size() <= 1; }
    bool is_unit() const { return c_.size() == 1; }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
    bool is_monic() const { return lead() == 1; }
    Poly monic() const;

    bool operator==(const Poly& other) const { return c_ == other.c_; }

  private:
    PrimeField field_;
    std::vector<uint32_t> c_;
};

Poly add(const Poly& a, const Poly& b);
Poly sub(const Poly& a, const Poly& b);
Poly neg(const Poly& a);
Poly mul(const Poly& a, const Poly& b);
Poly mul(const Poly& a, uint32_t c);
/// a * t^k
Poly shift(const Poly& a, int k);

struct PolyDivMod {
    Poly quotient;
    Poly remainder;
};
/// Long division; b must be nonzero.
PolyDivMod divmod(const Poly& a, const Poly& b);

/// Monic greatest common divisor; throws std::invalid_argument when both
/// arguments are zero.
Poly poly_gcd(const Poly& a, const Poly& b);

std::string to_string(const Poly& p);

}  // namespace flowent
