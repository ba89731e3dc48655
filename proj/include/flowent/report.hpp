#pragma once

#include <cstdint>
#include <string>

namespace flowent {

enum class Status { exact, lower_bound, horizon_limited };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::exact: return "exact";
        case Status::lower_bound: return "lower_bound";
        case Status::horizon_limited: return "horizon_limited";
    }
    return "?";
}

/// A value in N together with the infinity sentinel. No pipeline in this
/// library certifies infinity; the sentinel exists for report plumbing.
struct ExtNat {
    uint32_t n = 0;
    bool infinite = false;

    static ExtNat finite(uint32_t v) { return {v, false}; }
    static ExtNat inf() { return {0, true}; }
    bool operator==(const ExtNat&) const = default;
};

inline std::string to_string(const ExtNat& v) {
    return v.infinite ? "inf" : std::to_string(v.n);
}

struct EntropyReport {
    ExtNat value;
    Status status = Status::horizon_limited;
    std::string provenance;         // which pipeline produced the value
    bool bounds_exhausted = false;  // search hit its caps before certifying
};

}  // namespace flowent
