#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "flowent/duality.hpp"
#include "flowent/lattice.hpp"

namespace flowent {

inline constexpr const char* kToolName = "flowctl";
inline constexpr const char* kToolVersion = "0.1.0";

/// One parsed input document: a flow in one of the three syntaxes, with
/// whatever side objects the kind supports already built.
struct FlowDocument {
    PrimeField field;
    std::string kind;  // "findim" | "module" | "profinite"
    std::string label;

    std::optional<AlgebraicFlow> algebraic;      // findim and module kinds
    std::optional<ModulePresentation> module;    // module kind; findim via tI - A
    std::optional<ProfiniteFlow> topological;    // all kinds
    std::optional<PeriodicData> periodic_data;   // raw payload of profinite docs
};

FlowDocument parse_flow_document(const nlohmann::json& j);
FlowDocument load_flow_document(const std::string& path);
nlohmann::json serialize_flow_document(const FlowDocument& doc);

/// FNV-1a 64 over the raw bytes, as a hex string.
std::string content_digest(const std::string& bytes);

// report fragments
nlohmann::json to_json(const EntropyReport& rep);
nlohmann::json to_json(const ExtNat& v);
nlohmann::json to_json(const Subspace& s);
nlohmann::json to_json(const OpenSubspace& u);
nlohmann::json to_json(const Poly& p);
nlohmann::json to_json(const PolyVec& v);
nlohmann::json to_json(const BridgeReport& rep);
nlohmann::json to_json(const PinskerDualityReport& rep);
nlohmann::json to_json(const ZeroEntropyReport& rep);
nlohmann::json to_json(const ConjugacyWitness& w);
nlohmann::json to_json(const CorankReport& rep);

}  // namespace flowent
