#include "flowent/json_io.hpp"

#include <fstream>
#include <sstream>

namespace flowent {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw ParseError(msg); }

bool nonneg_int(const json& j) {
    return (j.is_number_integer() || j.is_number_unsigned()) && j.get<int64_t>() >= 0;
}

uint32_t require_field(const json& j) {
    if (!j.contains("field") || !nonneg_int(j["field"]))
        parse_fail("document needs a non-negative integer 'field'");
    return j["field"].get<uint32_t>();
}

MatrixGF parse_matrix(const json& j, PrimeField F, const std::string& what) {
    if (!j.is_array()) parse_fail(what + " must be an array of rows");
    std::vector<std::vector<uint32_t>> rows;
    size_t cols = 0;
    for (const json& row : j) {
        if (!row.is_array()) parse_fail(what + " rows must be arrays");
        std::vector<uint32_t> r;
        for (const json& e : row) {
            if (!e.is_number_integer() && !e.is_number_unsigned())
                parse_fail(what + " entries must be integers");
            int64_t v = e.get<int64_t>();
            r.push_back(F.reduce(v));
        }
        if (rows.empty())
            cols = r.size();
        else if (r.size() != cols)
            parse_fail(what + " rows must have equal length");
        rows.push_back(std::move(r));
    }
    return MatrixGF::from_rows(F, static_cast<int>(cols), rows);
}

Poly parse_poly(const json& j, PrimeField F) {
    if (!j.is_array()) parse_fail("polynomials are ascending coefficient arrays");
    std::vector<uint32_t> coeffs;
    for (const json& e : j) {
        if (!e.is_number_integer() && !e.is_number_unsigned())
            parse_fail("polynomial coefficients must be integers");
        coeffs.push_back(F.reduce(e.get<int64_t>()));
    }
    return Poly(F, std::move(coeffs));
}

json dump_matrix(const MatrixGF& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

FlowDocument parse_flow_document(const json& j) {
    if (!j.is_object()) parse_fail("flow document must be a JSON object");
    PrimeField F = [&] {
        try {
            return PrimeField(require_field(j));
        } catch (const std::invalid_argument& e) {
            parse_fail(e.what());
        }
    }();
    if (!j.contains("kind") || !j["kind"].is_string())
        parse_fail("document needs a string 'kind'");
    std::string kind = j["kind"].get<std::string>();
    std::string label = j.value("label", std::string{});

    FlowDocument doc{F, kind, label, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    if (kind == "findim") {
        if (!j.contains("action")) parse_fail("findim documents need an 'action' matrix");
        MatrixGF action = parse_matrix(j["action"], F, "action");
        if (action.rows() != action.cols()) parse_fail("findim action must be square");
        // the same flow as a module: K[t]^d modulo the columns of tI - A
        PolyMatrix rel(F, action.rows(), action.rows());
        for (int r = 0; r < action.rows(); ++r)
            for (int c = 0; c < action.cols(); ++c) {
                Poly e = Poly::constant(F, F.neg(action.at(r, c)));
                if (r == c) e = add(e, Poly::t(F));
                rel.at(r, c) = e;
            }
        doc.algebraic = AlgebraicFlow::findim(action);
        doc.module = ModulePresentation(F, action.rows(), std::move(rel));
        doc.topological = ProfiniteFlow::findim(std::move(action), label);
    } else if (kind == "module") {
        if (!j.contains("generators") || !nonneg_int(j["generators"]))
            parse_fail("module documents need a non-negative 'generators' count");
        int g = j["generators"].get<int>();
        if (!j.contains("relations") || !j["relations"].is_array())
            parse_fail("module documents need a 'relations' array of rows");
        const json& rel_rows = j["relations"];
        if (static_cast<int>(rel_rows.size()) != g)
            parse_fail("relations must have one row per generator");
        size_t m = 0;
        for (const json& row : rel_rows) {
            if (!row.is_array()) parse_fail("relation rows must be arrays of polynomials");
            m = std::max(m, row.size());
        }
        PolyMatrix rel(F, g, static_cast<int>(m));
        for (int r = 0; r < g; ++r) {
            const json& row = rel_rows[static_cast<size_t>(r)];
            if (row.size() != m && !row.empty())
                parse_fail("relation rows must have equal length");
            for (size_t c = 0; c < row.size(); ++c)
                rel.at(r, static_cast<int>(c)) = parse_poly(row[c], F);
        }
        ModulePresentation w(F, g, std::move(rel));
        doc.module = w;
        doc.algebraic = AlgebraicFlow::module(w);
        doc.topological = ProfiniteFlow::dual_of_module(w, label);
    } else if (kind == "profinite") {
        if (!j.contains("window") || !nonneg_int(j["window"]))
            parse_fail("profinite documents need a non-negative 'window'");
        PeriodicData pd;
        pd.window = j["window"].get<int>();
        auto parse_levels = [&](const char* key, std::vector<LevelData>& out) {
            if (!j.contains(key)) return;
            if (!j[key].is_array()) parse_fail(std::string(key) + " must be an array");
            for (const json& e : j[key]) {
                if (!e.is_object() || !e.contains("dim") || !nonneg_int(e["dim"]) ||
                    !e.contains("projection") || !e.contains("action"))
                    parse_fail("level entries need dim, projection and action");
                LevelData ld{e["dim"].get<int>(), parse_matrix(e["projection"], F, "projection"),
                             parse_matrix(e["action"], F, "action")};
                out.push_back(std::move(ld));
            }
        };
        parse_levels("preperiod", pd.preperiod);
        parse_levels("period", pd.period);
        if (pd.period.empty()) parse_fail("profinite documents need a non-empty 'period'");
        doc.periodic_data = pd;
        try {
            doc.topological = ProfiniteFlow::periodic(F, pd, label);
        } catch (const InvariantViolation& e) {
            parse_fail(e.what());
        }
    } else {
        parse_fail("kind must be findim, module or profinite");
    }
    return doc;
}

FlowDocument load_flow_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open input file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        parse_fail(std::string("invalid JSON: ") + e.what());
    }
    return parse_flow_document(j);
}

json serialize_flow_document(const FlowDocument& doc) {
    json j;
    j["field"] = doc.field.modulus();
    j["kind"] = doc.kind;
    if (!doc.label.empty()) j["label"] = doc.label;
    if (doc.kind == "findim") {
        j["action"] = dump_matrix(doc.algebraic->action());
    } else if (doc.kind == "module") {
        const ModulePresentation& w = *doc.module;
        j["generators"] = w.generators();
        json rows = json::array();
        for (int r = 0; r < w.generators(); ++r) {
            json row = json::array();
            for (int c = 0; c < w.relations().cols(); ++c)
                row.push_back(to_json(w.relations().at(r, c)));
            rows.push_back(std::move(row));
        }
        j["relations"] = std::move(rows);
    } else {
        const PeriodicData& pd = *doc.periodic_data;
        j["window"] = pd.window;
        auto dump_levels = [&](const std::vector<LevelData>& levels) {
            json arr = json::array();
            for (const LevelData& ld : levels) {
                json e;
                e["dim"] = ld.dim;
                e["projection"] = dump_matrix(ld.proj);
                e["action"] = dump_matrix(ld.act);
                arr.push_back(std::move(e));
            }
            return arr;
        };
        j["preperiod"] = dump_levels(pd.preperiod);
        j["period"] = dump_levels(pd.period);
    }
    return j;
}

std::string content_digest(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << "fnv1a:" << std::hex << h;
    return os.str();
}

json to_json(const ExtNat& v) {
    if (v.infinite) return "inf";
    return v.n;
}

json to_json(const EntropyReport& rep) {
    json j;
    j["value"] = to_json(rep.value);
    j["status"] = to_string(rep.status);
    j["provenance"] = rep.provenance;
    if (rep.bounds_exhausted) j["bounds_exhausted"] = true;
    return j;
}

json to_json(const Subspace& s) {
    json j;
    j["ambient_dim"] = s.ambient_dim();
    j["dim"] = s.dim();
    j["basis"] = dump_matrix(s.basis());
    return j;
}

json to_json(const OpenSubspace& u) {
    json j;
    j["level"] = u.level;
    j["codim"] = u.codim();
    j["subspace"] = to_json(u.space);
    return j;
}

json to_json(const Poly& p) {
    json arr = json::array();
    for (int d = 0; d <= p.degree(); ++d) arr.push_back(p.coeff(d));
    return arr;
}

json to_json(const PolyVec& v) {
    json arr = json::array();
    for (const Poly& p : v) arr.push_back(to_json(p));
    return arr;
}

json to_json(const BridgeReport& rep) {
    json j;
    j["algebraic"] = to_json(rep.algebraic);
    j["structural"] = to_json(rep.structural);
    j["witness"] = to_json(rep.witness);
    j["bridge_equal"] = rep.entropies_equal;
    j["evidence_ok"] = rep.evidence_ok;
    json ev = json::array();
    for (const BridgeEvidence& e : rep.evidence) {
        json je;
        je["open"] = to_json(e.u);
        je["chain_dims"] = e.chain_dims;
        je["trajectory_dims"] = e.trajectory_dims;
        je["equal"] = e.equal;
        ev.push_back(std::move(je));
    }
    j["evidence"] = std::move(ev);
    return j;
}

json to_json(const PinskerDualityReport& rep) {
    json j;
    j["level_bound"] = rep.level_bound;
    j["levels_ok"] = rep.levels_ok;
    j["pinsker_factor_dim"] = rep.pinsker_factor_dim;
    j["torsion_dim"] = rep.torsion_dim;
    j["factor_dim_ok"] = rep.factor_dim_ok;
    j["cpa_iff_dplus_full"] = rep.cpa_iff_dplus_full;
    j["pinsker_duality_ok"] = rep.ok();
    return j;
}

json to_json(const ZeroEntropyReport& rep) {
    json j;
    j["algebraic"] = to_json(rep.algebraic);
    j["topological"] = to_json(rep.topological);
    j["zero_iff_zero"] = rep.equivalent;
    return j;
}

json to_json(const ConjugacyWitness& w) {
    json j;
    j["codim1_ok"] = w.codim1_ok;
    j["theta_dims_ok"] = w.theta_dims_ok;
    j["chain_ok"] = w.chain_ok;
    j["commutes_ok"] = w.commutes_ok;
    j["verified"] = w.all_ok();
    json evs = json::array();
    for (const VecGF& e : w.e_vectors) evs.push_back(e);
    j["e_vectors"] = std::move(evs);
    json ns = json::array();
    for (const VecGF& n : w.normals) ns.push_back(n);
    j["normals"] = std::move(ns);
    j["quotient_dims"] = w.quotient_dims;
    return j;
}

json to_json(const CorankReport& rep) {
    json j;
    j["value"] = to_json(rep.value);
    j["status"] = to_string(rep.status);
    j["method"] = rep.method;
    if (rep.witness_count) j["witness_count"] = *rep.witness_count;
    j["routes_consistent"] = rep.routes_consistent;
    json fam = json::array();
    for (const OpenSubspace& u : rep.witness_family) fam.push_back(to_json(u));
    j["witness_family"] = std::move(fam);
    return j;
}

}  // namespace flowent
