// flowctl: exact algebraic/topological entropy computations for linear
// flows over prime fields, with machine-readable JSON reports.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "flowent/json_io.hpp"

using namespace flowent;
using nlohmann::json;

namespace {

struct Options {
    std::vector<std::string> inputs;
    std::string out;
    int horizon = 16;
    bool horizon_set = false;  // explicit --horizon overrides built-in defaults
    int max_level = 4;
    int max_witnesses = 8;
    int levels = 8;
    std::string strategy = "both";
    int jobs = 1;
    bool exhaustive = false;
};

std::optional<uint64_t> seed_from_env() {
    const char* s = std::getenv("FLOWCTL_SEED");
    if (s == nullptr || *s == '\0') return std::nullopt;
    return std::strtoull(s, nullptr, 10);
}

SearchBounds bounds_of(const Options& opt) {
    return SearchBounds{opt.max_witnesses, opt.max_level, opt.horizon};
}

EntStrategy strategy_of(const Options& opt) {
    if (opt.strategy == "structural") return EntStrategy::structural;
    if (opt.strategy == "witness") return EntStrategy::witness;
    if (opt.strategy == "both") return EntStrategy::both;
    throw ParseError("strategy must be structural, witness or both");
}

const ModulePresentation& module_of(const FlowDocument& doc) {
    if (!doc.module)
        throw UnsupportedDescriptor("this command needs a findim or module document");
    return *doc.module;
}

json cmd_entropy(const FlowDocument& doc, const Options& opt) {
    json results;
    if (doc.algebraic) {
        results["algebraic"] = to_json(ent_alg(*doc.algebraic));
        // limit-formula cross-check from the generator span
        std::vector<FlowVec> gens;
        for (int i = 0; i < doc.algebraic->coordinates(); ++i) {
            FlowVec e(static_cast<size_t>(doc.algebraic->coordinates()),
                      Poly(doc.field));
            e[static_cast<size_t>(i)] = Poly::constant(doc.field, 1);
            gens.push_back(std::move(e));
        }
        HAlgOptions halg_opt;
        if (opt.horizon_set) halg_opt.horizon = opt.horizon;
        results["algebraic_limit"] =
            to_json(h_alg(*doc.algebraic, make_span(*doc.algebraic, gens), halg_opt));
    }
    EntStarReport star = ent_star(*doc.topological, strategy_of(opt), bounds_of(opt));
    json top;
    if (star.structural) top["structural"] = to_json(*star.structural);
    if (star.witness) {
        top["witness"] = to_json(*star.witness);
        top["witness_count"] = star.witness_data->count;
        top["remainder"] = to_json(star.witness_data->remainder);
    }
    results["topological"] = std::move(top);
    return results;
}

json cmd_pinsker(const FlowDocument& doc, const Options& opt) {
    const ModulePresentation& w = module_of(doc);
    json results;

    AlgebraicFlow wf = AlgebraicFlow::module(w);
    PinskerSubflow sub = pinsker_subflow(wf);
    json alg;
    alg["torsion_dim"] = w.torsion_k_dim();
    json factors = json::array();
    for (const Poly& f : w.torsion_factors()) factors.push_back(to_json(f));
    alg["invariant_factors"] = std::move(factors);
    json emb = json::array();
    for (const PolyVec& e : sub.embedding) emb.push_back(to_json(e));
    alg["pinsker_generators"] = std::move(emb);
    alg["pinsker_entropy"] = to_json(ent_alg(sub.subflow));
    AlgebraicFlow fplus = cpa_factor(wf);
    alg["factor_entropy"] = to_json(ent_alg(fplus));
    alg["whole_entropy"] = to_json(ent_alg(wf));
    alg["entropy_preserved"] = ent_alg(fplus).value == ent_alg(wf).value;
    alg["factor_is_cpa"] = is_cpa(fplus);
    results["algebraic"] = std::move(alg);

    PinskerDualityReport pd = pinsker_duality_check(w, opt.levels);
    json top = to_json(pd);
    ProfiniteFlow dual = ProfiniteFlow::dual_of_module(w);
    DPlus dp = d_plus(dual);
    json dims = json::array();
    for (int k = 0; k <= opt.levels; ++k) dims.push_back(dp.level_subspace(k).dim());
    top["dplus_level_dims"] = std::move(dims);
    EntropyReport whole = *ent_star(dual, EntStrategy::structural).structural;
    EntropyReport restr = *ent_star(dp.restricted_flow, EntStrategy::structural).structural;
    top["whole_entropy"] = to_json(whole);
    top["dplus_entropy"] = to_json(restr);
    top["entropy_preserved"] = whole.value == restr.value;
    results["topological"] = std::move(top);
    return results;
}

json cmd_bernoulli(const FlowDocument& doc, const Options& opt) {
    const ProfiniteFlow& flow = *doc.topological;
    BernoulliWitnesses bw = bernoulli_witnesses(flow, bounds_of(opt));
    json results;
    results["witness_count"] = bw.count;
    results["remainder"] = to_json(bw.remainder);
    results["bounds_exhausted"] = bw.bounds_exhausted;
    results["entropy_lower_bound"] = bw.count;

    json witnesses = json::array();
    for (size_t i = 0; i < bw.witnesses.size(); ++i) {
        json wj;
        wj["open"] = to_json(bw.witnesses[i]);
        const Cotrajectory& cot = bw.cotrajectories[i];
        wj["chain_increments"] = cot.increments;
        wj["chain_tail"] = to_json(cot.chain.back());
        ConjugacyWitness cw = bernoulli_conjugacy(flow, bw.witnesses[i], opt.horizon);
        wj["conjugacy"] = to_json(cw);
        wj["h_star"] = to_json(h_star(flow, bw.witnesses[i], opt.horizon));
        witnesses.push_back(std::move(wj));
    }
    results["witnesses"] = std::move(witnesses);
    if (!bw.cotrajectories.empty()) {
        CoindependenceVerdict cv = coindependent_check(flow, bw.cotrajectories, opt.max_level);
        results["coindependent_ok"] = cv.ok;
        results["coindependent_level_bound"] = cv.level_bound;
    }
    return results;
}

json cmd_bridge(const FlowDocument& doc, const Options& opt) {
    const ModulePresentation& w = module_of(doc);
    json results;
    BridgeReport br = bridge_check(w, 8, 3, seed_from_env(), bounds_of(opt));
    results["bridge"] = to_json(br);
    results["bridge_equal"] = br.entropies_equal && br.evidence_ok;
    PinskerDualityReport pd = pinsker_duality_check(w, opt.levels);
    results["pinsker_duality"] = to_json(pd);
    ZeroEntropyReport ze = zero_entropy_duality_check(w, bounds_of(opt));
    results["zero_entropy"] = to_json(ze);
    CorankReport ck = cork(ProfiniteFlow::dual_of_module(w), bounds_of(opt));
    results["corank"] = to_json(ck);
    results["corank_equals_entropy"] = ck.value == br.algebraic.value;
    return results;
}

json cmd_lattice(const FlowDocument& doc, const Options& opt) {
    if (doc.kind != "findim")
        throw UnsupportedDescriptor("the lattice command needs a findim document");
    FiniteLattice l = invariant_subspaces(*doc.algebraic);
    json results;
    results["size"] = l.size();
    CodiResult codi = dual_goldie_dim(l);
    CodiResult gol = goldie_dim(l);
    results["dual_goldie_dim"] = codi.value;
    results["goldie_dim"] = gol.value;
    results["codi_witness"] = codi.witness;

    json couniform = json::array();
    for (int i = 0; i < l.size(); ++i)
        if (is_couniform(l, i)) couniform.push_back(i);
    results["couniform_elements"] = std::move(couniform);

    if (opt.exhaustive) {
        auto cert = codi_certificate(l);
        results["certificate_found"] = cert.has_value();
        if (cert) results["certificate"] = *cert;
        json elems = json::array();
        for (int i = 0; i < l.size(); ++i) elems.push_back(to_json(l.at(i)));
        results["elements"] = std::move(elems);
    }
    results["corank"] = to_json(cork(*doc.topological, bounds_of(opt)));
    return results;
}

int exit_code_of(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return 2;
    if (dynamic_cast<const UnsupportedDescriptor*>(&e)) return 3;
    if (dynamic_cast<const CapExceeded*>(&e)) return 3;
    return 4;
}

struct FileOutcome {
    int code = 0;
    std::string rendered;  // report JSON, or empty on failure
    std::string error;
};

FileOutcome process_file(const std::string& cmd, const std::string& path, const Options& opt) {
    FileOutcome outcome;
    auto started = std::chrono::steady_clock::now();
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open input file: " + path);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        FlowDocument doc = parse_flow_document([&] {
            try {
                return json::parse(bytes.str());
            } catch (const json::exception& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what());
            }
        }());

        json results;
        if (cmd == "entropy") results = cmd_entropy(doc, opt);
        else if (cmd == "pinsker") results = cmd_pinsker(doc, opt);
        else if (cmd == "bernoulli") results = cmd_bernoulli(doc, opt);
        else if (cmd == "bridge") results = cmd_bridge(doc, opt);
        else results = cmd_lattice(doc, opt);

        json report;
        report["tool"] = kToolName;
        report["version"] = kToolVersion;
        report["command"] = cmd;
        report["input"] = std::filesystem::path(path).filename().string();
        report["input_digest"] = content_digest(bytes.str());
        if (!doc.label.empty()) report["label"] = doc.label;
        json params;
        params["horizon"] = opt.horizon;
        params["max_level"] = opt.max_level;
        params["max_witnesses"] = opt.max_witnesses;
        params["levels"] = opt.levels;
        params["strategy"] = opt.strategy;
        report["params"] = std::move(params);
        report["results"] = std::move(results);
        report["timing_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
        outcome.rendered = report.dump(2) + "\n";
    } catch (const std::exception& e) {
        outcome.code = exit_code_of(e);
        outcome.error = std::string(path) + ": " + e.what();
    }
    return outcome;
}

int run(const std::string& cmd, const Options& opt) {
    const size_t n = opt.inputs.size();
    std::vector<FileOutcome> outcomes(n);
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(n)));
    if (jobs == 1) {
        for (size_t i = 0; i < n; ++i) outcomes[i] = process_file(cmd, opt.inputs[i], opt);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    outcomes[i] = process_file(cmd, opt.inputs[i], opt);
            });
        for (std::thread& t : pool) t.join();
    }

    int code = 0;
    const bool out_is_dir = n > 1 && !opt.out.empty();
    if (out_is_dir) std::filesystem::create_directories(opt.out);
    for (size_t i = 0; i < n; ++i) {
        const FileOutcome& oc = outcomes[i];
        if (oc.code != 0) {
            std::cerr << "flowctl: " << oc.error << "\n";
            code = std::max(code, oc.code);
            continue;
        }
        if (opt.out.empty()) {
            std::cout << oc.rendered;
        } else if (out_is_dir) {
            std::filesystem::path p = std::filesystem::path(opt.out) /
                (std::filesystem::path(opt.inputs[i]).stem().string() + ".report.json");
            std::ofstream(p) << oc.rendered;
        } else {
            std::ofstream(opt.out) << oc.rendered;
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact entropy of discrete and linearly compact linear flows"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--in", opt.inputs, "input flow document(s)")->required();
        sub->add_option("--out", opt.out, "output file (or directory for several inputs)");
        sub->add_option("--horizon", opt.horizon, "cotrajectory/trajectory horizon")
            ->check(CLI::Range(2, 1 << 20))
            ->each([&](const std::string&) { opt.horizon_set = true; });
        sub->add_option("--max-level", opt.max_level, "deepest search level");
        sub->add_option("--jobs", opt.jobs, "parallelism across input files");
        return sub;
    };

    CLI::App* entropy = add_common(app.add_subcommand("entropy", "entropy by both pipelines"));
    entropy->add_option("--strategy", opt.strategy, "structural|witness|both");
    entropy->add_option("--max-witnesses", opt.max_witnesses, "witness search cap");

    CLI::App* pinsker =
        add_common(app.add_subcommand("pinsker", "Pinsker subflow/factor decomposition"));
    pinsker->add_option("--levels", opt.levels, "level bound for the duality checks");

    CLI::App* bernoulli =
        add_common(app.add_subcommand("bernoulli", "Bernoulli factor witnesses"));
    bernoulli->add_option("--max-witnesses", opt.max_witnesses, "witness search cap");

    CLI::App* bridge = add_common(
        app.add_subcommand("bridge", "entropy duality, Pinsker duality and corank checks"));
    bridge->add_option("--levels", opt.levels, "level bound for the duality checks");
    bridge->add_option("--max-witnesses", opt.max_witnesses, "witness search cap");

    CLI::App* lattice =
        add_common(app.add_subcommand("lattice", "invariant lattice and Goldie dimensions"));
    lattice->add_flag("--exhaustive", opt.exhaustive, "emit elements and the codi certificate");

    CLI11_PARSE(app, argc, argv);

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const std::exception& e) {
        std::cerr << "flowctl: " << e.what() << "\n";
        return exit_code_of(e);
    }
}
