#include "f2s/report.hpp"

#include <json.hpp>

#include <chrono>
#include <mutex>
#include <sstream>
#include <thread>

namespace f2s {

using nlohmann::json;

namespace {

json volume_json(const VolumeEstimate& v) {
    return json{{"value", v.value},
                {"precision", v.precision},
                {"confidence", v.confidence},
                {"samples", v.samples}};
}

json audit_json_obj(const AuditReport& rep) {
    json clauses = json::array();
    for (const auto& c : rep.clauses)
        clauses.push_back(
            json{{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"bound", c.bound}});
    return json{{"all_pass", rep.all_pass},
                {"clauses", clauses},
                {"vol_a", rep.vol_a},
                {"vol_a_prime", rep.vol_a_prime},
                {"vol_removed", rep.vol_removed},
                {"eps_hat", rep.eps_hat},
                {"min_kept_density", rep.min_kept_density},
                {"dist_sumset", rep.dist_sumset},
                {"dist_a_prime", rep.dist_a_prime},
                {"depth", rep.depth},
                {"kept_cosets", rep.kept_cosets}};
}

json params_json(const RunParams& p) {
    return json{{"eps", p.eps},
                {"tau", p.tau},
                {"gamma_vol", p.gamma_vol},
                {"delta_vol", p.delta_vol},
                {"mode", p.mode},
                {"k_max", p.k_max},
                {"i_max", p.i_max},
                {"route_reps", p.route_reps},
                {"seed", p.seed},
                {"chebyshev_constant", p.chebyshev_constant}};
}

}  // namespace

std::string audit_to_json(const AuditReport& rep) { return audit_json_obj(rep).dump(2); }

std::string RunReport::to_json() const {
    json phases_json = json::array();
    for (const auto& ph : phases)
        phases_json.push_back(json{{"name", ph.name}, {"queries", ph.queries}});
    json j{{"spec", json::parse(spec.to_json())},
           {"params", params_json(params)},
           {"depth", depth},
           {"kept_leaves", kept_leaves},
           {"phases", phases_json},
           {"total_queries", total_queries},
           {"pipeline_queries", pipeline_queries},
           {"volume", volume_json(volume)},
           {"wall_ms", wall_ms}};
    if (audit_report) j["audit"] = audit_json_obj(*audit_report);
    return j.dump(2);
}

RunOutput run_pipeline(const SetSpec& spec, const RunParams& params) {
    auto t0 = std::chrono::steady_clock::now();
    GeneratedSet gen = generate(spec);
    RandomSource rng(params.seed);

    RunOutput out;
    out.oracle = gen.oracle;
    out.twin = gen.twin;
    out.report.spec = spec;
    out.report.params = params;

    uint64_t mark = gen.oracle->query_count();
    RandomSource srng = rng.split("simulate");
    out.sim = simulate_sumset(gen.oracle, params.budget(), params.pipeline_mode(), srng);
    out.report.phases.push_back({"construct", gen.oracle->query_count() - mark});
    mark = gen.oracle->query_count();

    RandomSource vrng = rng.split("volume");
    out.report.volume = estimate_volume(*out.sim.sumset, params.gamma_vol, params.delta_vol, vrng);
    out.report.phases.push_back({"volume", gen.oracle->query_count() - mark});
    mark = gen.oracle->query_count();

    if (gen.twin) {
        out.report.audit_report =
            audit(*gen.twin, params.eps, params.tau, out.sim, params.chebyshev_constant);
        out.report.phases.push_back({"audit", gen.oracle->query_count() - mark});
    }

    out.report.depth = out.sim.regularity.tree->depth();
    for (const auto& leaf : out.sim.regularity.tree->leaves())
        out.report.kept_leaves += leaf.keep ? 1 : 0;
    out.report.total_queries = 0;
    for (const auto& ph : out.report.phases) {
        out.report.total_queries += ph.queries;
        if (ph.name == "construct" || ph.name == "volume")
            out.report.pipeline_queries += ph.queries;
    }
    out.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SweepGrid SweepGrid::from_json(const std::string& text) {
    json j = json::parse(text);
    SweepGrid g;
    g.base_spec = SetSpec::from_json(j.at("spec").dump());
    if (j.contains("params")) {
        json p = j["params"];
        if (p.contains("eps")) g.base_params.eps = p["eps"].get<double>();
        if (p.contains("tau")) g.base_params.tau = p["tau"].get<double>();
        if (p.contains("gamma")) g.base_params.gamma_vol = p["gamma"].get<double>();
        if (p.contains("delta")) g.base_params.delta_vol = p["delta"].get<double>();
        if (p.contains("mode")) g.base_params.mode = p["mode"].get<std::string>();
        if (p.contains("kmax")) g.base_params.k_max = p["kmax"].get<uint32_t>();
        if (p.contains("imax")) g.base_params.i_max = p["imax"].get<uint32_t>();
        if (p.contains("seed")) g.base_params.seed = p["seed"].get<uint64_t>();
    }
    if (j.contains("grid")) {
        json grid = j["grid"];
        if (grid.contains("n")) g.ns = grid["n"].get<std::vector<uint32_t>>();
        if (grid.contains("eps")) g.epss = grid["eps"].get<std::vector<double>>();
        if (grid.contains("tau")) g.taus = grid["tau"].get<std::vector<double>>();
        if (grid.contains("mode")) g.modes = grid["mode"].get<std::vector<std::string>>();
        if (grid.contains("seed")) g.seeds = grid["seed"].get<std::vector<uint64_t>>();
    }
    return g;
}

std::string sweep_csv(const SweepGrid& grid, unsigned threads) {
    std::vector<uint32_t> ns = grid.ns.empty() ? std::vector<uint32_t>{grid.base_spec.n} : grid.ns;
    std::vector<double> epss = grid.epss.empty() ? std::vector<double>{grid.base_params.eps} : grid.epss;
    std::vector<double> taus = grid.taus.empty() ? std::vector<double>{grid.base_params.tau} : grid.taus;
    std::vector<std::string> modes =
        grid.modes.empty() ? std::vector<std::string>{grid.base_params.mode} : grid.modes;
    std::vector<uint64_t> seeds =
        grid.seeds.empty() ? std::vector<uint64_t>{grid.base_params.seed} : grid.seeds;

    struct Cell {
        uint32_t n;
        double eps, tau;
        std::string mode;
        uint64_t seed;
    };
    std::vector<Cell> cells;
    for (uint32_t n : ns)
        for (double e : epss)
            for (double t : taus)
                for (const auto& mo : modes)
                    for (uint64_t s : seeds) cells.push_back({n, e, t, mo, s});

    std::vector<std::string> rows(cells.size());
    std::mutex next_mutex;
    size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            size_t i;
            {
                std::lock_guard<std::mutex> lk(next_mutex);
                if (next >= cells.size()) return;
                i = next++;
            }
            const Cell& c = cells[i];
            SetSpec spec = grid.base_spec;
            spec.n = c.n;
            RunParams p = grid.base_params;
            p.eps = c.eps;
            p.tau = c.tau;
            p.mode = c.mode;
            p.seed = c.seed;
            RunOutput run = run_pipeline(spec, p);
            std::ostringstream os;
            os.precision(12);
            os << c.n << "," << c.eps << "," << c.tau << "," << run.report.pipeline_queries << ",";
            if (run.report.audit_report) os << run.report.audit_report->dist_sumset;
            os << "," << run.report.volume.value << "," << c.mode << "," << c.seed;
            rows[i] = os.str();
        }
    };
    unsigned workers = std::max(1u, threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w + 1 < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::string csv = "n,eps,tau,queries,dist,volume,mode,seed\n";
    for (const auto& r : rows) {
        csv += r;
        csv += "\n";
    }
    return csv;
}

std::string transcript_to_jsonl(const std::vector<StageRecord>& transcript) {
    std::string out;
    for (const auto& rec : transcript) {
        json cosets = json::array();
        for (const auto& c : rec.cosets) {
            json jc{{"address", c.address}, {"survivor", c.survivor}};
            if (c.survivor) {
                jc["estimate"] = c.estimate;
                if (!c.freq_hex.empty()) jc["freq"] = c.freq_hex;
            }
            cosets.push_back(jc);
        }
        json j{{"stage", rec.stage},
               {"depth_before", rec.depth_before},
               {"depth_after", rec.depth_after},
               {"stopped", rec.stopped},
               {"cosets", cosets},
               {"queries_after", rec.queries_after}};
        out += j.dump();
        out += "\n";
    }
    return out;
}

namespace {

json point_list_json(const std::vector<Point>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(p.to_hex());
    return arr;
}

std::vector<Point> point_list_from(const json& arr) {
    std::vector<Point> out;
    for (const auto& h : arr) out.push_back(Point::from_hex(h.get<std::string>()));
    return out;
}

json bits_json(const std::vector<uint8_t>& bits) {
    json arr = json::array();
    for (uint8_t b : bits) arr.push_back(static_cast<int>(b));
    return arr;
}

std::vector<uint8_t> bits_from(const json& arr) {
    std::vector<uint8_t> out;
    for (const auto& v : arr) out.push_back(static_cast<uint8_t>(v.get<int>()));
    return out;
}

json leaves_json(const ParityDecisionTree& tree) {
    json arr = json::array();
    for (uint64_t i = 0; i < tree.leaves().size(); ++i) {
        const LeafInfo& leaf = tree.leaves()[i];
        arr.push_back(json{{"address", i},
                           {"keep", leaf.keep},
                           {"density_estimate", leaf.density_estimate},
                           {"zeroed_unresolved", leaf.zeroed_unresolved}});
    }
    return arr;
}

}  // namespace

std::string tree_to_json(const ParityDecisionTree& tree) {
    json j;
    j["n"] = tree.dim();
    j["mode"] = tree.implicit() ? "implicit" : "explicit";
    if (!tree.implicit()) {
        j["labels"] = point_list_json(tree.labels());
    } else {
        json levels = json::array();
        for (const auto& lvl : tree.levels()) {
            levels.push_back(json{{"xs", point_list_json(lvl.decoder.table()->table())},
                                  {"b", lvl.decoder.offsets()},
                                  {"z0", lvl.z0.to_hex()},
                                  {"c0", static_cast<int>(lvl.c0)},
                                  {"ys", point_list_json(lvl.ys)},
                                  {"cy", bits_json(lvl.cy)}});
        }
        j["levels"] = levels;
        j["seeds"] = point_list_json(tree.seeds());
    }
    j["leaves"] = leaves_json(tree);
    return j.dump(2);
}

std::shared_ptr<ParityDecisionTree> tree_from_json(const std::string& text,
                                                   std::shared_ptr<const SetOracle> base) {
    json j = json::parse(text);
    uint32_t n = j.at("n").get<uint32_t>();
    bool implicit = j.at("mode").get<std::string>() == "implicit";
    auto tree = std::make_shared<ParityDecisionTree>(n, implicit);
    if (!implicit) {
        for (const auto& h : j.at("labels")) tree->add_explicit_level(Point::from_hex(h.get<std::string>()));
    } else {
        if (!base) throw std::invalid_argument("tree_from_json: implicit trees need the base oracle");
        auto seeds = point_list_from(j.at("seeds"));
        size_t idx = 0;
        for (const auto& jl : j.at("levels")) {
            ImplicitLevel lvl;
            auto table = std::make_shared<VotingTable>(base, point_list_from(jl.at("xs")));
            lvl.decoder = Decoder(table, jl.at("b").get<uint32_t>());
            lvl.z0 = Point::from_hex(jl.at("z0").get<std::string>());
            lvl.c0 = static_cast<uint8_t>(jl.at("c0").get<int>());
            lvl.ys = point_list_from(jl.at("ys"));
            lvl.cy = bits_from(jl.at("cy"));
            tree->add_implicit_level(std::move(lvl), seeds.at(idx++));
        }
    }
    auto& leaves = tree->leaves();
    for (const auto& jl : j.at("leaves")) {
        uint64_t addr = jl.at("address").get<uint64_t>();
        leaves.at(addr).keep = jl.at("keep").get<bool>();
        leaves.at(addr).density_estimate = jl.at("density_estimate").get<double>();
        leaves.at(addr).zeroed_unresolved = jl.at("zeroed_unresolved").get<bool>();
    }
    return tree;
}

std::string glresult_to_json(const GLResult& res, uint32_t n) {
    json oracles = json::array();
    for (const auto& g : res.oracles) {
        json jo{{"candidate", g.candidate}, {"correlation", g.correlation}};
        if (g.oracle.is_trivial()) {
            jo["trivial"] = true;
        } else {
            jo["trivial"] = false;
            jo["xs"] = point_list_json(g.oracle.decoder().table()->table());
            jo["b"] = g.oracle.decoder().offsets();
            jo["r"] = g.oracle.correction_reps();
            jo["m"] = g.oracle.amplification();
            jo["ys"] = point_list_json(g.oracle.correction_points());
            jo["cached"] = bits_json(g.oracle.cached_bits());
        }
        oracles.push_back(jo);
    }
    return json{{"n", n}, {"t", res.t}, {"correction_reps", res.correction_reps},
                {"oracles", oracles}}
        .dump(2);
}

GLResult glresult_from_json(const std::string& text, std::shared_ptr<const SetOracle> base) {
    json j = json::parse(text);
    GLResult res;
    res.t = j.at("t").get<uint32_t>();
    res.correction_reps = j.at("correction_reps").get<uint32_t>();
    uint32_t n = j.at("n").get<uint32_t>();
    for (const auto& jo : j.at("oracles")) {
        double corr = jo.at("correlation").get<double>();
        uint64_t cand = jo.at("candidate").get<uint64_t>();
        if (jo.at("trivial").get<bool>()) {
            res.oracles.push_back({ParityOracle::trivial(n), corr, cand});
        } else {
            auto table = std::make_shared<VotingTable>(base, point_list_from(jo.at("xs")));
            Decoder d(table, jo.at("b").get<uint32_t>());
            ParityOracle o = ParityOracle::from_parts(std::move(d), jo.at("r").get<uint32_t>(),
                                                      jo.at("m").get<uint32_t>(),
                                                      point_list_from(jo.at("ys")),
                                                      bits_from(jo.at("cached")));
            res.oracles.push_back({std::move(o), corr, cand});
        }
    }
    return res;
}

}  // namespace f2s
