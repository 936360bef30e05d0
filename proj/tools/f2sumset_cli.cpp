// f2sumset: batch front-end for the sumset-size estimation pipeline.
//
// Subcommands:
//   gen    --spec FILE [--out DIR]           generate a set, report its stats
//   run    --spec FILE [pipeline flags]      full pipeline + report/transcript
//   sweep  --spec FILE [--threads N]         parameter grid -> CSV
//   audit  --spec FILE --tree FILE           re-audit a serialized tree
//   gl     --spec FILE --theta T [...]       standalone list decoding
//
// Exit codes: 0 success, 2 budget exhausted, 3 rejection sampling stalled,
// 1 any other error.

#include <CLI11.hpp>

#include <filesystem>
#include <thread>
#include <fstream>
#include <iostream>

#include "f2s/gl.hpp"
#include "f2s/report.hpp"

using namespace f2s;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

unsigned thread_budget(unsigned requested) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned cap = hw;
    if (const char* env = std::getenv("SUMSET_THREADS")) {
        unsigned v = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        if (v > 0) cap = v;
    }
    return std::min(requested == 0 ? hw : requested, cap);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sumset-size estimation over F2^n"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, tree_path, format = "json", mode = "explicit";
    double eps = 0.1, tau = 0.1, gamma = 0.05, delta = 0.05, theta = 0.2;
    uint32_t kmax = 12, imax = 0;
    uint64_t seed = 1;
    unsigned threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--spec", spec_path, "set-spec JSON file")->required();
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a set and print its stats");
    add_common(gen);

    CLI::App* run = app.add_subcommand("run", "run the pipeline and write the report");
    add_common(run);
    run->add_option("--eps", eps, "quasirandomness parameter");
    run->add_option("--tau", tau, "density threshold");
    run->add_option("--gamma", gamma, "volume estimate precision");
    run->add_option("--delta", delta, "volume estimate confidence");
    run->add_option("--mode", mode, "explicit|implicit");
    run->add_option("--kmax", kmax, "codimension cap");
    run->add_option("--imax", imax, "stage cap (0: 4/eps^3)");
    run->add_option("--seed", seed, "root seed");
    run->add_option("--format", format, "json|csv");

    CLI::App* sweep = app.add_subcommand("sweep", "grid of runs -> CSV");
    add_common(sweep);
    sweep->add_option("--threads", threads, "worker threads (0: hardware)");

    CLI::App* audit_cmd = app.add_subcommand("audit", "re-audit a serialized tree");
    add_common(audit_cmd);
    audit_cmd->add_option("--tree", tree_path, "tree JSON file")->required();
    audit_cmd->add_option("--eps", eps, "quasirandomness parameter");
    audit_cmd->add_option("--tau", tau, "density threshold");
    audit_cmd->add_option("--mode", mode, "explicit|implicit");

    CLI::App* gl = app.add_subcommand("gl", "standalone list decoding");
    add_common(gl);
    gl->add_option("--theta", theta, "significance threshold");
    gl->add_option("--delta", delta, "confidence");
    gl->add_option("--seed", seed, "root seed");
    gl->add_option("--mode", mode, "implicit|explicit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
        auto out_path = [&](const std::string& name) {
            return out_dir.empty() ? name : out_dir + "/" + name;
        };

        if (*gen) {
            GeneratedSet g = generate(SetSpec::from_json(slurp(spec_path)));
            std::ostringstream os;
            os << "{\n  \"spec\": " << g.spec.to_json() << ",\n";
            os << "  \"n\": " << g.spec.n;
            if (g.twin) {
                os << ",\n  \"cardinality\": " << g.twin->cardinality();
                os << ",\n  \"volume\": " << g.twin->volume();
            }
            os << "\n}\n";
            std::cout << os.str();
            if (!out_dir.empty()) spill(out_path("set.json"), os.str());
            return 0;
        }

        if (*run) {
            RunParams params;
            params.eps = eps;
            params.tau = tau;
            params.gamma_vol = gamma;
            params.delta_vol = delta;
            params.mode = mode;
            params.k_max = kmax;
            params.i_max = imax;
            params.seed = seed;
            RunOutput result = run_pipeline(SetSpec::from_json(slurp(spec_path)), params);
            std::string report = result.report.to_json();
            std::cout << report << "\n";
            if (!out_dir.empty()) {
                spill(out_path("report.json"), report);
                spill(out_path("transcript.jsonl"),
                      transcript_to_jsonl(result.sim.regularity.transcript));
                spill(out_path("tree.json"), tree_to_json(*result.sim.regularity.tree));
            }
            return 0;
        }

        if (*sweep) {
            std::string csv = sweep_csv(SweepGrid::from_json(slurp(spec_path)),
                                        thread_budget(threads));
            std::cout << csv;
            if (!out_dir.empty()) spill(out_path("sweep.csv"), csv);
            return 0;
        }

        if (*audit_cmd) {
            GeneratedSet g = generate(SetSpec::from_json(slurp(spec_path)));
            if (!g.twin) throw std::runtime_error("audit requires n <= 24 (stored twin)");
            auto tree = tree_from_json(slurp(tree_path), g.oracle);
            SimulateResult sim;
            sim.mode = mode == "implicit" ? PipelineMode::Implicit : PipelineMode::Explicit;
            sim.regularity.tree = tree;
            RouteMode route = sim.mode == PipelineMode::Explicit ? RouteMode::Exact
                                                                 : RouteMode::Corrected;
            sim.a_prime = std::make_shared<RestrictedOracle>(tree, g.oracle, route);
            sim.sumset = std::make_shared<SumsetOracle>(SumTree::closure(tree), route);
            AuditReport rep = audit(*g.twin, eps, tau, sim);
            std::string text = audit_to_json(rep);
            std::cout << text << "\n";
            if (!out_dir.empty()) spill(out_path("audit.json"), text);
            return rep.all_pass ? 0 : 1;
        }

        if (*gl) {
            GeneratedSet g = generate(SetSpec::from_json(slurp(spec_path)));
            RandomSource rng(seed);
            uint64_t before = g.oracle->query_count();
            if (mode == "implicit") {
                GLResult res = implicit_gl(g.oracle, theta, delta, rng);
                std::cout << "survivors: " << res.oracles.size()
                          << ", queries: " << g.oracle->query_count() - before << "\n";
                for (const auto& o : res.oracles)
                    std::cout << "  candidate " << o.candidate << " correlation " << o.correlation
                              << (o.oracle.is_trivial() ? " (trivial)" : "") << "\n";
                if (!out_dir.empty())
                    spill(out_path("glresult.json"), glresult_to_json(res, g.spec.n));
            } else {
                auto res = explicit_gl(g.oracle, theta, delta, rng);
                std::cout << "frequencies: " << res.size()
                          << ", queries: " << g.oracle->query_count() - before << "\n";
                for (const auto& c : res)
                    std::cout << "  " << c.freq.to_hex() << " estimate " << c.estimate << "\n";
            }
            return 0;
        }
    } catch (const BudgetExhausted& e) {
        std::cerr << "budget_exhausted: " << e.what() << "\n";
        return 2;
    } catch (const RejectionStall& e) {
        std::cerr << "rejection_stall: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
