#pragma once

#include <optional>
#include <string>

#include "f2s/setspec.hpp"
#include "f2s/sumset.hpp"

namespace f2s {

struct RunParams {
    double eps = 0.1;
    double tau = 0.1;
    double gamma_vol = 0.05;  // volume estimate precision
    double delta_vol = 0.05;  // volume estimate confidence
    std::string mode = "explicit";
    uint32_t k_max = 12;
    uint32_t i_max = 0;  // 0: ceil(4/eps^3)
    uint32_t route_reps = 5;
    uint64_t seed = 1;
    double chebyshev_constant = 16.0;

    RegularityBudget budget() const {
        RegularityBudget b;
        b.eps = eps;
        b.tau = tau;
        b.k_max = k_max;
        b.i_max = i_max;
        b.route_reps = route_reps;
        return b;
    }
    PipelineMode pipeline_mode() const {
        if (mode == "explicit") return PipelineMode::Explicit;
        if (mode == "implicit") return PipelineMode::Implicit;
        throw std::invalid_argument("mode must be explicit or implicit");
    }
};

struct PhaseMeter {
    std::string name;
    uint64_t queries = 0;
};

struct RunReport {
    SetSpec spec;
    RunParams params;
    uint32_t depth = 0;
    uint64_t kept_leaves = 0;
    std::vector<PhaseMeter> phases;
    uint64_t total_queries = 0;     // sum over all phases, audit included
    uint64_t pipeline_queries = 0;  // construct + volume: the algorithm's own budget
    VolumeEstimate volume;
    std::optional<AuditReport> audit_report;
    double wall_ms = 0.0;

    // Stable-keyed JSON; byte-identical across runs except the wall_ms field.
    std::string to_json() const;
};

struct RunOutput {
    RunReport report;
    SimulateResult sim;
    std::shared_ptr<SetOracle> oracle;
    std::shared_ptr<const StoredSet> twin;
};

RunOutput run_pipeline(const SetSpec& spec, const RunParams& params);

struct SweepGrid {
    SetSpec base_spec;
    RunParams base_params;
    std::vector<uint32_t> ns;
    std::vector<double> epss;
    std::vector<double> taus;
    std::vector<std::string> modes;
    std::vector<uint64_t> seeds;

    static SweepGrid from_json(const std::string& text);
};

// One row per run; stable column order
// n,eps,tau,queries,dist,volume,mode,seed.
std::string sweep_csv(const SweepGrid& grid, unsigned threads);

std::string transcript_to_jsonl(const std::vector<StageRecord>& transcript);
std::string audit_to_json(const AuditReport& rep);

std::string tree_to_json(const ParityDecisionTree& tree);
std::shared_ptr<ParityDecisionTree> tree_from_json(const std::string& text,
                                                   std::shared_ptr<const SetOracle> base);

std::string glresult_to_json(const GLResult& res, uint32_t n);
GLResult glresult_from_json(const std::string& text, std::shared_ptr<const SetOracle> base);

}  // namespace f2s
