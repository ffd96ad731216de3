#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attncause/eval/eval.hpp"
#include "attncause/explain/explain.hpp"
#include "attncause/model/sem.hpp"
#include "attncause/model/simulate.hpp"
#include "attncause/model/tiny_model.hpp"
#include "attncause/model/trace.hpp"

using namespace attncause;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoExplanation = 2;

struct Common {
    double alpha = 0.01;
    std::size_t top_k = 5;
    std::string heads = "mean";
    std::string rule_set = "core";
    std::string possible_dsep = "auto";
    bool no_pool = false;
    bool permissive = false;
    std::int64_t effective_n = 0;
    std::optional<int> max_cond;

    [[nodiscard]] ExplainConfig config() const {
        ExplainConfig cfg;
        cfg.discovery.alpha = alpha;
        cfg.discovery.max_cond_size = max_cond;
        cfg.discovery.rule_set = rule_set == "extended" ? RuleSet::Extended : RuleSet::Core;
        cfg.discovery.possible_dsep = possible_dsep == "always"  ? PossibleDsep::Always
                                      : possible_dsep == "never" ? PossibleDsep::Never
                                                                 : PossibleDsep::Auto;
        cfg.discovery.validate();
        cfg.top_k = top_k;
        cfg.use_pool = !no_pool;
        cfg.effective_sample_size = effective_n;
        cfg.reading = permissive ? ArrowheadReading::Permissive : ArrowheadReading::Strict;
        return cfg;
    }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--alpha", c.alpha, "Significance level of the Fisher-z test")->check(CLI::Range(0.0, 1.0));
    app->add_option("--top-k", c.top_k, "Ranking length; the replacement pool is ranks 2..k")
        ->check(CLI::PositiveNumber);
    app->add_option("--heads", c.heads, "Attention head: 'mean' or a head index");
    app->add_option("--rule-set", c.rule_set, "Orientation rules")
        ->check(CLI::IsMember({"core", "extended"}));
    app->add_option("--possible-dsep", c.possible_dsep, "Possible-d-sep refinement")
        ->check(CLI::IsMember({"auto", "always", "never"}));
    app->add_option("--effective-n", c.effective_n, "Sample size for the Fisher-z statistic");
    app->add_option("--max-cond", c.max_cond, "Largest conditioning set");
}

// Where the model answers come from.
struct Source {
    std::string trace;
    std::string session_id;
    std::string serve;
    std::string weights;
    std::string worlds;
    std::vector<ItemId> items;
};

void add_source(CLI::App* app, Source& s) {
    app->add_option("--trace", s.trace, "Trace file (JSON lines)");
    app->add_option("--session", s.session_id, "Session id inside --trace or --worlds");
    app->add_option("--serve", s.serve, "Command speaking the JSON-lines model protocol");
    app->add_option("--weights", s.weights, "Tiny attention model weights (JSON)");
    app->add_option("--worlds", s.worlds, "Synthetic worlds file written by 'simulate'");
    app->add_option("--items", s.items, "Session item ids, oldest first")->delimiter(',');
}

struct Resolved {
    std::string id;
    Session session;
    std::unique_ptr<Recommender> model;
};

template <typename T>
const T& pick(const std::vector<T>& all, const std::string& id, auto id_of, const std::string& what) {
    if (all.empty()) throw Error(what + " is empty");
    if (id.empty()) {
        if (all.size() != 1) throw Error(what + " holds several sessions; choose one with --session");
        return all.front();
    }
    for (const T& t : all)
        if (id_of(t) == id) return t;
    throw Error("session '" + id + "' not found in " + what);
}

Resolved resolve(const Source& src, const Common& c) {
    Resolved r;
    std::shared_ptr<IpcClient> live;
    if (!src.serve.empty()) live = std::make_shared<IpcClient>(src.serve);

    if (!src.trace.empty()) {
        const auto sessions = read_trace(src.trace);
        const TraceSession& t =
            pick(sessions, src.session_id, [](const TraceSession& s) { return s.session_id; }, src.trace);
        r.id = t.session_id;
        r.session.items = t.items;
        r.model = std::make_unique<TraceRecommender>(t, live);
        return r;
    }
    if (!src.worlds.empty()) {
        std::ifstream in(src.worlds);
        if (!in) throw Error("cannot open " + src.worlds);
        std::vector<SyntheticWorld> worlds;
        for (std::string line; std::getline(in, line);) {
            if (!line.empty()) worlds.push_back(world_from_json(json::parse(line)));
        }
        const SyntheticWorld& w = pick(worlds, src.session_id, [](const SyntheticWorld& x) { return x.id; }, src.worlds);
        r.id = w.id;
        r.session = w.session;
        r.model = std::make_unique<SemRecommender>(w.sem, w.values);
        return r;
    }
    if (src.items.empty()) throw Error("give --trace, --worlds, or --items with --weights or --serve");
    r.session.items = src.items;
    if (!src.weights.empty()) {
        r.model = std::make_unique<TinyRecommender>(load_tiny_weights(src.weights), HeadSelection::parse(c.heads));
    } else if (live) {
        // Shared ownership keeps the child alive for the model's lifetime.
        struct Live final : Recommender {
            std::shared_ptr<IpcClient> c;
            Ranking recommend(std::span<const ItemId> s, std::size_t k) override { return c->recommend(s, k); }
            Attention attention(std::span<const ItemId> t) override { return c->attention(t); }
        };
        auto m = std::make_unique<Live>();
        m->c = live;
        r.model = std::move(m);
    } else {
        throw Error("--items needs --weights or --serve");
    }
    return r;
}

json result_json(const std::string& id, const ExplanationResult& r) {
    json probes = json::array();
    for (const Probe& p : r.probes) {
        probes.push_back({{"removed", p.removed},
                          {"top1", p.top1 ? json(*p.top1) : json(nullptr)},
                          {"accepted", p.accepted}});
    }
    json out = {{"session_id", id},
                {"recommendation", r.recommendation},
                {"explanation", r.explanation},
                {"alternative", r.alternative ? json(*r.alternative) : json(nullptr)},
                {"radius", r.radius ? json(*r.radius) : json(nullptr)},
                {"forward_passes", r.forward_passes},
                {"probes", std::move(probes)},
                {"topk", ranking_to_json(r.original_ranking)},
                {"pag", to_text(r.pag)}};
    if (!r.message.empty()) out["message"] = r.message;
    return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

int run_explain(const Source& src, const Common& c, const std::string& out_dir, const std::string& dot) {
    Resolved r = resolve(src, c);
    const ExplanationResult result = explain_session(r.session, *r.model, c.config());
    const json j = result_json(r.id, result);
    std::cout << j.dump(2) << '\n';
    if (!dot.empty()) write_text(dot, to_dot(result.pag));
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(std::filesystem::path(out_dir) / "result.json", j.dump(2) + "\n");
        write_text(std::filesystem::path(out_dir) / "pag.txt", to_text(result.pag));
        write_text(std::filesystem::path(out_dir) / "pag.dot", to_dot(result.pag));
    }
    if (!result.found()) {
        std::cerr << result.message << '\n';
        return kExitNoExplanation;
    }
    return kExitOk;
}

int run_discover(const Source& src, const Common& c, const std::string& sem_path, const std::string& dot) {
    const ExplainConfig cfg = c.config();
    DiscoveryResult learned;
    if (!sem_path.empty()) {
        std::ifstream in(sem_path);
        if (!in) throw Error("cannot open " + sem_path);
        const SemSpec spec = sem_from_json(json::parse(in));
        std::vector<ItemId> labels(static_cast<std::size_t>(spec.observed));
        for (int i = 0; i < spec.observed; ++i) labels[static_cast<std::size_t>(i)] = i;
        learned = discover_from_attention(attention_from_covariance(sem_covariance(spec)), labels, cfg.discovery,
                                          cfg.effective_sample_size);
    } else {
        Resolved r = resolve(src, c);
        const Ranking ranking = r.model->recommend(r.session.items, cfg.top_k);
        if (ranking.empty()) throw Error("model returned an empty ranking");
        std::vector<ItemId> tokens = r.session.items;
        tokens.push_back(ranking.front().item);
        learned = discover_from_attention(r.model->attention(tokens), tokens, cfg.discovery,
                                          cfg.effective_sample_size);
    }
    std::cout << to_text(learned.pag);
    if (!dot.empty()) write_text(dot, to_dot(learned.pag));
    std::cerr << "ci_tests " << learned.ci_tests << (learned.ran_possible_dsep ? " (possible-d-sep)" : "") << '\n';
    return kExitOk;
}

int run_simulate(std::uint64_t seed, int sessions, std::size_t k, int max_removed, const std::string& out_dir,
                 const std::string& tiny_path, int vocab, int dim, int heads) {
    std::filesystem::create_directories(out_dir);
    const auto worlds = make_benchmark(seed, sessions);
    std::ofstream wf(std::filesystem::path(out_dir) / "worlds.jsonl", std::ios::binary);
    std::vector<TraceSession> traces;
    for (const SyntheticWorld& w : worlds) {
        wf << to_json(w).dump() << '\n';
        traces.push_back(trace_from_world(w, k, max_removed));
    }
    write_trace(std::filesystem::path(out_dir) / "trace.jsonl", traces);
    if (!tiny_path.empty()) {
        std::vector<ItemId> ids(static_cast<std::size_t>(vocab));
        for (int i = 0; i < vocab; ++i) ids[static_cast<std::size_t>(i)] = i;
        save_tiny_weights(random_tiny_weights(seed, ids, dim, heads, 64), tiny_path);
    }
    std::cerr << "wrote " << worlds.size() << " sessions to " << out_dir << '\n';
    return kExitOk;
}

int run_eval(const Common& c, std::uint64_t seed, int sessions, const std::string& trace, const std::string& serve,
             const std::string& out_dir, int jobs) {
    const ExplainConfig cfg = c.config();
    std::vector<EvalCase> cases;
    std::shared_ptr<IpcClient> live;
    if (!serve.empty()) {
        live = std::make_shared<IpcClient>(serve);
        jobs = 1;  // one request in flight per endpoint
    }
    if (!trace.empty()) {
        for (TraceSession& t : read_trace(trace)) {
            EvalCase ec;
            ec.session_id = t.session_id;
            ec.session.items = t.items;
            ec.make_model = [t, live] { return std::make_unique<TraceRecommender>(t, live); };
            cases.push_back(std::move(ec));
        }
    } else {
        for (SyntheticWorld& w : make_benchmark(seed, sessions)) {
            EvalCase ec;
            ec.session_id = w.id;
            ec.session = w.session;
            ec.make_model = [w] { return std::make_unique<SemRecommender>(w.sem, w.values); };
            cases.push_back(std::move(ec));
        }
    }
    const auto records = eval_run(cases, cfg, jobs);
    const Summary summary = summarize(records, static_cast<int>(cfg.top_k));
    write_reports(records, summary, out_dir);
    std::cout << summary_csv(summary);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual explanations for attention-based sequential recommenders"};
    app.require_subcommand(1);

    Common common;
    Source source;
    std::string out_dir;
    std::string dot;

    auto* explain = app.add_subcommand("explain", "Explain the top-1 recommendation of one session");
    add_common(explain, common);
    add_source(explain, source);
    explain->add_flag("--no-pool", common.no_pool, "Accept any changed top-1");
    explain->add_flag("--permissive", common.permissive, "Treat circle marks as possible arrowheads in PI-paths");
    explain->add_option("--out-dir", out_dir, "Write result.json, pag.txt and pag.dot here");
    explain->add_option("--dot", dot, "Write the learned PAG as Graphviz");

    std::string sem_path;
    auto* discover = app.add_subcommand("discover", "Print the PAG learned from attention");
    add_common(discover, common);
    add_source(discover, source);
    discover->add_option("--sem", sem_path, "Learn from the exact covariance of an SEM spec (JSON)");
    discover->add_option("--dot", dot, "Write the learned PAG as Graphviz");

    std::uint64_t seed = 1;
    int sessions = 100;
    int max_removed = -1;
    std::string tiny_path;
    int vocab = 50, dim = 16, heads = 2;
    int jobs = 1;
    std::size_t sim_k = 5;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic benchmark as worlds and a trace file");
    simulate->add_option("--seed", seed, "Benchmark seed");
    simulate->add_option("--sessions", sessions, "Number of sessions")->check(CLI::PositiveNumber);
    simulate->add_option("--top-k", sim_k, "Ranking length stored per query")->check(CLI::PositiveNumber);
    simulate->add_option("--max-removed", max_removed, "Largest removal set recorded (default: all)");
    simulate->add_option("--out-dir", out_dir, "Output directory")->required();
    simulate->add_option("--tiny-weights", tiny_path, "Also write random tiny-model weights here");
    simulate->add_option("--vocab", vocab, "Tiny-model vocabulary size")->check(CLI::PositiveNumber);
    simulate->add_option("--dim", dim, "Tiny-model width")->check(CLI::PositiveNumber);
    simulate->add_option("--heads-count", heads, "Tiny-model heads")->check(CLI::PositiveNumber);

    std::string eval_trace, eval_serve;
    auto* eval = app.add_subcommand("eval", "Compare causal and attention explanations over a benchmark");
    add_common(eval, common);
    eval->add_flag("--no-pool", common.no_pool, "Accept any changed top-1");
    eval->add_flag("--permissive", common.permissive, "Treat circle marks as possible arrowheads in PI-paths");
    eval->add_option("--seed", seed, "Synthetic benchmark seed");
    eval->add_option("--sessions", sessions, "Synthetic sessions")->check(CLI::PositiveNumber);
    eval->add_option("--trace", eval_trace, "Evaluate the sessions of a trace file instead");
    eval->add_option("--serve", eval_serve, "Live endpoint for queries missing from the trace");
    eval->add_option("--out-dir", out_dir, "Directory for CSV and SVG reports")->required();
    eval->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*explain) return run_explain(source, common, out_dir, dot);
        if (*discover) return run_discover(source, common, sem_path, dot);
        if (*simulate) return run_simulate(seed, sessions, sim_k, max_removed, out_dir, tiny_path, vocab, dim, heads);
        if (*eval) return run_eval(common, seed, sessions, eval_trace, eval_serve, out_dir, jobs);
    } catch (const ProbeError& e) {
        std::cerr << "error: " << e.what() << " (removing";
        for (ItemId v : e.removed()) std::cerr << ' ' << v;
        std::cerr << ")\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
