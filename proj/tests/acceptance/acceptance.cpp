// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "attncause/eval/eval.hpp"
#include "attncause/explain/explain.hpp"
#include "attncause/model/sem.hpp"
#include "support/oracle.hpp"

using namespace attncause;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kBenchmarkSeed = 1;
constexpr int kBenchmarkSessions = 100;
constexpr double kPartialTolerance = 1e-10;
constexpr double kRecoveryBudgetSeconds = 10.0;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "  " << detail << std::endl;
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

void oracle_pag_recovery() {
    const auto start = std::chrono::steady_clock::now();
    int tp = 0, fp = 0, fn = 0, wrong_marks = 0, settled = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int observed = 5 + trial % 4;
        const int latent = trial % 3;
        const SemSpec spec = random_sem(1000 + static_cast<std::uint64_t>(trial), observed, latent);
        const oracle::MagTruth truth(oracle::Dag::from_sem(spec), observed);
        std::vector<ItemId> labels(static_cast<std::size_t>(observed));
        std::iota(labels.begin(), labels.end(), 1);
        const Attention a = attention_from_covariance(sem_covariance(spec));
        const Pag g = discover_from_attention(a, labels, {}, kPopulationSampleSize).pag;
        for (int x = 0; x < observed; ++x)
            for (int y = x + 1; y < observed; ++y) {
                const bool learned = g.adjacent(x, y), real = truth.adjacent[x][y];
                tp += learned && real;
                fp += learned && !real;
                fn += !learned && real;
                if (!learned || !real) continue;
                for (auto [p, q] : {std::pair{x, y}, std::pair{y, x}}) {
                    const EdgeMark m = g.mark_at(p, q);
                    if (m == EdgeMark::Circle) continue;
                    ++settled;
                    wrong_marks += m != truth.mark_at(p, q);
                }
            }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double f1 = tp ? 2.0 * tp / (2.0 * tp + fp + fn) : (fp + fn ? 0.0 : 1.0);
    report("oracle-pag-recovery", f1 == 1.0 && wrong_marks == 0 && secs < kRecoveryBudgetSeconds,
           fmt("skeleton_f1=%.4f wrong_marks=%.0f", f1, wrong_marks) + fmt(" settled_marks=%.0f seconds=%.3f", settled, secs));
}

void partial_correlation_correctness() {
    std::mt19937_64 rng(77);
    double worst = 0.0;
    int violations = 0, tests = 0;
    const std::vector<double> alphas{0.2, 0.1, 0.05, 0.01, 0.001, 1e-6};
    const std::vector<std::vector<int>> conds{{}, {2}, {3}, {2, 3}, {3, 4}};
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::MatrixXd r = oracle::random_correlation(rng, 5);
        for (const auto& z : conds)
            worst = std::max(worst, std::abs(partial_correlation(r, 0, 1, z) - oracle::recursive_partial(r, 0, 1, z)));
        Correlation rho;
        rho.values = r;
        rho.effective_sample_size = 10 + trial % 200;
        for (const auto& z : conds) {
            bool seen = false;
            for (double a : alphas) {
                const bool ind = ci_test(rho, 0, 1, z, a).independent;
                ++tests;
                violations += seen && !ind;
                seen = seen || ind;
            }
        }
    }
    report("partial-correlation", worst <= kPartialTolerance && violations == 0,
           fmt("max_abs_diff=%.3e tolerance=%.0e", worst, kPartialTolerance) +
               fmt(" monotonicity_violations=%.0f of %.0f", violations, tests));
}

void pi_set_equivalence() {
    std::mt19937_64 rng(4242);
    int discrepancies = 0, compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 9;
        const Pag g = oracle::random_pag(rng, n, 0.45);
        const PiTree t = build_pi_tree(g, n - 1);
        for (int r = 1; r < n; ++r) {
            std::vector<std::vector<NodeIndex>> got;
            for (const PiSet& s : enumerate_pi_sets(t, g, r)) got.push_back(s.members);
            ++compared;
            discrepancies += got != oracle::brute_pi_sets(g, n - 1, r, false);
        }
    }
    report("pi-set-equivalence", discrepancies == 0,
           fmt("discrepancies=%.0f radius_lists=%.0f graphs=200", discrepancies, compared));
}

// Every probe must be the next PI-set in search order, every earlier probe
// must replay as rejected, and the last accepted one as accepted.
void counterfactual_validity() {
    int found = 0, invalid = 0, replay_failures = 0;
    for (const SyntheticWorld& w : make_benchmark(kBenchmarkSeed, kBenchmarkSessions)) {
        SemRecommender model(w.sem, w.values);
        const ExplanationResult r = explain_session(w.session, model, {});
        if (!r.found()) continue;
        ++found;
        const auto pool = pool_from_ranking(r.original_ranking);
        SemRecommender fresh(w.sem, w.values);
        const Ranking after = fresh.recommend(without(w.session.items, r.explanation), 5);
        if (after.empty() || after.front().item == r.recommendation || !pool.contains(after.front().item)) ++invalid;

        const NodeIndex root = r.pag.size() - 1;
        const PiTree tree = build_pi_tree(r.pag, root);
        std::vector<std::vector<ItemId>> order;
        for (int rad = 1; rad <= *r.radius; ++rad)
            for (const PiSet& s : enumerate_pi_sets(tree, r.pag, rad)) {
                std::vector<ItemId> items;
                for (NodeIndex v : s.members) items.push_back(r.pag.label(v));
                order.push_back(items);
            }
        bool ok = r.probes.size() <= order.size();
        for (std::size_t i = 0; ok && i < r.probes.size(); ++i) {
            ok = r.probes[i].removed == order[i];
            const Ranking rr = fresh.recommend(without(w.session.items, order[i]), 5);
            const bool accepted = !rr.empty() && rr.front().item != r.recommendation && pool.contains(rr.front().item);
            ok = ok && accepted == (i + 1 == r.probes.size());
        }
        ok = ok && r.probes.back().removed == r.explanation;
        replay_failures += !ok;
    }
    report("counterfactual-validity", found > 0 && invalid == 0 && replay_failures == 0,
           fmt("explanations=%.0f invalid=%.0f minimality_replay_failures=%.0f", found, invalid, replay_failures));
}

void comparative_direction(const fs::path& out) {
    std::vector<EvalCase> cases;
    for (const SyntheticWorld& w : make_benchmark(kBenchmarkSeed, kBenchmarkSessions))
        cases.push_back({w.id, w.session, [w] { return std::make_unique<SemRecommender>(w.sem, w.values); }});
    const auto records = eval_run(cases, {}, 4);
    const Summary s = summarize(records, 5);
    write_reports(records, s, out);
    bool emitted = true;
    for (const char* f : {"positions.csv", "position_gain.csv", "set_sizes.csv", "size_difference.csv", "positions.svg",
                          "position_gain.svg", "set_sizes.svg", "size_difference.svg"})
        emitted = emitted && fs::exists(out / f);

    report("comparative-size", s.causal.mean_size <= s.attention.mean_size,
           fmt("causal=%.3f attention=%.3f", s.causal.mean_size, s.attention.mean_size));
    report("comparative-position", s.causal.mean_position <= s.attention.mean_position,
           fmt("causal=%.3f attention=%.3f", s.causal.mean_position, s.attention.mean_position));
    report("comparative-forward-passes", s.causal.mean_forward_passes < s.attention.mean_forward_passes,
           fmt("causal=%.3f attention=%.3f ratio=%.3f", s.causal.mean_forward_passes, s.attention.mean_forward_passes,
               s.forward_pass_ratio));
    report("comparative-reports", emitted, "csv+svg in " + out.string());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

void determinism(const std::string& cli, const fs::path& out) {
    bool same = true;
    int files = 0;
    std::string detail;
    std::vector<fs::path> dirs{out / "run1", out / "run2"};
    for (const fs::path& d : dirs) {
        fs::remove_all(d);
        const std::string cmd = "\"" + cli + "\" eval --seed " + std::to_string(kBenchmarkSeed) + " --sessions " +
                                std::to_string(kBenchmarkSessions) + " --jobs 4 --out-dir \"" + d.string() +
                                "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            same = false;
            detail = "eval run failed: " + cmd;
        }
    }
    if (same) {
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) {
                same = false;
                detail += e.path().filename().string() + " differs ";
            }
        }
        detail += std::to_string(files) + " csv files compared";
    }
    report("determinism", same && files > 0, detail);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string cli;
    std::string out_dir = "acceptance_out";
    app.add_option("--cli", cli, "attncause executable")->required();
    app.add_option("--out-dir", out_dir, "Scratch directory for reports");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out_dir);

    oracle_pag_recovery();
    partial_correlation_correctness();
    pi_set_equivalence();
    counterfactual_validity();
    comparative_direction(fs::path(out_dir) / "library");
    determinism(cli, out_dir);
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
