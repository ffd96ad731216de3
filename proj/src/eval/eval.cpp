#include "attncause/eval/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "attncause/eval/baseline.hpp"

namespace attncause {

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

EvalRecord record_from(const std::string& id, Method m, const ExplanationResult& r) {
    EvalRecord rec;
    rec.session_id = id;
    rec.method = m;
    rec.found = r.found();
    rec.explanation_size = static_cast<int>(r.explanation.size());
    rec.forward_passes = r.forward_passes;
    rec.probes = static_cast<int>(r.probes.size());
    if (r.alternative) {
        for (std::size_t i = 0; i < r.original_ranking.size(); ++i) {
            if (r.original_ranking[i].item == *r.alternative) {
                rec.position = static_cast<int>(i) + 1;
                break;
            }
        }
    }
    return rec;
}

EvalRecord failed(const std::string& id, Method m, const std::string& what) {
    EvalRecord rec;
    rec.session_id = id;
    rec.method = m;
    rec.error = what.empty() ? "unknown error" : what;
    return rec;
}

MethodSummary summarize_method(const std::vector<const EvalRecord*>& rs, int k) {
    MethodSummary m;
    m.histogram.assign(static_cast<std::size_t>(std::max(k - 1, 0)) + 2, 0);
    const std::size_t outside = m.histogram.size() - 2;
    const std::size_t none = m.histogram.size() - 1;
    double passes = 0.0;
    double sizes = 0.0;
    double positions = 0.0;
    int positioned = 0;
    int counted = 0;
    for (const EvalRecord* r : rs) {
        ++m.sessions;
        if (!r->error.empty()) {
            ++m.errors;
            continue;
        }
        ++counted;
        passes += r->forward_passes;
        if (!r->found) {
            ++m.histogram[none];
            continue;
        }
        ++m.found;
        sizes += r->explanation_size;
        m.sorted_sizes.push_back(r->explanation_size);
        if (r->position && *r->position >= 2 && *r->position <= k) {
            ++m.histogram[static_cast<std::size_t>(*r->position - 2)];
            positions += *r->position;
            ++positioned;
        } else {
            ++m.histogram[outside];
        }
    }
    std::sort(m.sorted_sizes.begin(), m.sorted_sizes.end());
    if (m.found > 0) m.mean_size = sizes / m.found;
    if (positioned > 0) m.mean_position = positions / positioned;
    if (counted > 0) m.mean_forward_passes = passes / counted;
    return m;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
    if (!out) throw Error("write failed for " + p.string());
}

struct Series {
    std::string name;
    std::vector<double> values;
    std::string colour;
};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Grouped bar chart with a zero baseline; negative values hang below it.
std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series, const std::string& y_label) {
    const double width = 640, height = 360, left = 60, right = 20, top = 40, bottom = 60;
    double hi = 0.0, lo = 0.0;
    for (const Series& s : series)
        for (double v : s.values) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    if (hi == lo) hi = lo + 1.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
    const double zero = y_of(0.0);

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
      << "</text>\n";
    o << "<text x=\"14\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 14 " << top + plot_h / 2
      << ")\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << fixed(zero, 2) << "\" x2=\"" << left + plot_w << "\" y2=\""
      << fixed(zero, 2) << "\" stroke=\"black\"/>\n";
    for (double tick : {lo, hi}) {
        o << "<text x=\"" << left - 4 << "\" y=\"" << fixed(y_of(tick) + 4, 2) << "\" text-anchor=\"end\">"
          << fixed(tick, 2) << "</text>\n";
    }

    const std::size_t n = categories.size();
    const double group_w = n ? plot_w / static_cast<double>(n) : plot_w;
    const double bar_w = series.empty() ? 0 : group_w * 0.8 / static_cast<double>(series.size());
    for (std::size_t c = 0; c < n; ++c) {
        const double gx = left + group_w * static_cast<double>(c);
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = c < series[s].values.size() ? series[s].values[c] : 0.0;
            const double x = gx + group_w * 0.1 + bar_w * static_cast<double>(s);
            const double y = std::min(y_of(v), zero);
            const double h = std::abs(y_of(v) - zero);
            o << "<rect x=\"" << fixed(x, 2) << "\" y=\"" << fixed(y, 2) << "\" width=\"" << fixed(bar_w, 2)
              << "\" height=\"" << fixed(h, 2) << "\" fill=\"" << series[s].colour << "\"/>\n";
        }
        if (n <= 30 || c % (n / 20 + 1) == 0) {
            o << "<text x=\"" << fixed(gx + group_w / 2, 2) << "\" y=\"" << top + plot_h + 16
              << "\" text-anchor=\"middle\">" << escape_xml(categories[c]) << "</text>\n";
        }
    }
    double ly = top;
    for (const Series& s : series) {
        o << "<rect x=\"" << width - right - 110 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\""
          << s.colour << "\"/>\n";
        o << "<text x=\"" << width - right - 96 << "\" y=\"" << ly + 9 << "\">" << escape_xml(s.name) << "</text>\n";
        ly += 14;
    }
    o << "</svg>\n";
    return o.str();
}

const char* kCausalColour = "#1f77b4";
const char* kAttentionColour = "#ff7f0e";

std::vector<std::string> histogram_labels(int k) {
    std::vector<std::string> labels;
    for (int p = 2; p <= k; ++p) labels.push_back(std::to_string(p));
    labels.emplace_back("outside");
    labels.emplace_back("none");
    return labels;
}

}  // namespace

std::string method_name(Method m) { return m == Method::Causal ? "causal" : "attention"; }

std::vector<EvalRecord> eval_case(const EvalCase& c, const ExplainConfig& cfg) {
    std::vector<EvalRecord> out;
    std::unique_ptr<Recommender> model;
    try {
        model = c.make_model();
    } catch (const std::exception& e) {
        out.push_back(failed(c.session_id, Method::Causal, e.what()));
        out.push_back(failed(c.session_id, Method::Attention, e.what()));
        return out;
    }

    ExplanationResult causal;
    try {
        causal = explain_session(c.session, *model, cfg);
        out.push_back(record_from(c.session_id, Method::Causal, causal));
    } catch (const std::exception& e) {
        out.push_back(failed(c.session_id, Method::Causal, e.what()));
        out.push_back(failed(c.session_id, Method::Attention, "no recommendation available"));
        return out;
    }

    try {
        const Pool pool = cfg.use_pool ? Pool(pool_from_ranking(causal.original_ranking)) : Pool();
        ExplanationResult base = atten_baseline(*model, c.session, causal.recommendation, pool, cfg.top_k);
        base.original_ranking = causal.original_ranking;
        out.push_back(record_from(c.session_id, Method::Attention, base));
    } catch (const std::exception& e) {
        out.push_back(failed(c.session_id, Method::Attention, e.what()));
    }
    return out;
}

std::vector<EvalRecord> eval_run(const std::vector<EvalCase>& cases, const ExplainConfig& cfg, int workers) {
    std::vector<std::vector<EvalRecord>> slots(cases.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) slots[i] = eval_case(cases[i], cfg);
    };
    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(cases.size())));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    std::vector<EvalRecord> out;
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
    std::stable_sort(out.begin(), out.end(), [](const EvalRecord& a, const EvalRecord& b) {
        if (a.session_id != b.session_id) return a.session_id < b.session_id;
        return a.method < b.method;
    });
    return out;
}

Summary summarize(const std::vector<EvalRecord>& records, int k) {
    Summary s;
    s.k = k;
    std::vector<const EvalRecord*> causal, attention;
    std::map<std::string, std::pair<const EvalRecord*, const EvalRecord*>> by_session;
    for (const EvalRecord& r : records) {
        (r.method == Method::Causal ? causal : attention).push_back(&r);
        auto& slot = by_session[r.session_id];
        (r.method == Method::Causal ? slot.first : slot.second) = &r;
    }
    s.causal = summarize_method(causal, k);
    s.attention = summarize_method(attention, k);
    for (int p = 2; p <= k; ++p) {
        const int a = s.attention.histogram[static_cast<std::size_t>(p - 2)];
        const int c = s.causal.histogram[static_cast<std::size_t>(p - 2)];
        s.relative_gain.push_back(a == 0 ? std::nullopt
                                         : std::optional<double>(static_cast<double>(c - a) / static_cast<double>(a)));
    }
    for (const auto& [id, pair] : by_session) {
        const auto [c, a] = pair;
        if (c && a && c->found && a->found && c->error.empty() && a->error.empty()) {
            s.size_difference.emplace_back(id, a->explanation_size - c->explanation_size);
        }
    }
    if (s.causal.mean_forward_passes > 0)
        s.forward_pass_ratio = s.attention.mean_forward_passes / s.causal.mean_forward_passes;
    return s;
}

std::string records_csv(const std::vector<EvalRecord>& records) {
    std::ostringstream o;
    o << "session_id,method,found,explanation_size,position,forward_passes,probes,error\n";
    for (const EvalRecord& r : records) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        o << r.session_id << ',' << method_name(r.method) << ',' << (r.found ? 1 : 0) << ',' << r.explanation_size
          << ',' << (r.position ? std::to_string(*r.position) : "") << ',' << r.forward_passes << ',' << r.probes
          << ',' << (err.empty() ? "" : "\"" + err + "\"") << '\n';
    }
    return o.str();
}

std::string positions_csv(const Summary& s) {
    std::ostringstream o;
    o << "position,causal,attention\n";
    const auto labels = histogram_labels(s.k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        o << labels[i] << ',' << s.causal.histogram[i] << ',' << s.attention.histogram[i] << '\n';
    }
    return o.str();
}

std::string position_gain_csv(const Summary& s) {
    std::ostringstream o;
    o << "position,relative_gain\n";
    for (std::size_t i = 0; i < s.relative_gain.size(); ++i) {
        o << i + 2 << ',' << (s.relative_gain[i] ? fixed(*s.relative_gain[i]) : "") << '\n';
    }
    return o.str();
}

std::string set_sizes_csv(const Summary& s) {
    std::ostringstream o;
    o << "rank,causal,attention\n";
    const std::size_t n = std::max(s.causal.sorted_sizes.size(), s.attention.sorted_sizes.size());
    for (std::size_t i = 0; i < n; ++i) {
        o << i + 1 << ','
          << (i < s.causal.sorted_sizes.size() ? std::to_string(s.causal.sorted_sizes[i]) : "") << ','
          << (i < s.attention.sorted_sizes.size() ? std::to_string(s.attention.sorted_sizes[i]) : "") << '\n';
    }
    return o.str();
}

std::string size_difference_csv(const Summary& s) {
    std::ostringstream o;
    o << "session_id,attention_minus_causal\n";
    for (const auto& [id, d] : s.size_difference) o << id << ',' << d << '\n';
    return o.str();
}

std::string summary_csv(const Summary& s) {
    std::ostringstream o;
    o << "method,sessions,found,errors,mean_size,mean_position,mean_forward_passes\n";
    for (const auto& [name, m] : {std::pair{"causal", &s.causal}, std::pair{"attention", &s.attention}}) {
        o << name << ',' << m->sessions << ',' << m->found << ',' << m->errors << ',' << fixed(m->mean_size) << ','
          << fixed(m->mean_position) << ',' << fixed(m->mean_forward_passes) << '\n';
    }
    o << "forward_pass_ratio,,,,,," << fixed(s.forward_pass_ratio) << '\n';
    return o.str();
}

void write_reports(const std::vector<EvalRecord>& records, const Summary& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "records.csv", records_csv(records));
    write_file(dir / "positions.csv", positions_csv(s));
    write_file(dir / "position_gain.csv", position_gain_csv(s));
    write_file(dir / "set_sizes.csv", set_sizes_csv(s));
    write_file(dir / "size_difference.csv", size_difference_csv(s));
    write_file(dir / "summary.csv", summary_csv(s));

    auto as_double = [](const std::vector<int>& v) { return std::vector<double>(v.begin(), v.end()); };
    write_file(dir / "positions.svg",
               bar_chart("Replacement position", histogram_labels(s.k),
                         {{"causal", as_double(s.causal.histogram), kCausalColour},
                          {"attention", as_double(s.attention.histogram), kAttentionColour}},
                         "sessions"));

    std::vector<std::string> gain_labels;
    std::vector<double> gains;
    for (std::size_t i = 0; i < s.relative_gain.size(); ++i) {
        gain_labels.push_back(std::to_string(i + 2));
        gains.push_back(s.relative_gain[i].value_or(0.0));
    }
    write_file(dir / "position_gain.svg",
               bar_chart("Relative gain per position", gain_labels, {{"causal vs attention", gains, kCausalColour}},
                         "relative gain"));

    const std::size_t n = std::max(s.causal.sorted_sizes.size(), s.attention.sorted_sizes.size());
    std::vector<std::string> rank_labels;
    for (std::size_t i = 0; i < n; ++i) rank_labels.push_back(std::to_string(i + 1));
    write_file(dir / "set_sizes.svg",
               bar_chart("Explanation size (sorted)", rank_labels,
                         {{"causal", as_double(s.causal.sorted_sizes), kCausalColour},
                          {"attention", as_double(s.attention.sorted_sizes), kAttentionColour}},
                         "items"));

    std::vector<std::string> ids;
    std::vector<double> diffs;
    for (const auto& [id, d] : s.size_difference) {
        ids.push_back(id);
        diffs.push_back(d);
    }
    write_file(dir / "size_difference.svg",
               bar_chart("Size difference (attention - causal)", ids, {{"difference", diffs, kCausalColour}}, "items"));
}

}  // namespace attncause
