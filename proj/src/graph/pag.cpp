#include "attncause/graph/pag.hpp"

#include <algorithm>
#include <sstream>

namespace attncause {

namespace {

std::string node_name(NodeIndex x) { return std::to_string(x); }

EdgeMark parse_mark(char c, bool left_end) {
    switch (c) {
        case 'o': return EdgeMark::Circle;
        case '-': return EdgeMark::Tail;
        case '<':
            if (left_end) return EdgeMark::Arrow;
            break;
        case '>':
            if (!left_end) return EdgeMark::Arrow;
            break;
        default: break;
    }
    throw FormatError(std::string("invalid edge mark '") + c + "'");
}

const char* dot_arrow(EdgeMark m) {
    switch (m) {
        case EdgeMark::Arrow: return "normal";
        case EdgeMark::Tail: return "none";
        case EdgeMark::Circle: return "odot";
    }
    return "none";
}

}  // namespace

char mark_symbol(EdgeMark m, bool left_end) {
    switch (m) {
        case EdgeMark::Arrow: return left_end ? '<' : '>';
        case EdgeMark::Tail: return '-';
        case EdgeMark::Circle: return 'o';
    }
    return '?';
}

Pag::Pag(std::vector<ItemId> labels) : labels_(std::move(labels)), adjacency_(labels_.size()) {
    for (NodeIndex i = 0; i < size(); ++i) {
        if (!by_label_.emplace(labels_[i], i).second) {
            throw Error("duplicate node label " + std::to_string(labels_[i]));
        }
    }
}

Pag Pag::complete(std::vector<ItemId> labels) {
    Pag g(std::move(labels));
    for (NodeIndex x = 0; x < g.size(); ++x)
        for (NodeIndex y = x + 1; y < g.size(); ++y) g.add_edge(x, y);
    return g;
}

void Pag::require(NodeIndex x) const {
    if (!contains(x)) throw UnknownNodeError("unknown node index " + node_name(x));
}

ItemId Pag::label(NodeIndex x) const {
    require(x);
    return labels_[x];
}

NodeIndex Pag::index_of(ItemId label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) throw UnknownNodeError("unknown node label " + std::to_string(label));
    return it->second;
}

bool Pag::adjacent(NodeIndex x, NodeIndex y) const {
    require(x);
    require(y);
    return x != y && edges_.contains(key(x, y));
}

EdgeMark Pag::mark_at(NodeIndex x, NodeIndex y) const {
    require(x);
    require(y);
    auto it = edges_.find(key(x, y));
    if (x == y || it == edges_.end()) {
        throw UnknownNodeError("nodes " + node_name(x) + " and " + node_name(y) + " are not adjacent");
    }
    return y < x ? it->second.at_low : it->second.at_high;
}

const std::set<NodeIndex>& Pag::neighbors(NodeIndex x) const {
    require(x);
    return adjacency_[x];
}

void Pag::add_edge(NodeIndex x, NodeIndex y, EdgeMark at_x, EdgeMark at_y) {
    require(x);
    require(y);
    if (x == y) throw Error("self-edge on node " + node_name(x));
    auto k = key(x, y);
    EndMarks marks = x < y ? EndMarks{at_x, at_y} : EndMarks{at_y, at_x};
    if (!edges_.emplace(k, marks).second) {
        throw Error("edge " + node_name(x) + "-" + node_name(y) + " already present");
    }
    adjacency_[x].insert(y);
    adjacency_[y].insert(x);
}

void Pag::remove_edge(NodeIndex x, NodeIndex y) {
    require(x);
    require(y);
    if (edges_.erase(key(x, y)) == 0) {
        throw UnknownNodeError("no edge " + node_name(x) + "-" + node_name(y));
    }
    adjacency_[x].erase(y);
    adjacency_[y].erase(x);
}

void Pag::set_mark(NodeIndex x, NodeIndex y, EdgeMark m) {
    require(x);
    require(y);
    auto it = edges_.find(key(x, y));
    if (x == y || it == edges_.end()) {
        throw UnknownNodeError("nodes " + node_name(x) + " and " + node_name(y) + " are not adjacent");
    }
    EdgeMark& slot = y < x ? it->second.at_low : it->second.at_high;
    if (slot == m || m == EdgeMark::Circle) return;
    if (slot != EdgeMark::Circle) {
        throw MarkConflictError("conflicting orientation at " + node_name(y) + " on edge " +
                                node_name(x) + "-" + node_name(y));
    }
    const EdgeMark before = slot;
    slot = m;
    if (observer_) observer_(x, y, before, m);
}

void Pag::reset_marks() {
    for (auto& [k, marks] : edges_) marks = EndMarks{};
}

bool Pag::is_unshielded_collider(NodeIndex u, NodeIndex v, NodeIndex w) const {
    require(u);
    require(v);
    require(w);
    if (u == v || v == w || u == w) return false;
    return adjacent(u, v) && adjacent(v, w) && !adjacent(u, w) && mark_at(u, v) == EdgeMark::Arrow &&
           mark_at(w, v) == EdgeMark::Arrow;
}

std::string to_text(const Pag& g) {
    std::ostringstream out;
    out << "nodes";
    for (ItemId l : g.labels()) out << ' ' << l;
    out << '\n';
    for (const auto& [k, marks] : g.edges()) {
        out << g.label(k.first) << ' ' << mark_symbol(marks.at_low, true) << '-'
            << mark_symbol(marks.at_high, false) << ' ' << g.label(k.second) << '\n';
    }
    return out.str();
}

Pag parse_pag(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::optional<Pag> g;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream ls(line);
        if (!g) {
            std::string head;
            ls >> head;
            if (head != "nodes") throw FormatError("line 1: expected 'nodes' header");
            std::vector<ItemId> labels;
            ItemId l = 0;
            while (ls >> l) labels.push_back(l);
            if (!ls.eof()) throw FormatError("line 1: malformed node label");
            g.emplace(std::move(labels));
            continue;
        }
        ItemId a = 0;
        ItemId b = 0;
        std::string marks;
        if (!(ls >> a >> marks >> b) || marks.size() != 3 || marks[1] != '-') {
            throw FormatError("line " + std::to_string(line_no) + ": expected 'X m-m Y'");
        }
        try {
            const NodeIndex x = g->index_of(a);
            const NodeIndex y = g->index_of(b);
            g->add_edge(x, y, parse_mark(marks[0], true), parse_mark(marks[2], false));
        } catch (const Error& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!g) throw FormatError("empty PAG text");
    return std::move(*g);
}

std::string to_dot(const Pag& g) {
    std::ostringstream out;
    out << "digraph pag {\n";
    for (ItemId l : g.labels()) out << "  \"" << l << "\";\n";
    for (const auto& [k, marks] : g.edges()) {
        out << "  \"" << g.label(k.first) << "\" -> \"" << g.label(k.second) << "\" [dir=both, arrowtail="
            << dot_arrow(marks.at_low) << ", arrowhead=" << dot_arrow(marks.at_high) << ", label=\""
            << mark_symbol(marks.at_low, true) << '-' << mark_symbol(marks.at_high, false) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

void SepsetTable::record(NodeIndex x, NodeIndex y, std::vector<NodeIndex> separator) {
    if (std::find(separator.begin(), separator.end(), x) != separator.end() ||
        std::find(separator.begin(), separator.end(), y) != separator.end()) {
        throw Error("separating set contains an endpoint");
    }
    std::sort(separator.begin(), separator.end());
    sets_[std::minmax(x, y)] = std::move(separator);
}

void SepsetTable::erase(NodeIndex x, NodeIndex y) { sets_.erase(std::minmax(x, y)); }

bool SepsetTable::has(NodeIndex x, NodeIndex y) const { return sets_.contains(std::minmax(x, y)); }

const std::vector<NodeIndex>& SepsetTable::get(NodeIndex x, NodeIndex y) const {
    auto it = sets_.find(std::minmax(x, y));
    if (it == sets_.end()) {
        throw UnknownNodeError("no separating set for " + node_name(x) + "-" + node_name(y));
    }
    return it->second;
}

bool SepsetTable::separates_with(NodeIndex x, NodeIndex y, NodeIndex v) const {
    const auto& s = get(x, y);
    return std::binary_search(s.begin(), s.end(), v);
}

}  // namespace attncause
