#include "vilmap/organize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vilmap {

// ---------------------------------------------------------------- Adjacency

void Adjacency::regrow(std::size_t new_stride, std::size_t new_cap_rows) {
    std::vector<std::uint64_t> fresh(new_stride * new_cap_rows, 0);
    for (std::size_t i = 0; i < n_; ++i)
        std::copy(bits_.begin() + i * stride_, bits_.begin() + i * stride_ + stride_,
                  fresh.begin() + i * new_stride);
    bits_ = std::move(fresh);
    stride_ = new_stride;
    cap_rows_ = new_cap_rows;
}

void Adjacency::reset(std::size_t n) {
    n_ = n;
    stride_ = (n + 63) / 64;
    if (stride_ == 0) stride_ = 1;
    cap_rows_ = n ? n : 1;
    bits_.assign(stride_ * cap_rows_, 0);
}

void Adjacency::add_node() {
    const std::size_t need_stride = (n_ + 1 + 63) / 64;
    if (need_stride > stride_ || n_ + 1 > cap_rows_)
        regrow(std::max(need_stride, stride_ * 2), std::max(n_ + 1, cap_rows_ * 2));
    ++n_;
}

bool Adjacency::test(std::size_t i, std::size_t j) const {
    return (bits_[i * stride_ + j / 64] >> (j % 64)) & 1u;
}

void Adjacency::set(std::size_t i, std::size_t j) {
    if (i == j) return;
    bits_[i * stride_ + j / 64] |= std::uint64_t(1) << (j % 64);
    bits_[j * stride_ + i / 64] |= std::uint64_t(1) << (i % 64);
}

void Adjacency::clear(std::size_t i, std::size_t j) {
    bits_[i * stride_ + j / 64] &= ~(std::uint64_t(1) << (j % 64));
    bits_[j * stride_ + i / 64] &= ~(std::uint64_t(1) << (i % 64));
}

void Adjacency::isolate(std::size_t i) {
    for_each_neighbor(i, [&](std::size_t j) {
        bits_[j * stride_ + i / 64] &= ~(std::uint64_t(1) << (i % 64));
    });
    std::fill(bits_.begin() + i * stride_, bits_.begin() + (i + 1) * stride_, 0);
}

void Adjacency::connect_to_all(std::size_t i) {
    for (std::size_t j = 0; j < n_; ++j)
        if (j != i) set(i, j);
}

void Adjacency::for_each_neighbor(std::size_t i,
                                  const std::function<void(std::size_t)>& f) const {
    const std::uint64_t* row = bits_.data() + i * stride_;
    for (std::size_t wi = 0; wi < stride_; ++wi) {
        std::uint64_t word = row[wi];
        while (word) {
            const int b = std::countr_zero(word);
            f(wi * 64 + b);
            word &= word - 1;
        }
    }
}

std::size_t Adjacency::degree(std::size_t i) const {
    const std::uint64_t* row = bits_.data() + i * stride_;
    std::size_t d = 0;
    for (std::size_t wi = 0; wi < stride_; ++wi) d += std::popcount(row[wi]);
    return d;
}

void Adjacency::remove_nodes(const std::vector<std::size_t>& sorted_idx) {
    if (sorted_idx.empty()) return;
    std::vector<std::size_t> remap(n_, SIZE_MAX);
    std::size_t keep = 0, cut = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (cut < sorted_idx.size() && sorted_idx[cut] == i) ++cut;
        else remap[i] = keep++;
    }
    Adjacency next;
    next.reset(keep);
    for (std::size_t i = 0; i < n_; ++i) {
        if (remap[i] == SIZE_MAX) continue;
        for_each_neighbor(i, [&](std::size_t j) {
            if (j > i && remap[j] != SIZE_MAX) next.set(remap[i], remap[j]);
        });
    }
    *this = std::move(next);
}

// ----------------------------------------------------------------- MapState

std::size_t MapState::index_of(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const Node& n, int v) { return n.id < v; });
    if (it == nodes.end() || it->id != id)
        throw std::runtime_error("unknown node id " + std::to_string(id));
    return static_cast<std::size_t>(it - nodes.begin());
}

static void check_length(const MapState& map, const Pattern& p) {
    const int len = static_cast<int>(p.size());
    if (len < map.params.d_min || len > map.params.d_max)
        throw std::invalid_argument("pattern length " + std::to_string(len) +
                                    " outside [" + std::to_string(map.params.d_min) +
                                    ", " + std::to_string(map.params.d_max) + "]");
}

static Node make_node(int id, const Pattern& p) {
    Node n;
    n.id = id;
    n.center = p.values;
    n.relevance.assign(p.size(), 1.0);
    n.distance_avg.assign(p.size(), 0.0);
    n.wins = 1;
    return n;
}

MapState init_map(const Pattern& first, const Params& params) {
    MapState map;
    map.params = params;
    check_length(map, first);
    map.nodes.push_back(make_node(0, first));
    map.adj.reset(1);
    map.next_id = 1;
    map.patterns_seen = 1;
    return map;
}

void grow_node(Node& node, const Pattern& pattern) {
    const std::size_t old_len = node.size(), new_len = pattern.size();
    if (old_len >= new_len)
        throw std::invalid_argument("grow_node: node not shorter than pattern");
    node.center.resize(new_len);
    node.relevance.resize(new_len, 0.5);
    node.distance_avg.resize(new_len, 0.0);
    std::copy(pattern.values.begin() + old_len, pattern.values.end(),
              node.center.begin() + old_len);
}

void update_relevances(Node& node, double eps_ds) {
    const Vec& d = node.distance_avg;
    const auto [mn_it, mx_it] = std::minmax_element(d.begin(), d.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) {
        std::fill(node.relevance.begin(), node.relevance.end(), 1.0);
        return;
    }
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    const double denom = eps_ds * (mx - mn);
    for (std::size_t i = 0; i < d.size(); ++i)
        node.relevance[i] = 1.0 / (1.0 + std::exp((d[i] - mean) / denom));
}

// single-node adaptation over [off, off+len): distance average first, then the
// masked relevance write, then the center pull.  relevance statistics come from
// the full distance vector, but only the overlapped entries are rewritten
static void adapt_node(Node& node, const Pattern& x, int off, int len, double e,
                       double beta, double eps_ds) {
    for (int i = 0; i < len; ++i) {
        const double diff = std::fabs(x.values[i] - node.center[off + i]);
        node.distance_avg[off + i] =
            (1.0 - e * beta) * node.distance_avg[off + i] + e * beta * diff;
    }
    const Vec& d = node.distance_avg;
    const auto [mn_it, mx_it] = std::minmax_element(d.begin(), d.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) {
        std::fill(node.relevance.begin() + off, node.relevance.begin() + off + len, 1.0);
    } else {
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        const double denom = eps_ds * (mx - mn);
        for (int i = 0; i < len; ++i)
            node.relevance[off + i] = 1.0 / (1.0 + std::exp((d[off + i] - mean) / denom));
    }
    for (int i = 0; i < len; ++i)
        node.center[off + i] += e * (x.values[i] - node.center[off + i]);
}

void update_winner_and_neighbors(MapState& map, int winner_id, const Pattern& pattern,
                                 const MatchResult& match) {
    const std::size_t wi = map.index_of(winner_id);
    Node& w = map.nodes[wi];
    adapt_node(w, pattern, match.offset, match.overlap_len, map.params.e_b,
               map.params.beta, map.params.eps_ds);
    map.adj.for_each_neighbor(wi, [&](std::size_t ni) {
        Node& nb = map.nodes[ni];
        const MatchResult m = best_alignment(nb, pattern, map.params.epsilon);
        adapt_node(nb, pattern, m.offset, m.overlap_len, map.params.e_n,
                   map.params.beta, map.params.eps_ds);
    });
}

void recompute_connections(MapState& map, int winner_id) {
    const std::size_t wi = map.index_of(winner_id);
    const Vec& ww = map.nodes[wi].relevance;
    map.adj.isolate(wi);
    for (std::size_t j = 0; j < map.nodes.size(); ++j) {
        if (j == wi) continue;
        const Vec& wj = map.nodes[j].relevance;
        const std::size_t m = std::min(ww.size(), wj.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += std::fabs(ww[i] - wj[i]);
        const double sim = 1.0 - acc / static_cast<double>(m);
        if (sim > map.params.minwd) map.adj.set(wi, j);
    }
}

// competition used by training; identical ordering to core::winner
static std::pair<std::size_t, MatchResult> winner_index(const MapState& map,
                                                        const Pattern& x) {
    std::size_t best_i = 0;
    MatchResult best = best_alignment(map.nodes[0], x, map.params.epsilon);
    for (std::size_t i = 1; i < map.nodes.size(); ++i) {
        MatchResult m = best_alignment(map.nodes[i], x, map.params.epsilon);
        if (m.activation > best.activation) {
            best = m;
            best_i = i;
        }
    }
    return {best_i, best};
}

void train_step(MapState& map, const Pattern& pattern) {
    check_length(map, pattern);
    auto [wi, match] = winner_index(map, pattern);
    if (match.activation < map.params.a_t) {
        if (static_cast<int>(map.nodes.size()) < map.params.n_max) {
            map.nodes.push_back(make_node(map.next_id++, pattern));
            map.adj.add_node();
            map.adj.connect_to_all(map.adj.size() - 1);
        }
        // else: map full, pattern dropped
    } else {
        Node& w = map.nodes[wi];
        if (w.size() < pattern.size()) {
            grow_node(w, pattern);
            match = {match.activation, 0, Mode::regular, static_cast<int>(pattern.size())};
        }
        ++w.wins;
        update_winner_and_neighbors(map, w.id, pattern, match);
        recompute_connections(map, w.id);
    }
    ++map.patterns_seen;
}

void train_stream(MapState& map, const std::vector<Pattern>& patterns,
                  const StreamOptions& opts) {
    for (const Pattern& p : patterns) {
        if (opts.skip_on_error) {
            const int len = static_cast<int>(p.size());
            if (len < map.params.d_min || len > map.params.d_max) continue;
        }
        train_step(map, p);
        if (opts.prune_interval > 0 && map.patterns_seen % opts.prune_interval == 0)
            prune_low_win_nodes(map, opts.prune_fraction);
    }
}

int prune_low_win_nodes(MapState& map, double fraction) {
    if (map.patterns_seen <= 0 || map.nodes.size() <= 1) return 0;
    std::vector<std::size_t> doomed;
    for (std::size_t i = 0; i < map.nodes.size(); ++i) {
        const double ratio = static_cast<double>(map.nodes[i].wins) /
                             static_cast<double>(map.patterns_seen);
        if (ratio < fraction) doomed.push_back(i);
    }
    if (doomed.size() == map.nodes.size()) doomed.pop_back();  // keep one node
    if (doomed.empty()) return 0;
    map.adj.remove_nodes(doomed);
    std::vector<Node> kept;
    kept.reserve(map.nodes.size() - doomed.size());
    std::size_t cut = 0;
    for (std::size_t i = 0; i < map.nodes.size(); ++i) {
        if (cut < doomed.size() && doomed[cut] == i) ++cut;
        else kept.push_back(std::move(map.nodes[i]));
    }
    map.nodes = std::move(kept);
    return static_cast<int>(doomed.size());
}

// ------------------------------------------------------------- serialization

static std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

static void write_vec(std::ostringstream& out, const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << fmt_double(v[i]);
    }
    out << '\n';
}

std::string serialize_map(const MapState& map) {
    std::ostringstream out;
    out << "VILMAP 1\n";
    const Params& p = map.params;
    out << "a_t=" << fmt_double(p.a_t) << '\n'
        << "e_b=" << fmt_double(p.e_b) << '\n'
        << "e_n=" << fmt_double(p.e_n) << '\n'
        << "beta=" << fmt_double(p.beta) << '\n'
        << "eps_ds=" << fmt_double(p.eps_ds) << '\n'
        << "n_max=" << p.n_max << '\n'
        << "d_min=" << p.d_min << '\n'
        << "d_max=" << p.d_max << '\n'
        << "minwd=" << fmt_double(p.minwd) << '\n'
        << "epsilon=" << fmt_double(p.epsilon) << '\n';
    for (const Node& n : map.nodes) {
        out << "node " << n.id << ' ' << n.size() << ' ' << n.wins << '\n';
        write_vec(out, n.center);
        write_vec(out, n.relevance);
        write_vec(out, n.distance_avg);
    }
    out << "edges\n";
    for (std::size_t i = 0; i < map.nodes.size(); ++i)
        map.adj.for_each_neighbor(i, [&](std::size_t j) {
            if (j > i) out << map.nodes[i].id << ' ' << map.nodes[j].id << '\n';
        });
    return out.str();
}

static Vec parse_vec(const std::string& line, std::size_t expect, int lineno) {
    Vec v;
    v.reserve(expect);
    const char* s = line.c_str();
    char* end = nullptr;
    while (*s) {
        const double x = std::strtod(s, &end);
        if (end == s) break;
        v.push_back(x);
        s = end;
    }
    if (v.size() != expect)
        throw std::runtime_error("model line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(expect) + " values, got " +
                                 std::to_string(v.size()));
    return v;
}

MapState deserialize_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line() || line != "VILMAP 1")
        throw std::runtime_error("model: missing VILMAP 1 header");

    MapState map;
    Params& p = map.params;
    bool in_edges = false;
    std::vector<std::pair<int, int>> edges;
    while (next_line()) {
        if (line == "edges") {
            in_edges = true;
            continue;
        }
        if (in_edges) {
            std::istringstream row(line);
            int a, b;
            if (!(row >> a >> b))
                throw std::runtime_error("model line " + std::to_string(lineno) +
                                         ": bad edge");
            edges.emplace_back(a, b);
            continue;
        }
        if (line.rfind("node ", 0) == 0) {
            std::istringstream head(line.substr(5));
            int id;
            std::size_t len;
            std::int64_t wins;
            if (!(head >> id >> len >> wins))
                throw std::runtime_error("model line " + std::to_string(lineno) +
                                         ": bad node header");
            Node n;
            n.id = id;
            n.wins = wins;
            if (!next_line()) throw std::runtime_error("model: truncated node");
            n.center = parse_vec(line, len, lineno);
            if (!next_line()) throw std::runtime_error("model: truncated node");
            n.relevance = parse_vec(line, len, lineno);
            if (!next_line()) throw std::runtime_error("model: truncated node");
            n.distance_avg = parse_vec(line, len, lineno);
            map.nodes.push_back(std::move(n));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("model line " + std::to_string(lineno) +
                                     ": expected name=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "a_t") p.a_t = std::strtod(val.c_str(), nullptr);
        else if (key == "e_b") p.e_b = std::strtod(val.c_str(), nullptr);
        else if (key == "e_n") p.e_n = std::strtod(val.c_str(), nullptr);
        else if (key == "beta") p.beta = std::strtod(val.c_str(), nullptr);
        else if (key == "eps_ds") p.eps_ds = std::strtod(val.c_str(), nullptr);
        else if (key == "n_max") p.n_max = std::atoi(val.c_str());
        else if (key == "d_min") p.d_min = std::atoi(val.c_str());
        else if (key == "d_max") p.d_max = std::atoi(val.c_str());
        else if (key == "minwd") p.minwd = std::strtod(val.c_str(), nullptr);
        else if (key == "epsilon") p.epsilon = std::strtod(val.c_str(), nullptr);
        else throw std::runtime_error("model line " + std::to_string(lineno) +
                                      ": unknown field " + key);
    }
    if (!std::is_sorted(map.nodes.begin(), map.nodes.end(),
                        [](const Node& a, const Node& b) { return a.id < b.id; }))
        std::sort(map.nodes.begin(), map.nodes.end(),
                  [](const Node& a, const Node& b) { return a.id < b.id; });
    map.adj.reset(map.nodes.size());
    for (auto [a, b] : edges) map.adj.set(map.index_of(a), map.index_of(b));
    map.next_id = map.nodes.empty() ? 0 : map.nodes.back().id + 1;
    // the format carries no pattern counter; the win total is the closest proxy
    // (exact whenever no pattern was ever dropped by a full map)
    map.patterns_seen = 0;
    for (const Node& n : map.nodes) map.patterns_seen += n.wins;
    return map;
}

void save_map(const MapState& map, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << serialize_map(map);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

MapState load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_map(buf.str());
}

}  // namespace vilmap
