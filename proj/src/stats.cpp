#include "nestopt/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "nestopt/errors.hpp"
#include "nestopt/search.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

const std::array<Kind, 6> kKindOrder = {Kind::interchange, Kind::reversal,
                                        Kind::skewing,     Kind::tiling,
                                        Kind::unrolling,   Kind::parallelization};

namespace {

int kind_index(Kind k) {
    for (int i = 0; i < 6; i++)
        if (kKindOrder[i] == k) return i;
    return 0;
}

// Canonical "best point" choice. Permutation of the input file must never
// change which point wins, so ties fall back to schedule length and then to
// the serialized schedule text.
bool better_point(const DataPoint &a, const DataPoint &b) {
    if (a.speedup != b.speedup) return a.speedup > b.speedup;
    if (a.schedule.size() != b.schedule.size()) return a.schedule.size() < b.schedule.size();
    return schedule_to_json_array(a.schedule) < schedule_to_json_array(b.schedule);
}

// First parallelization step of a schedule, if any.
const ParallelizationParams *find_parallel(const std::vector<Transformation> &steps) {
    for (const Transformation &t : steps)
        if (t.kind == Kind::parallelization) return &std::get<ParallelizationParams>(t.params);
    return nullptr;
}

bool has_kind(const std::vector<Transformation> &steps, Kind k) {
    for (const Transformation &t : steps)
        if (t.kind == k) return true;
    return false;
}

// Whether a parallelization step appears somewhere after a skewing step.
bool skew_then_parallel(const std::vector<Transformation> &steps) {
    bool seen_skew = false;
    for (const Transformation &t : steps) {
        if (t.kind == Kind::skewing) seen_skew = true;
        if (t.kind == Kind::parallelization && seen_skew) return true;
    }
    return false;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Every analysis is a fold over an unordered set of lines, so group means
// must not depend on the order the file happened to list them in. Sorting a
// group before summing pins the addition sequence, and with it the rounding.
double mean_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

std::vector<ParallelDepthBin> analyze_parallel_depth(const std::vector<DataPoint> &points) {
    // Per program: the best point among those containing parallelization.
    std::map<std::string, const DataPoint *> best;
    for (const DataPoint &p : points) {
        const ParallelizationParams *pp = find_parallel(p.schedule);
        if (!pp || pp->depth <= 0) continue;
        auto it = best.find(p.program_id);
        if (it == best.end() || better_point(p, *it->second)) best[p.program_id] = &p;
    }
    std::vector<double> groups[10];
    for (const auto &[id, p] : best) {
        const ParallelizationParams *pp = find_parallel(p->schedule);
        double rel = relative_level(pp->loop, pp->depth);
        int bin = std::min(9, static_cast<int>(std::floor(rel * 10.0)));
        groups[bin].push_back(p->speedup);
    }
    std::vector<ParallelDepthBin> out;
    for (int b = 0; b < 10; b++)
        if (!groups[b].empty())
            out.push_back({(b + 0.5) / 10.0, mean_of(groups[b]), groups[b].size()});
    return out;
}

SkewReport analyze_skewing(const std::vector<DataPoint> &points) {
    SkewReport r;
    std::vector<double> swp, swo, pws, pwo;
    for (const DataPoint &p : points) {
        bool stp = skew_then_parallel(p.schedule);
        if (has_kind(p.schedule, Kind::skewing))
            (stp ? swp : swo).push_back(p.speedup);
        if (has_kind(p.schedule, Kind::parallelization))
            (stp ? pws : pwo).push_back(p.speedup);
    }
    r.n_skew_with_parallel = swp.size();
    r.n_skew_without_parallel = swo.size();
    r.n_parallel_with_prior_skew = pws.size();
    r.n_parallel_without_prior_skew = pwo.size();
    if (!swp.empty()) r.mean_skew_with_parallel = mean_of(std::move(swp));
    if (!swo.empty()) r.mean_skew_without_parallel = mean_of(std::move(swo));
    if (r.mean_skew_with_parallel && r.mean_skew_without_parallel)
        r.ratio = *r.mean_skew_with_parallel / *r.mean_skew_without_parallel;
    if (!pws.empty()) r.mean_parallel_with_prior_skew = mean_of(std::move(pws));
    if (!pwo.empty()) r.mean_parallel_without_prior_skew = mean_of(std::move(pwo));
    return r;
}

std::vector<UnrollRow> analyze_unrolling(const std::vector<DataPoint> &points) {
    std::map<int64_t, std::vector<double>> acc;
    for (const DataPoint &p : points) {
        std::set<int64_t> factors;
        for (const Transformation &t : p.schedule)
            if (t.kind == Kind::unrolling)
                factors.insert(std::get<UnrollingParams>(t.params).factor);
        for (int64_t f : factors) acc[f].push_back(p.speedup);
    }
    std::vector<UnrollRow> out;
    for (auto &[f, values] : acc) {
        size_t n = values.size();
        out.push_back({f, mean_of(std::move(values)), n});
    }
    return out;
}

LengthReport analyze_schedule_length(const std::vector<DataPoint> &points) {
    LengthReport r;
    std::map<std::string, const DataPoint *> best;
    for (const DataPoint &p : points) {
        auto it = best.find(p.program_id);
        if (it == best.end() || better_point(p, *it->second)) best[p.program_id] = &p;
    }
    std::map<size_t, size_t> hist;
    for (const auto &[id, p] : best) hist[p->schedule.size()]++;
    for (const auto &[len, n] : hist) r.best_length_histogram.push_back({len, n});

    std::map<size_t, std::vector<double>> groups;
    for (const DataPoint &p : points) groups[p.schedule.size()].push_back(p.speedup);
    for (auto &[len, values] : groups) {
        LengthRow row;
        row.length = len;
        row.max = *std::max_element(values.begin(), values.end());
        row.n = values.size();
        row.mean = mean_of(std::move(values));
        r.per_length.push_back(row);
    }
    return r;
}

TransitionMatrix transition_matrix(const std::vector<DataPoint> &points) {
    TransitionMatrix tm;
    std::vector<double> cells[6][6];
    for (const DataPoint &p : points) {
        if (p.schedule.size() < 2) continue;
        std::set<std::pair<int, int>> pairs;
        for (size_t i = 0; i + 1 < p.schedule.size(); i++)
            pairs.insert({kind_index(p.schedule[i].kind), kind_index(p.schedule[i + 1].kind)});
        for (const auto &[a, b] : pairs) {
            cells[a][b].push_back(p.speedup);
            tm.counts[a][b]++;
        }
    }
    for (int i = 0; i < 6; i++)
        for (int j = 0; j < 6; j++)
            if (tm.counts[i][j] > 0) tm.raw[i][j] = mean_of(std::move(cells[i][j]));
    for (int i = 0; i < 6; i++) {
        double row_sum = 0;
        for (int j = 0; j < 6; j++) row_sum += tm.raw[i][j];
        if (row_sum > 0)
            for (int j = 0; j < 6; j++) tm.prob[i][j] = tm.raw[i][j] / row_sum;
    }
    return tm;
}

std::vector<OrderedKind> derive_order(const TransitionMatrix &tm) {
    int par = kind_index(Kind::parallelization);
    auto repeatable = [&](int k) {
        if (tm.prob[k][k] <= 0.0) return false;
        for (int j = 0; j < 6; j++)
            if (j != k && tm.prob[k][j] > tm.prob[k][k]) return false;
        return true;
    };

    bool all_zero = true;
    for (int i = 0; i < 6 && all_zero; i++)
        for (int j = 0; j < 6; j++)
            if (tm.prob[i][j] != 0.0) {
                all_zero = false;
                break;
            }
    std::vector<OrderedKind> out;
    if (all_zero) {
        for (Kind k : kKindOrder) out.push_back({k, false});
        return out;
    }

    // Start at the non-parallelization kind with the strongest single
    // off-diagonal transition anywhere in its row.
    int current = -1;
    double best_max = -1.0;
    for (int i = 0; i < 6; i++) {
        if (i == par) continue;
        double row_max = 0.0;
        for (int j = 0; j < 6; j++)
            if (j != i) row_max = std::max(row_max, tm.prob[i][j]);
        if (row_max > best_max) {
            best_max = row_max;
            current = i;
        }
    }

    std::array<bool, 6> visited = {};
    out.push_back({kKindOrder[current], repeatable(current)});
    visited[current] = true;
    for (int step = 0; step < 4; step++) {
        int next = -1;
        double best_p = -1.0;
        for (int j = 0; j < 6; j++) {
            if (j == par || visited[j]) continue;
            if (tm.prob[current][j] > best_p) {
                best_p = tm.prob[current][j];
                next = j;
            }
        }
        out.push_back({kKindOrder[next], repeatable(next)});
        visited[next] = true;
        current = next;
    }
    out.push_back({Kind::parallelization, repeatable(par)});
    return out;
}

StatsReport analyze_all(const std::vector<DataPoint> &points) {
    StatsReport r;
    r.parallel_depth = analyze_parallel_depth(points);
    r.skew = analyze_skewing(points);
    r.unroll = analyze_unrolling(points);
    r.length = analyze_schedule_length(points);
    r.transitions = transition_matrix(points);
    r.derived_order = derive_order(r.transitions);
    return r;
}

std::string report_to_json(const StatsReport &r) {
    json j;
    json pd = json::array();
    for (const ParallelDepthBin &b : r.parallel_depth)
        pd.push_back({{"bin", b.bin_center}, {"mean", b.mean}, {"n", b.n}});
    j["parallel_depth"] = std::move(pd);

    json sk = json::object();
    if (r.skew.mean_skew_with_parallel)
        sk["mean_skew_with_parallel"] = *r.skew.mean_skew_with_parallel;
    if (r.skew.mean_skew_without_parallel)
        sk["mean_skew_without_parallel"] = *r.skew.mean_skew_without_parallel;
    if (r.skew.ratio) sk["ratio"] = *r.skew.ratio;
    if (r.skew.mean_parallel_with_prior_skew)
        sk["mean_parallel_with_prior_skew"] = *r.skew.mean_parallel_with_prior_skew;
    if (r.skew.mean_parallel_without_prior_skew)
        sk["mean_parallel_without_prior_skew"] = *r.skew.mean_parallel_without_prior_skew;
    sk["n_skew_with_parallel"] = r.skew.n_skew_with_parallel;
    sk["n_skew_without_parallel"] = r.skew.n_skew_without_parallel;
    sk["n_parallel_with_prior_skew"] = r.skew.n_parallel_with_prior_skew;
    sk["n_parallel_without_prior_skew"] = r.skew.n_parallel_without_prior_skew;
    j["skew"] = std::move(sk);

    json un = json::array();
    for (const UnrollRow &u : r.unroll)
        un.push_back({{"factor", u.factor}, {"mean", u.mean}, {"n", u.n}});
    j["unroll"] = std::move(un);

    json hist = json::array();
    for (const auto &[len, n] : r.length.best_length_histogram)
        hist.push_back({{"length", len}, {"count", n}});
    json per = json::array();
    for (const LengthRow &row : r.length.per_length)
        per.push_back({{"length", row.length}, {"mean", row.mean}, {"max", row.max}, {"n", row.n}});
    j["length"] = {{"best_length_histogram", std::move(hist)}, {"per_length", std::move(per)}};

    json kinds = json::array();
    for (Kind k : r.transitions.kinds) kinds.push_back(kind_name(k));
    auto mat = [](const double m[6][6]) {
        json rows = json::array();
        for (int i = 0; i < 6; i++) {
            json row = json::array();
            for (int j2 = 0; j2 < 6; j2++) row.push_back(m[i][j2]);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    json counts = json::array();
    for (int i = 0; i < 6; i++) {
        json row = json::array();
        for (int j2 = 0; j2 < 6; j2++) row.push_back(r.transitions.counts[i][j2]);
        counts.push_back(std::move(row));
    }
    j["transitions"] = {{"kinds", std::move(kinds)},
                        {"raw", mat(r.transitions.raw)},
                        {"prob", mat(r.transitions.prob)},
                        {"counts", std::move(counts)}};

    json order = json::array();
    for (const OrderedKind &ok : r.derived_order)
        order.push_back({{"kind", kind_name(ok.kind)}, {"repeatable", ok.repeatable}});
    j["derived_order"] = std::move(order);
    return j.dump(2);
}

namespace {

void write_file(const std::string &path, const std::string &content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write: " + tmp);
        f << content;
        f.flush();
        if (!f) {
            std::remove(tmp.c_str());
            throw IoError("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename into place: " + path);
    }
}

}  // namespace

void emit_csv(const StatsReport &r, const std::string &dir) { emit_csv(r, dir, "all"); }

void emit_csv(const StatsReport &r, const std::string &dir, const std::string &only) {
    bool all = only == "all";
    if (all || only == "parallel-depth") {
        std::string fig1 = "bin,mean,n\n";
        for (const ParallelDepthBin &b : r.parallel_depth)
            fig1 += format_double(b.bin_center) + "," + format_double(b.mean) + "," +
                    std::to_string(b.n) + "\n";
        write_file(dir + "/fig1.csv", fig1);
    }
    if (all || only == "unrolling") {
        std::string fig3 = "factor,mean,n\n";
        for (const UnrollRow &u : r.unroll)
            fig3 += std::to_string(u.factor) + "," + format_double(u.mean) + "," +
                    std::to_string(u.n) + "\n";
        write_file(dir + "/fig3.csv", fig3);
    }
    if (all || only == "length") {
        std::string fig5 = "length,count\n";
        for (const auto &[len, n] : r.length.best_length_histogram)
            fig5 += std::to_string(len) + "," + std::to_string(n) + "\n";
        write_file(dir + "/fig5.csv", fig5);

        std::string fig6 = "length,mean,max\n";
        for (const LengthRow &row : r.length.per_length)
            fig6 += std::to_string(row.length) + "," + format_double(row.mean) + "," +
                    format_double(row.max) + "\n";
        write_file(dir + "/fig6.csv", fig6);
    }
    if (all || only == "transitions") {
        std::string fig7 = "kind";
        for (Kind k : r.transitions.kinds) fig7 += std::string(",") + kind_name(k);
        fig7 += "\n";
        for (int i = 0; i < 6; i++) {
            fig7 += kind_name(r.transitions.kinds[i]);
            for (int j = 0; j < 6; j++) fig7 += "," + format_double(r.transitions.prob[i][j]);
            fig7 += "\n";
        }
        write_file(dir + "/fig7.csv", fig7);
    }
    if (!(all || only == "skewing")) return;

    std::string skew = "metric,value\n";
    if (r.skew.mean_skew_with_parallel)
        skew += "mean_skew_with_parallel," + format_double(*r.skew.mean_skew_with_parallel) + "\n";
    if (r.skew.mean_skew_without_parallel)
        skew += "mean_skew_without_parallel," + format_double(*r.skew.mean_skew_without_parallel) +
                "\n";
    if (r.skew.ratio) skew += "ratio," + format_double(*r.skew.ratio) + "\n";
    if (r.skew.mean_parallel_with_prior_skew)
        skew += "mean_parallel_with_prior_skew," +
                format_double(*r.skew.mean_parallel_with_prior_skew) + "\n";
    if (r.skew.mean_parallel_without_prior_skew)
        skew += "mean_parallel_without_prior_skew," +
                format_double(*r.skew.mean_parallel_without_prior_skew) + "\n";
    skew += "n_skew_with_parallel," + std::to_string(r.skew.n_skew_with_parallel) + "\n";
    skew += "n_skew_without_parallel," + std::to_string(r.skew.n_skew_without_parallel) + "\n";
    skew += "n_parallel_with_prior_skew," + std::to_string(r.skew.n_parallel_with_prior_skew) +
            "\n";
    skew += "n_parallel_without_prior_skew," +
            std::to_string(r.skew.n_parallel_without_prior_skew) + "\n";
    write_file(dir + "/skew.csv", skew);
}

}  // namespace nestopt
