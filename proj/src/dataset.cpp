#include "nestopt/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nestopt/errors.hpp"
#include "step_json.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

std::string datapoint_to_json_line(const DataPoint &p) {
    json j;
    j["program_id"] = p.program_id;
    json steps = json::array();
    for (const Transformation &t : p.schedule) steps.push_back(detail::step_to_json_obj(t));
    j["schedule"] = std::move(steps);
    j["speedup"] = p.speedup;
    j["legal"] = p.legal;
    return j.dump();
}

DataPoint datapoint_from_json_line(const std::string &line, size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception &e) {
        throw SchemaError(line_no, std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line_no, "datapoint must be a JSON object");
    DataPoint p;
    bool saw_id = false, saw_schedule = false, saw_speedup = false;
    try {
        for (const auto &item : j.items()) {
            const std::string &k = item.key();
            const json &v = item.value();
            if (k == "program_id") {
                p.program_id = v.get<std::string>();
                saw_id = true;
            } else if (k == "schedule") {
                if (!v.is_array()) throw SchemaError(line_no, "schedule must be an array");
                for (const auto &s : v) p.schedule.push_back(detail::step_from_json_obj(s));
                saw_schedule = true;
            } else if (k == "speedup") {
                p.speedup = v.get<double>();
                saw_speedup = true;
            } else if (k == "legal") {
                p.legal = v.get<bool>();
            } else {
                throw SchemaError(line_no, "unknown datapoint field: " + k);
            }
        }
    } catch (const SchemaError &) {
        throw;
    } catch (const std::exception &e) {
        throw SchemaError(line_no, e.what());
    }
    if (!saw_id || !saw_schedule || !saw_speedup)
        throw SchemaError(line_no, "datapoint missing program_id, schedule or speedup");
    if (!(p.speedup > 0.0)) throw SchemaError(line_no, "speedup must be positive");
    return p;
}

void write_datapoints(const std::vector<DataPoint> &points, const std::string &path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write: " + tmp);
        for (const DataPoint &p : points) f << datapoint_to_json_line(p) << '\n';
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

std::vector<DataPoint> read_datapoints(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<DataPoint> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(f, line)) {
        line_no++;
        out.push_back(datapoint_from_json_line(line, line_no));
    }
    return out;
}

std::vector<DataPoint> dedupe(const std::vector<DataPoint> &points) {
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<DataPoint> out;
    out.reserve(points.size());
    for (const DataPoint &p : points)
        if (seen.insert({p.program_id, schedule_to_json_array(p.schedule)}).second)
            out.push_back(p);
    return out;
}

ExplorationSummary run_exploration(const std::vector<Program> &corpus, const SearchConfig &sc,
                                   const RuleSet &rules, const MachineConfig &mc,
                                   const std::string &out_path) {
    if (corpus.empty()) throw ConfigError("exploration needs a non-empty corpus");
    ExplorationSummary sum;
    sum.programs = corpus.size();
    std::vector<DataPoint> all;
    for (const Program &p : corpus) {
        std::vector<ScoredState> visited;
        if (sc.mode == SearchMode::random_walk) {
            WalkResult w = random_walks(p, sc, rules, mc);
            sum.evaluations += w.evaluations;
            visited = std::move(w.visited);
        } else if (sc.mode == SearchMode::exhaustive) {
            SearchResult r = exhaustive_search(p, sc, mc, rules);
            sum.evaluations += r.evaluations;
            visited = std::move(r.visited);
        } else {
            SearchResult r = beam_search(p, sc, rules, mc);
            sum.evaluations += r.evaluations;
            visited = std::move(r.visited);
        }
        std::vector<DataPoint> points;
        points.reserve(visited.size());
        for (ScoredState &st : visited)
            points.push_back({p.id, std::move(st.state.steps), st.speedup, true});
        points = dedupe(points);
        for (DataPoint &dp : points) all.push_back(std::move(dp));
    }
    sum.datapoints = all.size();
    write_datapoints(all, out_path);
    return sum;
}

}  // namespace nestopt
