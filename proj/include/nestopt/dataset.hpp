#ifndef NESTOPT_DATASET_HPP
#define NESTOPT_DATASET_HPP

#include <string>
#include <vector>

#include "nestopt/datapoint.hpp"
#include "nestopt/search.hpp"

namespace nestopt {

void write_datapoints(const std::vector<DataPoint> &points, const std::string &path);

// Strict reader: any malformed line raises SchemaError carrying its 1-based
// line number.
std::vector<DataPoint> read_datapoints(const std::string &path);

std::string datapoint_to_json_line(const DataPoint &p);
DataPoint datapoint_from_json_line(const std::string &line, size_t line_no);

// First occurrence wins, keyed on (program_id, serialized schedule).
std::vector<DataPoint> dedupe(const std::vector<DataPoint> &points);

struct ExplorationSummary {
    size_t programs = 0;
    size_t datapoints = 0;
    int64_t evaluations = 0;
};

// Runs the configured explorer over every program and writes one dataset
// file (atomically: temp file + rename). Deterministic for fixed inputs.
ExplorationSummary run_exploration(const std::vector<Program> &corpus, const SearchConfig &sc,
                                   const RuleSet &rules, const MachineConfig &mc,
                                   const std::string &out_path);

}  // namespace nestopt

#endif
