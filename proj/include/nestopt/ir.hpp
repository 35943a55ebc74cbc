#ifndef NESTOPT_IR_HPP
#define NESTOPT_IR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nestopt/errors.hpp"

namespace nestopt {

// Access shape of the single statement inside a perfect nest. Each loop maps
// identity onto one array dimension; `offsets` holds constant shifts added to
// that map, one vector per reference, each of length == nest depth.
struct AccessPattern {
    std::string array;
    std::vector<std::vector<int>> offsets;
    bool is_write = false;
};

enum class Pattern { elementwise, stencil, reduction };

const char *pattern_name(Pattern p);
Pattern pattern_from_name(const std::string &name);

// A perfect loop nest holding one statement. Depth is capped at 4: deep
// enough for every transformation to have room, small enough that brute
// force stays cheap.
struct LoopNest {
    int depth = 0;
    std::vector<int64_t> extents;   // one per loop, outermost first
    Pattern pattern = Pattern::elementwise;
    int64_t statement_cost = 1;
    std::vector<AccessPattern> accesses;  // exactly one write among them
};

struct Program {
    std::string id;
    uint64_t seed = 0;
    std::vector<LoopNest> nests;  // 1..4 nests
};

struct GeneratorConfig {
    int max_nests = 2;
    int max_depth = 3;
    std::vector<int64_t> extent_choices = {16, 32, 64, 128};
    // Weights indexed as {elementwise, stencil, reduction}.
    std::vector<double> pattern_weights = {1.0, 1.0, 1.0};
    // Candidate read-offset sets for stencils. Entries are grouped sets; the
    // generator picks one whole set whose vectors match the nest depth.
    std::vector<std::vector<std::vector<int>>> stencil_offset_catalog;

    GeneratorConfig();
};

struct Violation {
    int nest = -1;       // -1 flags a program-level problem
    std::string field;   // e.g. "nests[2].extents[0]"
    std::string message;
};

// Deterministic: one seed, one program, bit-identical on regeneration.
Program generate_program(uint64_t seed, const GeneratorConfig &cfg);

// n programs with per-index sub-seeds, so growing a corpus never disturbs an
// existing prefix.
std::vector<Program> generate_corpus(uint64_t seed, size_t n, const GeneratorConfig &cfg);

std::vector<Violation> validate_program(const Program &p);

// JSON Lines corpus file, one program per line.
void write_corpus(const std::vector<Program> &corpus, const std::string &path);
std::vector<Program> read_corpus(const std::string &path);

std::string program_to_json_line(const Program &p);
Program program_from_json_line(const std::string &line, size_t line_no);

GeneratorConfig load_generator_config(const std::string &path);

}  // namespace nestopt

#endif
