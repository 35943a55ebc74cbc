#ifndef NESTOPT_DATAPOINT_HPP
#define NESTOPT_DATAPOINT_HPP

#include <string>
#include <vector>

#include "nestopt/transforms.hpp"

namespace nestopt {

// One labeled exploration sample: a schedule for a program plus its measured
// (modeled) speedup. Only legal schedules are ever emitted.
struct DataPoint {
    std::string program_id;
    std::vector<Transformation> schedule;
    double speedup = 1.0;
    bool legal = true;
};

}  // namespace nestopt

#endif
