#pragma once

#include <stdexcept>
#include <string>

namespace evi {

/// Iterative solver failed to converge. step_index identifies the time step
/// for failures raised inside a state solve, -1 otherwise.
class SolveError : public std::runtime_error {
public:
    explicit SolveError(const std::string& what, int step_index = -1)
        : std::runtime_error(what), step_index_(step_index) {}

    int step_index() const { return step_index_; }

private:
    int step_index_;
};

} // namespace evi
