#pragma once

#include <string>

#include "pwlqp/pmm.hpp"

namespace pwlqp {

/// Problem exchange format: a JSON manifest with vectors inline (bounds may
/// be "inf"/"-inf") that names Matrix Market files for Q, A and Chat,
/// resolved relative to the manifest's directory.
void write_problem(const std::string& manifest_path, const ProblemSpec& spec);
ProblemSpec read_problem(const std::string& manifest_path);

struct Solution {
  Vector x, y1, y2, z;
};

/// Report plus solution as one JSON document. The wall time is omitted
/// when `with_wall_time` is false.
std::string result_to_json(const SolveResult& result, bool with_wall_time = true);
SolveResult result_from_json(const std::string& text);

/// Reads the "solution" object of a result document.
Solution read_solution(const std::string& path);

}  // namespace pwlqp
