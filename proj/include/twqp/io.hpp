#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "twqp/instance.hpp"
#include "twqp/pwq.hpp"
#include "twqp/treedec.hpp"

namespace twqp {

using Json = nlohmann::json;

// Every index in these formats is 1-based.
//
// Instance: {"n", "q": [[i, j, value], ...], "c", "lambda", "indicator"?, "offset"?}
// "q" lists each unordered pair once, diagonal included. "lambda" may be a
// single number. A missing "indicator" gives every variable an indicator.

Json instance_to_json(const Instance& inst);
Instance instance_from_json(const Json& j);
Instance read_instance(const std::string& path);
void write_instance(const std::string& path, const Instance& inst);

Json stats_to_json(const SolveStats& stats);
Json solution_to_json(const Solution& sol);

/// {"bags": [[...], ...], "child": [k or 0 for the root, ...]}
Json decomposition_to_json(const TreeDecomposition& t);
TreeDecomposition decomposition_from_json(const Json& j);
TreeDecomposition read_decomposition(const std::string& path);

/// {"coords": [...], "pieces": [{"a": [[...]], "b": [...], "d": x}, ...]}
Json pwq_to_json(const PiecewiseQuad& f);

Json parse_json(std::istream& in, const std::string& what);

}  // namespace twqp
