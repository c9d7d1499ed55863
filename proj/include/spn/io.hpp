#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spn/graph.hpp"

namespace spn {

/// Line-based model format: `vars <n>`, `node <id> sum|prod|leaf <var> <value>`,
/// `edge <parent> <child> [weight]`. `#` starts a comment. Throws ParseError with the
/// 1-based line of the first problem.
SpnGraph parse_model(std::string_view text);

/// Inverse of parse_model. Weights use 17 significant digits so the round trip is exact.
std::string serialize_model(const SpnGraph& graph);

/// Lines `<sum-id>: a1 ... ak` in child order. Sum nodes without a line get all-ones.
DirichletPrior parse_prior(std::string_view text, const SpnGraph& graph);
std::string serialize_prior(const SpnGraph& graph, const DirichletPrior& prior);

/// One comma-separated row: category integers or `?`. `row` is only used in errors.
Instance parse_instance(std::string_view row, const SpnGraph& graph, std::size_t row_number = 1);

/// CSV without header, one instance per non-blank line. Throws DataError(row, column).
std::vector<Instance> parse_data(std::string_view text, const SpnGraph& graph);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// `%.15g`, or `-inf` / `inf` / `nan`.
std::string format_number(double value, int significant_digits = 15);

}  // namespace spn
