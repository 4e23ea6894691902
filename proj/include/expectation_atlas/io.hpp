#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "expectation_atlas/boundary.hpp"
#include "expectation_atlas/linalg.hpp"

namespace expectation_atlas {

using Json = nlohmann::ordered_json;

// Parses text as JSON. Syntax errors become ParseError with line and column.
Json parse_json(std::string_view text, std::string_view source = "<input>");
std::string read_file(const std::string& path);

// { "dim": N, "operators": [matrix, ...], "labels": [...] } with each matrix a
// list of rows of [re, im] pairs.
struct OperatorFile {
  Index dim = 0;
  std::vector<HermitianOperator> operators;
  std::vector<std::string> labels;
};

OperatorFile operator_file_from_json(const Json& doc);
OperatorSet to_operator_set(const OperatorFile& file, bool project_traceless);
Json operator_file_to_json(const OperatorSet& ops);

CMatrix complex_matrix_from_json(const Json& j, std::string_view what);
Json complex_matrix_to_json(const CMatrix& m);
Json vector_to_json(const RVector& v);
RVector parse_vector(std::string_view text);

// %.17g
std::string format_number(double v);

// theta,e1,e2,support,ground_dim,level. Degenerate faces emit one row per
// endpoint.
std::string boundary_csv(const std::vector<BoundaryFace>& faces);
std::string eigenset_csv(const std::vector<EigensetPoint>& points);

// Writes to path.tmp, then renames over path.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace expectation_atlas
