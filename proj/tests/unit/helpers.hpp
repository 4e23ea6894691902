#pragma once

#include <string>

#include "expectation_atlas/io.hpp"
#include "expectation_atlas/linalg.hpp"

namespace test_support {

inline expectation_atlas::OperatorSet load_ops(const std::string& name) {
  using namespace expectation_atlas;
  const std::string path = std::string(EXPECTATION_ATLAS_DATA_DIR) + "/" + name;
  return to_operator_set(operator_file_from_json(parse_json(read_file(path), path)), false);
}

inline expectation_atlas::RVector expectations(const expectation_atlas::CMatrix& rho,
                                               const expectation_atlas::OperatorSet& ops) {
  expectation_atlas::RVector e(ops.size());
  for (expectation_atlas::Index i = 0; i < ops.size(); ++i)
    e(i) = (rho * ops.op(i).matrix()).trace().real();
  return e;
}

}  // namespace test_support
