#include "expectation_atlas/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "expectation_atlas/errors.hpp"

namespace expectation_atlas {

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": malformed JSON";
    throw ParseError(msg.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CMatrix complex_matrix_from_json(const Json& j, std::string_view what) {
  auto fail = [&](const std::string& why) { throw ParseError(std::string(what) + ": " + why); };
  if (!j.is_array() || j.empty()) fail("expected a non-empty list of rows");
  const auto rows = static_cast<Index>(j.size());
  CMatrix m(rows, rows);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != rows) fail("matrix must be square");
    for (Index c = 0; c < rows; ++c) {
      const Json& z = row[static_cast<std::size_t>(c)];
      if (z.is_number()) {
        m(r, c) = Complex(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
      } else {
        fail("entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

Json complex_matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const RVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RVector parse_vector(std::string_view text) {
  std::vector<double> values;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw ParseError("not a number: '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("empty vector");
  return Eigen::Map<RVector>(values.data(), static_cast<Index>(values.size()));
}

OperatorFile operator_file_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("operator file: top level must be an object");
  if (!doc.contains("operators") || !doc["operators"].is_array() || doc["operators"].empty())
    throw ParseError("operator file: missing non-empty \"operators\" list");
  OperatorFile file;
  const Json& list = doc["operators"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    CMatrix m = complex_matrix_from_json(list[i], "operator " + std::to_string(i));
    try {
      file.operators.emplace_back(std::move(m));
    } catch (const ValidationError& e) {
      throw ValidationError("operator " + std::to_string(i) + ": " + e.what());
    }
  }
  file.dim = file.operators.front().dim();
  if (doc.contains("dim")) {
    if (!doc["dim"].is_number_integer()) throw ParseError("operator file: \"dim\" must be an integer");
    if (doc["dim"].get<Index>() != file.dim)
      throw ValidationError("operator file: \"dim\" is " + std::to_string(doc["dim"].get<Index>()) +
                            " but operator 0 is " + std::to_string(file.dim) + "x" + std::to_string(file.dim));
  }
  for (std::size_t i = 0; i < file.operators.size(); ++i)
    if (file.operators[i].dim() != file.dim)
      throw ValidationError("operator " + std::to_string(i) + ": dimension differs from operator 0");
  if (doc.contains("labels")) {
    const Json& labels = doc["labels"];
    if (!labels.is_array() || labels.size() != file.operators.size())
      throw ParseError("operator file: \"labels\" must list one string per operator");
    for (const auto& l : labels) {
      if (!l.is_string()) throw ParseError("operator file: labels must be strings");
      file.labels.push_back(l.get<std::string>());
    }
  }
  return file;
}

OperatorSet to_operator_set(const OperatorFile& file, bool project_traceless) {
  if (project_traceless) return OperatorSet::project_traceless(file.operators, file.labels);
  return OperatorSet(file.operators, file.labels);
}

Json operator_file_to_json(const OperatorSet& ops) {
  Json doc;
  doc["dim"] = ops.dim();
  doc["operators"] = Json::array();
  for (const auto& o : ops.ops()) doc["operators"].push_back(complex_matrix_to_json(o.matrix()));
  doc["labels"] = ops.labels();
  return doc;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string boundary_csv(const std::vector<BoundaryFace>& faces) {
  std::string out = "theta,e1,e2,support,ground_dim,level\n";
  for (const auto& f : faces)
    for (const auto& p : f.points) {
      out += format_number(f.theta) + ',' + format_number(p(0)) + ',' + format_number(p(1)) + ',' +
             format_number(f.support) + ',' + std::to_string(f.ground_dim) + ",0\n";
    }
  return out;
}

std::string eigenset_csv(const std::vector<EigensetPoint>& points) {
  std::string out = "theta,e1,e2,support,ground_dim,level\n";
  for (const auto& p : points) {
    out += format_number(p.theta) + ',' + format_number(p.point(0)) + ',' + format_number(p.point(1)) + ',' +
           format_number(p.direction.dot(p.point)) + ",1," + std::to_string(p.level) + '\n';
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("write failed for " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace expectation_atlas
