#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratgn/errors.hpp"
#include "stratgn/model.hpp"

namespace stratgn {

using Json = nlohmann::json;

namespace detail {

inline const Json& require(const Json& obj, const std::string& key,
                           const std::string& path) {
  if (!obj.is_object()) {
    throw InputError(path, "expected an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError(path.empty() ? key : path + "." + key, "missing field");
  }
  return *it;
}

inline int read_dim(const Json& j, const std::string& path, int minimum) {
  if (!j.is_number_integer()) {
    throw InputError(path, "expected an integer");
  }
  const auto v = j.get<long long>();
  if (v < minimum || v > 100000) {
    throw InputError(path, "out of range");
  }
  return static_cast<int>(v);
}

inline std::vector<double> read_reals(const Json& j, const std::string& path,
                                      std::size_t expected) {
  if (!j.is_array()) {
    throw InputError(path, "expected an array");
  }
  if (j.size() != expected) {
    throw InputError(path, "expected " + std::to_string(expected) +
                               " numbers, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw InputError(path + "[" + std::to_string(i) + "]",
                       "expected a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Json packed_json(const SymMatrix& s) {
  return Json(std::vector<double>(s.packed().begin(), s.packed().end()));
}

inline Json vector_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Json parse_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what, std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError(path, "cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace detail

inline std::shared_ptr<const AffineQuadraticProblem> problem_from_json(
    const Json& doc) {
  using detail::require;
  const int n = detail::read_dim(require(doc, "n", ""), "n", 1);
  const int m = detail::read_dim(require(doc, "m", ""), "m", 0);
  const Json& objective = require(doc, "objective", "");
  const Vector c = detail::to_vector(detail::read_reals(
      require(objective, "c", "objective"), "objective.c",
      static_cast<std::size_t>(m)));
  SymMatrix q(m);
  if (objective.contains("Q") && !objective["Q"].is_null()) {
    q = SymMatrix::from_packed(
        m, detail::read_reals(objective["Q"], "objective.Q", packed_size(m)));
  }
  const Json& constraint = require(doc, "constraint", "");
  SymMatrix a0 = SymMatrix::from_packed(
      n, detail::read_reals(require(constraint, "A0", "constraint"),
                            "constraint.A0", packed_size(n)));
  const Json& a_list = require(constraint, "A", "constraint");
  if (!a_list.is_array() || a_list.size() != static_cast<std::size_t>(m)) {
    throw InputError("constraint.A",
                     "expected an array of " + std::to_string(m) + " matrices");
  }
  std::vector<SymMatrix> a;
  a.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    a.push_back(SymMatrix::from_packed(
        n, detail::read_reals(a_list[static_cast<std::size_t>(i)],
                              "constraint.A[" + std::to_string(i) + "]",
                              packed_size(n))));
  }
  return std::make_shared<const AffineQuadraticProblem>(c, std::move(q),
                                                        std::move(a0),
                                                        std::move(a));
}

inline Json problem_to_json(const AffineQuadraticProblem& problem) {
  Json a = Json::array();
  for (const auto& ai : problem.a()) {
    a.push_back(detail::packed_json(ai));
  }
  return Json{{"n", problem.order()},
              {"m", problem.num_vars()},
              {"objective",
               {{"c", detail::vector_json(problem.c())},
                {"Q", detail::packed_json(problem.q())}}},
              {"constraint", {{"A0", detail::packed_json(problem.a0())},
                              {"A", std::move(a)}}}};
}

inline std::shared_ptr<const AffineQuadraticProblem> load_problem(
    const std::string& path) {
  return problem_from_json(
      detail::parse_text(detail::read_file(path), path));
}

inline void save_problem(const AffineQuadraticProblem& problem,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError(path, "cannot write file");
  }
  out << problem_to_json(problem).dump(2) << '\n';
}

/// Point document {x, y}, validated against the problem's dimensions.
inline PrimalDualPoint point_from_json(const Json& doc, int m, int n) {
  const Vector x = detail::to_vector(detail::read_reals(
      detail::require(doc, "x", ""), "x", static_cast<std::size_t>(m)));
  SymMatrix y = SymMatrix::from_packed(
      n, detail::read_reals(detail::require(doc, "y", ""), "y",
                            packed_size(n)));
  return {x, std::move(y)};
}

inline Json point_to_json(const PrimalDualPoint& z) {
  return Json{{"x", detail::vector_json(z.x)},
              {"y", detail::packed_json(z.y)}};
}

inline PrimalDualPoint load_point(const std::string& path, int m, int n) {
  return point_from_json(detail::parse_text(detail::read_file(path), path), m,
                         n);
}

inline void save_point(const PrimalDualPoint& z, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError(path, "cannot write file");
  }
  out << point_to_json(z).dump(2) << '\n';
}

}  // namespace stratgn
