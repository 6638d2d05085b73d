#include "avgkit/system_io.hpp"

#include <fstream>
#include <numbers>
#include <optional>

#include <json.hpp>

namespace avgkit {

namespace {

using nlohmann::json;

// Walks the file once, reporting every problem through `issue`; returns the
// System when everything held together.
template <typename Report>
std::optional<System> read_system(const std::string& path, std::string* name,
                                  std::string* description, Report&& issue) {
  std::ifstream in(path);
  if (!in) {
    issue("file", "cannot open '" + path + "'");
    return std::nullopt;
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    issue("file", std::string("invalid JSON: ") + e.what());
    return std::nullopt;
  }
  if (!j.is_object()) {
    issue("file", "top level must be a JSON object");
    return std::nullopt;
  }

  static const char* kKnown[] = {"name", "description", "n", "T", "k", "F"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKnown) known = known || it.key() == k;
    if (!known) issue(it.key(), "unknown key");
  }

  if (name && j.contains("name") && j["name"].is_string())
    *name = j["name"].get<std::string>();
  if (description && j.contains("description") && j["description"].is_string())
    *description = j["description"].get<std::string>();

  bool ok = true;
  auto require = [&](const char* key, bool cond, const std::string& what) {
    if (!cond) {
      issue(key, what);
      ok = false;
    }
  };

  require("n", j.contains("n") && j["n"].is_number_integer(),
          "missing or non-integer dimension");
  require("k", j.contains("k") && j["k"].is_number_integer(),
          "missing or non-integer order");
  require("T", j.contains("T") && (j["T"].is_number() || j["T"].is_string()),
          "missing period (number or the literal \"2pi\")");
  require("F", j.contains("F") && j["F"].is_array(), "missing field array");
  if (!ok) return std::nullopt;

  const int n = j["n"].get<int>();
  const int k = j["k"].get<int>();
  double T = 0;
  if (j["T"].is_string()) {
    const std::string ts = j["T"].get<std::string>();
    if (ts == "2pi") {
      T = 2.0 * std::numbers::pi;
    } else {
      issue("T", "unrecognized period literal '" + ts + "' (only \"2pi\")");
      return std::nullopt;
    }
  } else {
    T = j["T"].get<double>();
  }
  if (n < 1 || n > 10) {
    issue("n", "dimension must be 1..10");
    return std::nullopt;
  }
  if (k < 1 || k > 5) {
    issue("k", "order must be 1..5");
    return std::nullopt;
  }
  if (!(T > 0)) {
    issue("T", "period must be > 0");
    return std::nullopt;
  }

  const json& F = j["F"];
  if ((int)F.size() != k) {
    issue("F", "expected k = " + std::to_string(k) + " vector fields, got " +
                   std::to_string(F.size()));
    return std::nullopt;
  }
  std::vector<std::vector<Expr>> fields(k);
  for (int i = 0; i < k; ++i) {
    const std::string fi = "F[" + std::to_string(i) + "]";
    if (!F[i].is_array() || (int)F[i].size() != n) {
      issue(fi, "expected an array of n = " + std::to_string(n) + " expressions");
      ok = false;
      continue;
    }
    fields[i].resize(n);
    for (int c = 0; c < n; ++c) {
      const std::string fc = fi + "[" + std::to_string(c) + "]";
      if (!F[i][c].is_string()) {
        issue(fc, "expression must be a string");
        ok = false;
        continue;
      }
      try {
        fields[i][c] = parse_expr(F[i][c].get<std::string>(), n);
      } catch (const ParseError& e) {
        issue(fc, e.what());
        ok = false;
      }
    }
  }
  if (!ok) return std::nullopt;

  try {
    return make_system(n, T, k, std::move(fields));
  } catch (const std::exception& e) {
    issue("system", e.what());
    return std::nullopt;
  }
}

}  // namespace

SystemFile load_system_file(const std::string& path) {
  SystemFile sf;
  sf.path = path;
  std::string first_issue;
  auto sys = read_system(path, &sf.name, &sf.description,
                         [&](const std::string& where, const std::string& what) {
                           if (first_issue.empty())
                             first_issue = path + ": " + where + ": " + what;
                         });
  if (!sys) throw SystemFileError(first_issue.empty()
                                      ? path + ": invalid system file"
                                      : first_issue);
  sf.system = std::move(*sys);
  return sf;
}

std::vector<CheckIssue> check_system_file(const std::string& path) {
  std::vector<CheckIssue> issues;
  read_system(path, nullptr, nullptr,
              [&](const std::string& where, const std::string& what) {
                issues.push_back({where, what});
              });
  return issues;
}

}  // namespace avgkit
