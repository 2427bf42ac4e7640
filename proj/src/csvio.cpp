#include "sensq/csvio.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace sensq {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(line_no) + ": cannot parse " +
                    what + " value '" + s + "'");
  }
}

}  // namespace

StudyInput read_study_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::parse_error, "empty input: missing header row");
  }
  auto header = split_csv_line(strip(line));
  for (auto& h : header) h = strip(h);
  const bool has_delta = header.size() == 4 && header[3] == "delta";
  if (!(header.size() == 3 || has_delta) || header[0] != "set_id" ||
      header[1] != "treated" || header[2] != "outcome") {
    throw Error(ErrorCode::parse_error,
                "line 1: expected header set_id,treated,outcome[,delta]");
  }

  StudyInput input;
  input.has_delta = has_delta;
  std::map<std::string, int> set_index;  // set_id -> position in study
  // per-set treated flags, kept in the same unit order as outcomes
  std::vector<std::vector<int>> treated_flags;
  std::vector<std::vector<double>> deltas;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const auto fields = split_csv_line(trimmed);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    const std::string set_id = strip(fields[0]);
    const std::string treated_s = strip(fields[1]);
    if (treated_s != "0" && treated_s != "1") {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) +
                      ": treated must be 0 or 1, got '" + treated_s + "'");
    }
    const double outcome = parse_double(strip(fields[2]), line_no, "outcome");

    auto [it, inserted] = set_index.try_emplace(
        set_id, static_cast<int>(input.study.sets.size()));
    if (inserted) {
      MatchedSet set;
      set.set_id = set_id;
      input.study.sets.push_back(std::move(set));
      treated_flags.emplace_back();
      deltas.emplace_back();
    }
    const int i = it->second;
    input.study.sets[i].outcomes.push_back(outcome);
    treated_flags[i].push_back(treated_s == "1" ? 1 : 0);
    if (has_delta) {
      deltas[i].push_back(parse_double(strip(fields[3]), line_no, "delta"));
    }
  }

  for (std::size_t i = 0; i < input.study.sets.size(); ++i) {
    auto& set = input.study.sets[i];
    int count = 0, index = -1;
    for (std::size_t j = 0; j < treated_flags[i].size(); ++j) {
      if (treated_flags[i][j]) {
        ++count;
        index = static_cast<int>(j);
      }
    }
    if (count == 0) {
      throw ValidationError(ErrorCode::zero_treated,
                            "set " + set.set_id + " has no treated unit",
                            set.set_id);
    }
    if (count > 1) {
      throw ValidationError(ErrorCode::multi_treated,
                            "set " + set.set_id + " has " +
                                std::to_string(count) + " treated units",
                            set.set_id);
    }
    set.treated_index = index;
  }

  if (has_delta) {
    for (const auto& d : deltas) {
      input.delta.insert(input.delta.end(), d.begin(), d.end());
    }
  }
  input.study = validate_study(input.study);
  return input;
}

StudyInput read_study_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::parse_error, "cannot open input file " + path);
  }
  return read_study_csv(in);
}

void write_curve_csv(const ConfidenceCurve& curve, int num_sets,
                     std::ostream& out) {
  out << "k,quantile_fraction,lower_limit,achieved_p,status\n";
  out << std::setprecision(17);
  for (const auto& e : curve.entries) {
    out << e.k << ','
        << static_cast<double>(e.k) / num_sets << ','
        << e.lower_limit << ',' << e.achieved_p << ','
        << to_string(e.status) << '\n';
  }
}

namespace {

const char* engine_name(EngineKind kind) {
  switch (kind) {
    case EngineKind::pair_exact_dp: return "pair_exact_dp";
    case EngineKind::pair_monte_carlo: return "pair_monte_carlo";
    case EngineKind::set_asymptotic: return "set_asymptotic";
  }
  return "unknown";
}

EngineKind engine_from_name(const std::string& name) {
  if (name == "pair_exact_dp") return EngineKind::pair_exact_dp;
  if (name == "pair_monte_carlo") return EngineKind::pair_monte_carlo;
  if (name == "set_asymptotic") return EngineKind::set_asymptotic;
  throw Error(ErrorCode::parse_error, "unknown engine name '" + name + "'");
}

SearchStatus status_from_name(const std::string& name) {
  if (name == "converged") return SearchStatus::converged;
  if (name == "bracket_capped") return SearchStatus::bracket_capped;
  if (name == "noninformative") return SearchStatus::noninformative;
  throw Error(ErrorCode::parse_error, "unknown search status '" + name + "'");
}

}  // namespace

void write_curve_json(const ConfidenceCurve& curve, int num_sets,
                      std::ostream& out) {
  nlohmann::json j;
  j["alpha"] = curve.alpha;
  j["tolerance"] = curve.tol;
  j["seed"] = curve.seed;
  j["engine"] = engine_name(curve.engine);
  j["num_sets"] = num_sets;
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : curve.entries) {
    entries.push_back({{"k", e.k},
                       {"lower_limit", e.lower_limit},
                       {"achieved_p", e.achieved_p},
                       {"status", to_string(e.status)}});
  }
  out << j.dump(2) << '\n';
}

ConfidenceCurve read_curve_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::parse_error,
                std::string("invalid curve json: ") + e.what());
  }
  ConfidenceCurve curve;
  curve.alpha = j.at("alpha").get<double>();
  curve.tol = j.at("tolerance").get<double>();
  curve.seed = j.at("seed").get<std::uint64_t>();
  curve.engine = engine_from_name(j.at("engine").get<std::string>());
  for (const auto& e : j.at("entries")) {
    CurveEntry entry;
    entry.k = e.at("k").get<int>();
    entry.lower_limit = e.at("lower_limit").get<double>();
    entry.achieved_p = e.at("achieved_p").get<double>();
    entry.status = status_from_name(e.at("status").get<std::string>());
    curve.entries.push_back(entry);
  }
  return curve;
}

}  // namespace sensq
