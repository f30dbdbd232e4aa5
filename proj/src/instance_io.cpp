#include <algorithm>
#include <fstream>
#include <limits>
#include <iomanip>

#include "twqp/error.hpp"
#include "twqp/io.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw InputError(std::string("missing field '") + name + "'");
  return j.at(name);
}

int index_value(const Json& v, int n, const char* what) {
  if (!v.is_number_integer()) throw InputError(std::string(what) + " index must be an integer");
  const auto k = v.get<long long>();
  if (k < 1 || k > n) throw InputError(std::string(what) + " index " + std::to_string(k) + " outside 1.." + std::to_string(n));
  return static_cast<int>(k - 1);
}

std::vector<double> real_vector(const Json& v, int n, const char* what) {
  if (v.is_number() && std::string(what) == "lambda") return std::vector<double>(idx(n), v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    throw InputError(std::string("'") + what + "' must be an array of length " + std::to_string(n));
  }
  std::vector<double> out;
  out.reserve(idx(n));
  for (const auto& e : v) {
    if (!e.is_number()) throw InputError(std::string("'") + what + "' holds a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

Json parse_json(std::istream& in, const std::string& what) {
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("cannot parse " + what + ": " + e.what());
  }
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["n"] = inst.size();
  Json q = Json::array();
  for (const auto& e : inst.q.upper_entries()) q.push_back({e.i + 1, e.j + 1, e.value});
  j["q"] = std::move(q);
  j["c"] = inst.c;
  j["lambda"] = inst.lambda;
  j["indicator"] = Json::array();
  for (bool b : inst.indicator) j["indicator"].push_back(b);
  j["offset"] = inst.offset;
  return j;
}

Instance instance_from_json(const Json& j) {
  const Json& nj = field(j, "n");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) throw InputError("'n' must be a positive integer");
  const int n = nj.get<int>();
  const Json& qj = field(j, "q");
  if (!qj.is_array()) throw InputError("'q' must be an array of [i, j, value] triples");
  std::vector<MatrixEntry> entries;
  entries.reserve(qj.size());
  for (const auto& t : qj) {
    if (!t.is_array() || t.size() != 3 || !t[2].is_number()) throw InputError("'q' entries must be [i, j, value]");
    entries.push_back({index_value(t[0], n, "q"), index_value(t[1], n, "q"), t[2].get<double>()});
  }
  Instance inst;
  inst.q = SparseSymMatrix::from_entries(n, entries);
  inst.c = real_vector(field(j, "c"), n, "c");
  inst.lambda = real_vector(field(j, "lambda"), n, "lambda");
  inst.indicator.assign(idx(n), true);
  if (j.contains("indicator")) {
    const Json& ind = j.at("indicator");
    if (!ind.is_array() || static_cast<int>(ind.size()) != n) {
      throw InputError("'indicator' must be an array of length " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) {
      const Json& e = ind[idx(i)];
      if (e.is_boolean()) inst.indicator[idx(i)] = e.get<bool>();
      else if (e.is_number_integer()) inst.indicator[idx(i)] = e.get<int>() != 0;
      else throw InputError("'indicator' entries must be booleans");
    }
  }
  if (j.contains("offset")) {
    if (!j.at("offset").is_number()) throw InputError("'offset' must be a number");
    inst.offset = j.at("offset").get<double>();
  }
  return inst;
}

Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return instance_from_json(parse_json(in, path));
}

void write_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << instance_to_json(inst).dump(1) << '\n';
}

Json stats_to_json(const SolveStats& stats) {
  Json j;
  j["seconds"] = stats.seconds;
  j["U"] = stats.u_used;
  j["width"] = stats.width;
  j["prune_mode"] = stats.prune_mode;
  j["max_retained"] = stats.max_retained;
  j["mean_retained"] = stats.mean_retained;
  j["pieces_before_prune"] = stats.pieces_before_prune;
  j["pieces_after_prune"] = stats.pieces_after_prune;
  j["recovered_objective"] = stats.recovered_objective;
  return j;
}

Json solution_to_json(const Solution& sol) {
  Json j;
  j["objective"] = sol.objective;
  j["x"] = sol.x;
  j["z"] = Json::array();
  for (bool b : sol.z) j["z"].push_back(b ? 1 : 0);
  j["stats"] = stats_to_json(sol.stats);
  return j;
}

Json decomposition_to_json(const TreeDecomposition& t) {
  Json j;
  j["bags"] = Json::array();
  for (const auto& bag : t.bags) {
    Json b = Json::array();
    for (int v : bag) b.push_back(v + 1);
    j["bags"].push_back(std::move(b));
  }
  j["child"] = Json::array();
  for (int c : t.child) j["child"].push_back(c + 1);
  return j;
}

TreeDecomposition decomposition_from_json(const Json& j) {
  const Json& bags = field(j, "bags");
  const Json& child = field(j, "child");
  if (!bags.is_array() || !child.is_array() || bags.size() != child.size() || bags.empty()) {
    throw InputError("'bags' and 'child' must be nonempty arrays of equal length");
  }
  const int count = static_cast<int>(bags.size());
  TreeDecomposition t;
  for (const auto& b : bags) {
    if (!b.is_array() || b.empty()) throw InputError("every bag must be a nonempty array");
    std::vector<int> bag;
    for (const auto& v : b) bag.push_back(index_value(v, std::numeric_limits<int>::max(), "bag node"));
    std::sort(bag.begin(), bag.end());
    if (std::adjacent_find(bag.begin(), bag.end()) != bag.end()) throw InputError("bag lists a node twice");
    t.bags.push_back(std::move(bag));
  }
  for (const auto& c : child) {
    if (!c.is_number_integer()) throw InputError("'child' entries must be integers");
    const int k = c.get<int>();
    if (k < 0 || k > count) throw InputError("'child' entry " + std::to_string(k) + " outside 0.." + std::to_string(count));
    t.child.push_back(k - 1);
  }
  return t;
}

TreeDecomposition read_decomposition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return decomposition_from_json(parse_json(in, path));
}

Json pwq_to_json(const PiecewiseQuad& f) {
  Json j;
  j["coords"] = Json::array();
  for (int v : f.coords()) j["coords"].push_back(v + 1);
  j["pieces"] = Json::array();
  for (std::size_t s = 0; s < f.size(); ++s) {
    const QuadPiece p = f.piece(s);
    Json a = Json::array();
    for (Eigen::Index r = 0; r < p.a.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < p.a.cols(); ++c) row.push_back(p.a(r, c));
      a.push_back(std::move(row));
    }
    Json b = Json::array();
    for (Eigen::Index r = 0; r < p.b.size(); ++r) b.push_back(p.b(r));
    j["pieces"].push_back({{"a", std::move(a)}, {"b", std::move(b)}, {"d", p.d}});
  }
  return j;
}

}  // namespace twqp
