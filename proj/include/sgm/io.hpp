#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgm/dataset.hpp"
#include "sgm/error.hpp"
#include "sgm/loglinear.hpp"
#include "sgm/stratified.hpp"
#include "sgm/table.hpp"

namespace sgm {

struct CsvSpec {
  char delimiter = ',';
  bool header = true;  // header row carries variable names
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

}  // namespace detail

// Reads a CSV of binary observations. Every data cell must be 0 or 1;
// structural problems raise ParseError with a position, non-binary values
// raise DomainError. Constant columns and empty data sections are reported
// as warnings on the returned dataset.
inline Dataset load_csv(const std::string& path, const CsvSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> names;
  std::vector<std::uint32_t> rows;
  int d = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_line(line, spec.delimiter);
    if (lineno == 1 && spec.header) {
      d = static_cast<int>(cells.size());
      names = cells;
      continue;
    }
    if (d < 0) d = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != d)
      throw ParseError("expected " + std::to_string(d) + " columns, found " +
                           std::to_string(cells.size()),
                       lineno, cells.size());
    std::uint32_t mask = 0;
    for (int j = 0; j < d; ++j) {
      if (cells[j] == "1")
        mask |= std::uint32_t{1} << j;
      else if (cells[j] != "0")
        throw DomainError("non-binary value '" + cells[j] + "' at line " +
                          std::to_string(lineno) + ", column " + std::to_string(j + 1));
    }
    rows.push_back(mask);
  }
  if (d < 0) throw ParseError("no data found", lineno, 0);

  Dataset ds = Dataset::from_rows(d, std::move(rows),
                                  spec.header ? names : std::vector<std::string>{});
  if (ds.rows.empty()) {
    ds.warnings.push_back("EmptyData: no observation rows");
  } else {
    for (int j = 0; j < d; ++j) {
      const double ones = marginal_values(ds.counts, node_bit(j))[1];
      if (ones == 0 || ones == static_cast<double>(ds.n()))
        ds.warnings.push_back("column " + ds.names[j] +
                              " is constant; its MLE sits on the boundary");
    }
  }
  return ds;
}

inline void save_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (int j = 0; j < ds.d; ++j) out << ds.names[j] << (j + 1 < ds.d ? "," : "\n");
  for (std::uint32_t r : ds.rows) {
    for (int j = 0; j < ds.d; ++j)
      out << ((r >> j) & 1) << (j + 1 < ds.d ? "," : "\n");
  }
}

inline constexpr const char* model_schema = "sgm-v1";

// Canonical serialization: fixed key order, edges and strata sorted,
// context keys in numeric order. Equal models serialize byte-identically.
inline nlohmann::ordered_json model_to_json(const StratifiedGraph& sg) {
  nlohmann::ordered_json j;
  j["schema"] = model_schema;
  j["nodes"] = sg.graph.node_count();
  auto edges = sg.graph.edges();
  std::sort(edges.begin(), edges.end());
  j["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : edges) j["edges"].push_back({e.a + 1, e.b + 1});
  j["strata"] = nlohmann::ordered_json::array();
  std::vector<Stratum> strata = sg.strata;
  std::sort(strata.begin(), strata.end(),
            [](const Stratum& x, const Stratum& y) { return x.edge < y.edge; });
  for (const Stratum& st : strata) {
    nlohmann::ordered_json js;
    js["edge"] = {st.edge.a + 1, st.edge.b + 1};
    js["contexts"] = nlohmann::ordered_json::array();
    std::vector<Context> ctxs = st.contexts;
    std::sort(ctxs.begin(), ctxs.end());
    for (const Context& c : ctxs) {
      nlohmann::ordered_json jc;
      for (int v : set_to_nodes(c.vars))
        jc[std::to_string(v + 1)] = set_contains(c.ones, v) ? 1 : 0;
      js["contexts"].push_back(jc);
    }
    j["strata"].push_back(js);
  }
  return j;
}

inline StratifiedGraph model_from_json(const nlohmann::json& j,
                                       std::vector<std::string>* warnings = nullptr) {
  if (!j.is_object()) throw SchemaError("model must be a JSON object", "/");
  for (const auto& [key, value] : j.items())
    if (key != "schema" && key != "nodes" && key != "edges" && key != "strata")
      throw SchemaError("unknown field '" + key + "'", "/" + key);
  if (j.contains("schema") && j["schema"] != model_schema)
    throw SchemaError("unsupported schema", "/schema");
  if (!j.contains("nodes") || !j["nodes"].is_number_integer())
    throw SchemaError("missing integer field 'nodes'", "/nodes");
  const int d = j["nodes"].get<int>();
  if (d < 1 || d > max_nodes) throw SchemaError("node count out of range", "/nodes");

  auto node_label = [&](const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw SchemaError("node label must be an integer", where);
    const int label = v.get<int>();
    if (label < 1 || label > d)
      throw SchemaError("node label " + std::to_string(label) + " out of 1.." +
                            std::to_string(d),
                        where);
    return label - 1;
  };

  UndirectedGraph g(d);
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) throw SchemaError("'edges' must be an array", "/edges");
    std::size_t i = 0;
    for (const auto& je : j["edges"]) {
      const std::string where = "/edges/" + std::to_string(i++);
      if (!je.is_array() || je.size() != 2)
        throw SchemaError("edge must be a pair of node labels", where);
      const int a = node_label(je[0], where), b = node_label(je[1], where);
      if (a == b) throw SchemaError("self-loop", where);
      g.add_edge(a, b);
    }
  }

  std::vector<Stratum> strata;
  if (j.contains("strata")) {
    if (!j["strata"].is_array()) throw SchemaError("'strata' must be an array", "/strata");
    std::size_t i = 0;
    for (const auto& js : j["strata"]) {
      const std::string where = "/strata/" + std::to_string(i++);
      if (!js.is_object()) throw SchemaError("stratum must be an object", where);
      for (const auto& [key, value] : js.items())
        if (key != "edge" && key != "contexts")
          throw SchemaError("unknown field '" + key + "'", where + "/" + key);
      if (!js.contains("edge") || !js["edge"].is_array() || js["edge"].size() != 2)
        throw SchemaError("stratum needs an 'edge' pair", where + "/edge");
      const Edge e(node_label(js["edge"][0], where + "/edge"),
                   node_label(js["edge"][1], where + "/edge"));
      Stratum st{e, {}};
      if (!js.contains("contexts") || !js["contexts"].is_array())
        throw SchemaError("stratum needs a 'contexts' array", where + "/contexts");
      std::size_t k = 0;
      for (const auto& jc : js["contexts"]) {
        const std::string cwhere = where + "/contexts/" + std::to_string(k++);
        if (!jc.is_object()) throw SchemaError("context must be an object", cwhere);
        Context c;
        for (const auto& [key, value] : jc.items()) {
          int label = 0;
          try {
            std::size_t used = 0;
            label = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
          } catch (const std::exception&) {
            throw SchemaError("context key '" + key + "' is not a node label",
                              cwhere + "/" + key);
          }
          if (label < 1 || label > d)
            throw SchemaError("node label out of range", cwhere + "/" + key);
          if (!value.is_number_integer() ||
              (value.get<int>() != 0 && value.get<int>() != 1))
            throw SchemaError("context value must be 0 or 1", cwhere + "/" + key);
          c.vars |= node_bit(label - 1);
          if (value.get<int>() == 1) c.ones |= node_bit(label - 1);
        }
        st.contexts.push_back(c);
      }
      strata.push_back(std::move(st));
    }
  }

  StratifiedGraph sg(std::move(g), std::move(strata));
  if (warnings) {
    std::string why;
    if (!is_valid(sg, &why)) warnings->push_back("model loads but fails validation: " + why);
  }
  return sg;
}

inline StratifiedGraph load_model(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what(), "/");
  }
  return model_from_json(j, warnings);
}

inline void save_model(const std::string& path, const StratifiedGraph& sg) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << model_to_json(sg).dump(2) << "\n";
}

inline constexpr const char* table_bit_order = "lsb=var1";

inline nlohmann::ordered_json table_to_json(const JointTable& t) {
  nlohmann::ordered_json j;
  j["d"] = t.d;
  j["bit_order"] = table_bit_order;
  j["probs"] = t.p;
  return j;
}

// Accepts either a "probs" vector (theta) or a "phi" vector (log-linear
// parameters, subset-mask indexed); phi input is converted and normalized.
inline JointTable table_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("table must be a JSON object", "/");
  if (!j.contains("d") || !j["d"].is_number_integer())
    throw SchemaError("missing integer field 'd'", "/d");
  const int d = j["d"].get<int>();
  if (j.contains("bit_order") && j["bit_order"] != table_bit_order)
    throw SchemaError("unsupported bit_order", "/bit_order");
  const bool has_probs = j.contains("probs");
  const bool has_phi = j.contains("phi");
  if (has_probs == has_phi)
    throw SchemaError("need exactly one of 'probs' or 'phi'", "/");
  const auto& arr = has_probs ? j["probs"] : j["phi"];
  if (!arr.is_array() || arr.size() != (std::size_t{1} << d))
    throw SchemaError("expected an array of 2^d numbers",
                      has_probs ? "/probs" : "/phi");
  if (has_probs) {
    JointTable t(d);
    for (std::size_t x = 0; x < t.size(); ++x) {
      if (!arr[x].is_number()) throw SchemaError("probability must be a number", "/probs");
      t.p[x] = arr[x].get<double>();
      if (t.p[x] < 0) throw SchemaError("negative probability", "/probs");
    }
    return t.normalize();
  }
  LogLinearParams params;
  params.d = d;
  params.phi.resize(std::size_t{1} << d);
  for (std::size_t x = 0; x < params.phi.size(); ++x) {
    if (!arr[x].is_number()) throw SchemaError("phi must be a number", "/phi");
    params.phi[x] = arr[x].get<double>();
  }
  return phi_to_theta(params);
}

inline JointTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what(), "/");
  }
  return table_from_json(j);
}

inline void save_table(const std::string& path, const JointTable& t) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << table_to_json(t).dump(2) << "\n";
}

// DOT rendering; stratified edges carry their contexts as labels in the
// "(v1, v2, ...)" shorthand, values ordered by node label.
inline std::string export_dot(const StratifiedGraph& sg,
                              const std::vector<std::string>& names = {}) {
  validate(sg);
  const int d = sg.graph.node_count();
  std::ostringstream out;
  out << "graph sgm {\n  node [shape=circle];\n";
  for (int v = 0; v < d; ++v) {
    const std::string name =
        v < static_cast<int>(names.size()) ? names[v] : "X" + std::to_string(v + 1);
    out << "  " << (v + 1) << " [label=\"" << name << "\"];\n";
  }
  auto edges = sg.graph.edges();
  std::sort(edges.begin(), edges.end());
  for (const Edge& e : edges) {
    out << "  " << (e.a + 1) << " -- " << (e.b + 1);
    for (const Stratum& st : sg.strata) {
      if (!(st.edge == e)) continue;
      std::vector<Context> ctxs = st.contexts;
      std::sort(ctxs.begin(), ctxs.end());
      std::string label;
      for (const Context& c : ctxs) {
        if (!label.empty()) label += ", ";
        label += "(";
        bool first = true;
        for (int v : set_to_nodes(c.vars)) {
          if (!first) label += ", ";
          label += set_contains(c.ones, v) ? "1" : "0";
          first = false;
        }
        label += ")";
      }
      out << " [label=\"" << label << "\"]";
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace sgm
