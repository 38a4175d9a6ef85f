#include "evgraph/artifacts.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "evgraph/errors.hpp"
#include "evgraph/linearizer.hpp"
#include "json.hpp"

namespace evgraph {
namespace {

using nlohmann::json;

template <typename F>
void each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw IngestError(n, e.what());
    } catch (const IngestError&) {
      throw;
    } catch (const DataError& e) {
      throw IngestError(n, e.what());
    }
  }
}

json id_list(const std::vector<ElementId>& ids) {
  json a = json::array();
  for (const auto& id : ids) a.push_back(id.str());
  return a;
}

}  // namespace

void write_linearized(std::ostream& out, const PageStore& store, const std::vector<ElementId>& ids) {
  for (const auto& id : ids) out << json{{"id", id.str()}, {"text", linearize(store, id)}}.dump() << '\n';
}

void write_retrieval(std::ostream& out, const std::vector<RetrievalResult>& results) {
  for (const auto& r : results) {
    json pages = json::array(), scores = json::array();
    for (const auto& p : r.pages) {
      pages.push_back(p.page_id);
      scores.push_back(p.score);
    }
    out << json{{"id", r.claim_id}, {"pages", pages}, {"scores", scores}}.dump() << '\n';
  }
}

std::vector<RetrievalResult> read_retrieval(std::istream& in) {
  std::vector<RetrievalResult> out;
  each_line(in, [&](const json& j) {
    RetrievalResult r;
    r.claim_id = j.at("id").get<std::int64_t>();
    const auto& pages = j.at("pages");
    const auto& scores = j.at("scores");
    if (pages.size() != scores.size()) throw DataError("pages and scores differ in length");
    for (std::size_t i = 0; i < pages.size(); ++i) r.pages.push_back({pages[i].get<std::string>(), scores[i].get<double>()});
    out.push_back(std::move(r));
  });
  return out;
}

void write_selection(std::ostream& out, const std::vector<ClaimRecord>& claims, const std::vector<Selection>& sel) {
  if (claims.size() != sel.size()) throw DataError("selection and claims differ in length");
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (c.claim_id != sel[i].claim_id) throw DataError("selection out of order at claim " + std::to_string(c.claim_id));
    json sets = json::array();
    for (const auto& s : c.evidence_sets) sets.push_back(id_list(s));
    json ids = json::array(), scores = json::array();
    for (const auto& e : sel[i].items) {
      ids.push_back(e.id.str());
      scores.push_back(e.score);
    }
    out << json{{"id", c.claim_id}, {"claim", c.claim},       {"label", std::string(label_name(c.label))},
                {"evidence", sets},  {"selected", ids},        {"scores", scores}}
               .dump()
        << '\n';
  }
}

std::vector<Selection> read_selection(std::istream& in, const PageStore& store) {
  std::vector<Selection> out;
  each_line(in, [&](const json& j) {
    Selection s;
    s.claim_id = j.at("id").get<std::int64_t>();
    const auto& ids = j.at("selected");
    const auto& scores = j.at("scores");
    if (ids.size() != scores.size()) throw DataError("selected and scores differ in length");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const ElementId id = parse_element_id(ids[i].get<std::string>());
      s.items.push_back({id, linearize(store, id), scores[i].get<double>()});
    }
    out.push_back(std::move(s));
  });
  return out;
}

void write_graphs(std::ostream& out, const std::vector<EvidenceGraph>& graphs) {
  for (const auto& g : graphs) {
    json nodes = json::array();
    for (const auto& n : g.nodes) {
      json f = json::array();
      for (Eigen::Index i = 0; i < n.feature.size(); ++i) f.push_back(n.feature(i));
      nodes.push_back({{"id", n.id.str()}, {"sequence", n.sequence}, {"gold", n.gold}, {"feature", std::move(f)}});
    }
    json label = g.label ? json(std::string(label_name(*g.label))) : json(nullptr);
    out << json{{"claim_id", g.claim_id}, {"claim", g.claim},           {"label", label},
                {"has_gold", g.has_gold_flags}, {"nodes", std::move(nodes)}}
               .dump()
        << '\n';
  }
}

std::vector<EvidenceGraph> read_graphs(std::istream& in) {
  std::vector<EvidenceGraph> out;
  each_line(in, [&](const json& j) {
    EvidenceGraph g;
    g.claim_id = j.at("claim_id").get<std::int64_t>();
    g.claim = j.at("claim").get<std::string>();
    if (!j.at("label").is_null()) g.label = parse_label(j.at("label").get<std::string>());
    g.has_gold_flags = j.at("has_gold").get<bool>();
    for (const auto& n : j.at("nodes")) {
      GraphNode node;
      node.id = parse_element_id(n.at("id").get<std::string>());
      node.sequence = n.at("sequence").get<std::string>();
      node.gold = n.at("gold").get<bool>();
      const auto values = n.at("feature").get<std::vector<double>>();
      node.feature = Vector::Map(values.data(), static_cast<Eigen::Index>(values.size()));
      if (!g.nodes.empty() && node.feature.size() != g.nodes.front().feature.size())
        throw DataError("node feature dimensions differ within graph " + std::to_string(g.claim_id));
      g.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(g));
  });
  return out;
}

void write_graph_dump(std::ostream& out, const std::vector<EvidenceGraph>& graphs) {
  for (const auto& g : graphs) {
    json nodes = json::array();
    for (const auto& n : g.nodes) nodes.push_back({{"id", n.id.str()}, {"gold", n.gold}, {"feature_norm", n.feature.norm()}});
    out << json{{"claim_id", g.claim_id}, {"edges", g.edge_count()}, {"nodes", std::move(nodes)}}.dump(2) << '\n';
  }
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
  for (const auto& p : preds)
    out << json{{"id", p.claim_id},
                {"predicted_label", std::string(label_name(p.label))},
                {"predicted_evidence", id_list(p.evidence)}}
               .dump()
        << '\n';
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  each_line(in, [&](const json& j) {
    Prediction p;
    p.claim_id = j.at("id").get<std::int64_t>();
    p.label = parse_label(j.at("predicted_label").get<std::string>());
    for (const auto& id : j.at("predicted_evidence")) p.evidence.push_back(parse_element_id(id.get<std::string>()));
    out.push_back(std::move(p));
  });
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

}  // namespace evgraph
