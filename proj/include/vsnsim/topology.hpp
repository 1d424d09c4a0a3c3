#pragma once

// Road network description and its compiled index form. Networks are
// directed: links are one-way cell arrays, every intersection has exactly
// two incoming traffic streams, and boundary links act as entries or exits.

#include <array>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace vsnsim {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinkSpec {
  std::string id;
  int cells = 40;
  std::string from;  // node id, or "" for a network entry boundary
  std::string to;    // node id, or "" for a network exit boundary
};

struct NodeSpec {
  std::string id;
  std::array<std::string, 2> streams;  // incoming link ids, stream 0 and 1
};

struct EntrySpec {
  std::string link;
};

struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<EntrySpec> entries;
  double cell_length_m = 7.5;

  static Topology parse(const nlohmann::json& j);
  static Topology load(const std::string& path);
  static Topology builtin(const std::string& name);
  static Topology grid2x2();
  static Topology single_intersection();
  static Topology single_lane(int main_cells, int exit_cells);
  nlohmann::json to_json() const;
};

// Compiled, index-based network.
struct Link {
  int cells = 0;
  int from_node = -1;  // -1: boundary
  int to_node = -1;    // -1: boundary (exit)
  int entry_index = -1;
  std::string id;
};

struct Node {
  std::array<int, 2> in_links{-1, -1};
  std::vector<int> out_links;  // ascending link index; deterministic routing order
  std::string id;
};

class RoadNetwork {
 public:
  explicit RoadNetwork(const Topology& t) {
    std::map<std::string, int> node_ix, link_ix;
    for (const auto& n : t.nodes) {
      if (node_ix.count(n.id)) throw TopologyError("duplicate node id: " + n.id);
      node_ix[n.id] = static_cast<int>(nodes_.size());
      nodes_.push_back(Node{{-1, -1}, {}, n.id});
    }
    for (const auto& l : t.links) {
      if (link_ix.count(l.id)) throw TopologyError("duplicate link id: " + l.id);
      if (l.cells < 1) throw TopologyError("link " + l.id + ": cells must be >= 1");
      Link lk;
      lk.cells = l.cells;
      lk.id = l.id;
      if (!l.from.empty()) {
        if (!node_ix.count(l.from)) throw TopologyError("link " + l.id + ": unknown node " + l.from);
        lk.from_node = node_ix[l.from];
      }
      if (!l.to.empty()) {
        if (!node_ix.count(l.to)) throw TopologyError("link " + l.id + ": unknown node " + l.to);
        lk.to_node = node_ix[l.to];
      }
      link_ix[l.id] = static_cast<int>(links_.size());
      links_.push_back(lk);
    }
    // one-way check: no reverse twin of any internal link
    for (const auto& a : links_)
      for (const auto& b : links_)
        if (a.from_node >= 0 && a.to_node >= 0 && a.from_node == b.to_node &&
            a.to_node == b.from_node)
          throw TopologyError("links " + a.id + "/" + b.id + " traverse both directions");

    for (std::size_t li = 0; li < links_.size(); ++li) {
      if (links_[li].from_node >= 0) nodes_[links_[li].from_node].out_links.push_back(static_cast<int>(li));
    }
    for (std::size_t ni = 0; ni < t.nodes.size(); ++ni) {
      for (int s = 0; s < 2; ++s) {
        const std::string& sid = t.nodes[ni].streams[s];
        if (!link_ix.count(sid)) throw TopologyError("node " + t.nodes[ni].id + ": unknown stream link " + sid);
        const int li = link_ix[sid];
        if (links_[li].to_node != static_cast<int>(ni))
          throw TopologyError("node " + t.nodes[ni].id + ": stream " + sid + " does not end there");
        nodes_[ni].in_links[s] = li;
      }
      if (nodes_[ni].in_links[0] == nodes_[ni].in_links[1])
        throw TopologyError("node " + t.nodes[ni].id + ": duplicate stream link");
      if (nodes_[ni].out_links.empty())
        throw TopologyError("node " + t.nodes[ni].id + ": no outgoing link");
    }
    // every incoming link of a node must be one of its two streams
    for (std::size_t li = 0; li < links_.size(); ++li) {
      const int tn = links_[li].to_node;
      if (tn >= 0 && nodes_[tn].in_links[0] != static_cast<int>(li) &&
          nodes_[tn].in_links[1] != static_cast<int>(li))
        throw TopologyError("link " + links_[li].id + " enters " + nodes_[tn].id +
                            " but is not a declared stream");
    }
    for (const auto& e : t.entries) {
      if (!link_ix.count(e.link)) throw TopologyError("entry references unknown link " + e.link);
      const int li = link_ix[e.link];
      if (links_[li].from_node != -1) throw TopologyError("entry link " + e.link + " is not a boundary link");
      links_[li].entry_index = static_cast<int>(entry_links_.size());
      entry_links_.push_back(li);
    }
  }

  const std::vector<Link>& links() const { return links_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& entry_links() const { return entry_links_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // stream index (0/1) of link li at its terminating node, or -1
  int stream_of_link(int li) const {
    const int tn = links_[li].to_node;
    if (tn < 0) return -1;
    return nodes_[tn].in_links[0] == li ? 0 : 1;
  }

 private:
  std::vector<Link> links_;
  std::vector<Node> nodes_;
  std::vector<int> entry_links_;
};

inline Topology Topology::parse(const nlohmann::json& j) {
  Topology t;
  t.cell_length_m = j.value("cell_length_m", 7.5);
  for (const auto& n : j.at("nodes")) {
    NodeSpec ns;
    ns.id = n.at("id").get<std::string>();
    const auto& st = n.at("streams");
    if (st.size() != 2) throw TopologyError("node " + ns.id + ": exactly two streams required");
    ns.streams = {st.at(0).get<std::string>(), st.at(1).get<std::string>()};
    t.nodes.push_back(ns);
  }
  for (const auto& l : j.at("links")) {
    LinkSpec ls;
    ls.id = l.at("id").get<std::string>();
    ls.cells = l.at("cells").get<int>();
    ls.from = l.value("from", std::string{});
    ls.to = l.value("to", std::string{});
    t.links.push_back(ls);
  }
  for (const auto& e : j.at("entries")) t.entries.push_back({e.at("link").get<std::string>()});
  return t;
}

inline Topology Topology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError("topology parse error in " + path + ": " + e.what());
  }
  return parse(j);
}

inline nlohmann::json Topology::to_json() const {
  nlohmann::json j;
  j["cell_length_m"] = cell_length_m;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes)
    j["nodes"].push_back({{"id", n.id}, {"streams", {n.streams[0], n.streams[1]}}});
  j["links"] = nlohmann::json::array();
  for (const auto& l : links)
    j["links"].push_back({{"id", l.id}, {"cells", l.cells}, {"from", l.from}, {"to", l.to}});
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) j["entries"].push_back({{"link", e.link}});
  return j;
}

// Four intersections on alternating one-way streets. Row 0 runs east through
// A then B, row 1 runs west through D then C, column 0 runs south through A
// then C, column 1 runs north through D then B. Every route crosses exactly
// two signalized stop lines.
inline Topology Topology::grid2x2() {
  Topology t;
  auto link = [&t](const std::string& id, const std::string& from, const std::string& to) {
    t.links.push_back({id, 40, from, to});
  };
  link("in_e_A", "", "A");   // eastbound entry
  link("in_s_A", "", "A");   // southbound entry
  link("in_w_D", "", "D");   // westbound entry
  link("in_n_D", "", "D");   // northbound entry
  link("A_B", "A", "B");
  link("A_C", "A", "C");
  link("D_C", "D", "C");
  link("D_B", "D", "B");
  link("out_e_B", "B", "");
  link("out_n_B", "B", "");
  link("out_w_C", "C", "");
  link("out_s_C", "C", "");
  t.nodes = {{"A", {"in_e_A", "in_s_A"}},
             {"B", {"A_B", "D_B"}},
             {"C", {"A_C", "D_C"}},
             {"D", {"in_w_D", "in_n_D"}}};
  t.entries = {{"in_e_A"}, {"in_s_A"}, {"in_w_D"}, {"in_n_D"}};
  return t;
}

inline Topology Topology::single_intersection() {
  Topology t;
  t.links = {{"in_a", 40, "", "X"},
             {"in_b", 40, "", "X"},
             {"out_a", 40, "X", ""},
             {"out_b", 40, "X", ""}};
  t.nodes = {{"X", {"in_a", "in_b"}}};
  t.entries = {{"in_a"}, {"in_b"}};
  return t;
}

// One saturated lane through a permanently green stop line; the second
// stream is a dummy approach that never receives traffic.
inline Topology Topology::single_lane(int main_cells, int exit_cells) {
  Topology t;
  t.links = {{"main", main_cells, "", "P"},
             {"dummy", 40, "", "P"},
             {"out", exit_cells, "P", ""}};
  t.nodes = {{"P", {"main", "dummy"}}};
  t.entries = {{"main"}, {"dummy"}};
  return t;
}

inline Topology Topology::builtin(const std::string& name) {
  if (name == "grid2x2") return grid2x2();
  if (name == "single_intersection") return single_intersection();
  if (name == "single_lane") return single_lane(40, 40);
  throw TopologyError("unknown builtin topology: " + name);
}

}  // namespace vsnsim
