// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/geometry.hpp"

namespace sonicdist::mac {

/// Symmetric "can hear each other" relation between devices.
struct AudioRange {
  std::map<std::string, std::set<std::string>> hears;

  void add_device(const std::string& id) { hears.try_emplace(id); }
  void connect(const std::string& a, const std::string& b) {
    hears[a].insert(b);
    hears[b].insert(a);
  }
};

/// Default audio range: close range with a 1.5x margin for leakage that is
/// detectable without being close.
inline double audio_range_m(double close_range_m, double safety_factor = 1.5) { return close_range_m * safety_factor; }

inline AudioRange audio_range_from_positions(const std::map<std::string, Vec3>& positions, double range_m) {
  AudioRange r;
  for (const auto& [id, p] : positions) r.add_device(id);
  for (auto a = positions.begin(); a != positions.end(); ++a)
    for (auto b = std::next(a); b != positions.end(); ++b)
      if (distance(a->second, b->second) <= range_m) r.connect(a->first, b->first);
  return r;
}

class ConflictGraph {
 public:
  void add_vertex(const std::string& id) { adj_.try_emplace(id); }

  void add_edge(const std::string& a, const std::string& b) {
    if (a == b) return;
    adj_[a].insert(b);
    adj_[b].insert(a);
  }

  void remove_vertex(const std::string& id) {
    const auto it = adj_.find(id);
    if (it == adj_.end()) return;
    for (const auto& n : it->second) adj_[n].erase(id);
    adj_.erase(it);
  }

  bool contains(const std::string& id) const { return adj_.contains(id); }
  bool has_edge(const std::string& a, const std::string& b) const {
    const auto it = adj_.find(a);
    return it != adj_.end() && it->second.contains(b);
  }
  const std::set<std::string>& neighbors(const std::string& id) const { return adj_.at(id); }

  std::vector<std::string> vertices() const {
    std::vector<std::string> v;
    for (const auto& [id, _] : adj_) v.push_back(id);
    return v;
  }

  std::size_t size() const noexcept { return adj_.size(); }

  std::size_t max_degree() const noexcept {
    std::size_t d = 0;
    for (const auto& [_, n] : adj_) d = std::max(d, n.size());
    return d;
  }

  std::vector<std::pair<std::string, std::string>> edges() const {
    std::vector<std::pair<std::string, std::string>> e;
    for (const auto& [a, ns] : adj_)
      for (const auto& b : ns)
        if (a < b) e.emplace_back(a, b);
    return e;
  }

  friend bool operator==(const ConflictGraph&, const ConflictGraph&) = default;

 private:
  std::map<std::string, std::set<std::string>> adj_;
};

/// u and v conflict when they hear each other or share a listener: that
/// listener could not tell two simultaneous pulses apart.
inline ConflictGraph build_conflict_graph(const AudioRange& range) {
  for (const auto& [a, ns] : range.hears)
    for (const auto& b : ns) {
      const auto it = range.hears.find(b);
      if (it == range.hears.end() || !it->second.contains(a))
        throw InvalidArgument("conflict graph: audio range relation is not symmetric (" + a + ", " + b + ")");
    }
  ConflictGraph g;
  for (const auto& [id, ns] : range.hears) {
    g.add_vertex(id);
    for (const auto& n : ns) g.add_edge(id, n);
    // Two-hop: every pair of devices this one hears.
    for (auto a = ns.begin(); a != ns.end(); ++a)
      for (auto b = std::next(a); b != ns.end(); ++b) g.add_edge(*a, *b);
  }
  return g;
}

}  // namespace sonicdist::mac
