#include "shieldrl/model.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "shieldrl/errors.hpp"

namespace shieldrl {

const std::array<const char*, kGridActions> kGridActionNames = {
    "N", "NE", "E", "SE", "S", "SW", "W", "NW", "Stay"};

const std::vector<Outcome>& Mdp::outcomes(int s, int a) const {
  if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
    throw NoSuchAction("no action " + std::to_string(a) + " at state " +
                       std::to_string(s));
  const auto& row = transitions[s][a];
  if (row.empty())
    throw NoSuchAction("state " + std::to_string(s) + " action " +
                       std::to_string(a) + " has no outcomes");
  return row;
}

KnowledgeSets::KnowledgeSets(const Mdp& mdp)
    : num_states_(mdp.num_states), num_actions_(mdp.num_actions) {
  feasible_.resize(static_cast<std::size_t>(num_states_) * num_actions_);
  outcomes_.resize(feasible_.size());
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a) {
      auto& fs = feasible_[static_cast<std::size_t>(s) * num_actions_ + a];
      auto& out = outcomes_[static_cast<std::size_t>(s) * num_actions_ + a];
      for (const auto& o : mdp.transitions[s][a])
        if (o.prob > 0.0) {
          fs.push_back(o.next);
          out.push_back(o);
        }
      std::sort(fs.begin(), fs.end());
    }
}

const std::vector<int>& KnowledgeSets::feasible(int s, int a) const {
  return feasible_[static_cast<std::size_t>(s) * num_actions_ + a];
}

std::vector<int> KnowledgeSets::likely(int s, int a, double eps) const {
  if (eps < 0.0 || eps >= 1.0)
    throw DomainError("eps must lie in [0,1)");
  std::vector<int> result;
  for (const auto& o : outcomes_[static_cast<std::size_t>(s) * num_actions_ + a])
    if (o.prob >= 1.0 - eps) result.push_back(o.next);
  std::sort(result.begin(), result.end());
  return result;
}

namespace {

std::pair<int, int> cell_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2)
    throw SpecError("cell must be a [x, y] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

GridSpec GridSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("grid spec is not valid JSON: ") + e.what());
  }
  GridSpec spec;
  try {
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.p_intended = j.value("p_intended", 0.9);
    for (const auto& c : j.value("obstacles", nlohmann::json::array()))
      spec.obstacles.push_back(cell_from_json(c));
    if (j.contains("regions"))
      for (const auto& [name, cells] : j.at("regions").items()) {
        auto& region = spec.regions[name];
        for (const auto& c : cells) region.push_back(cell_from_json(c));
      }
    for (const auto& r : j.value("rewards", nlohmann::json::array()))
      spec.rewards.emplace_back(cell_from_json(r.at("cell")),
                                r.at("value").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("grid spec field error: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string GridSpec::to_json() const {
  nlohmann::json j;
  j["width"] = width;
  j["height"] = height;
  j["p_intended"] = p_intended;
  auto& obs = j["obstacles"] = nlohmann::json::array();
  for (auto [x, y] : obstacles) obs.push_back({x, y});
  auto& regs = j["regions"] = nlohmann::json::object();
  for (const auto& [name, cells] : regions) {
    auto& arr = regs[name] = nlohmann::json::array();
    for (auto [x, y] : cells) arr.push_back({x, y});
  }
  auto& rews = j["rewards"] = nlohmann::json::array();
  for (const auto& [cell, value] : rewards) {
    nlohmann::json r;
    r["cell"] = {cell.first, cell.second};
    r["value"] = value;
    rews.push_back(std::move(r));
  }
  return j.dump(2);
}

void GridSpec::validate() const {
  if (width <= 0 || height <= 0)
    throw SpecError("grid dimensions must be positive");
  if (!(p_intended > 0.0 && p_intended <= 1.0))
    throw SpecError("p_intended must lie in (0,1]");
  auto in_bounds = [&](std::pair<int, int> c) {
    return c.first >= 0 && c.first < width && c.second >= 0 && c.second < height;
  };
  std::set<std::pair<int, int>> obstacle_set(obstacles.begin(), obstacles.end());
  for (auto c : obstacles)
    if (!in_bounds(c)) throw SpecError("obstacle out of bounds");
  if (static_cast<int>(obstacle_set.size()) == width * height)
    throw SpecError("grid has no free cell");
  for (const auto& [name, cells] : regions) {
    if (cells.empty()) throw SpecError("region '" + name + "' is empty");
    for (auto c : cells) {
      if (!in_bounds(c))
        throw SpecError("region '" + name + "' cell out of bounds");
      if (obstacle_set.count(c))
        throw SpecError("region '" + name + "' overlaps an obstacle");
    }
  }
  for (const auto& [cell, value] : rewards) {
    (void)value;
    if (!in_bounds(cell)) throw SpecError("reward cell out of bounds");
  }
}

int GridModel::state_at(int x, int y) const {
  if (x < 0 || x >= width || y < 0 || y >= height)
    throw SpecError("cell out of bounds");
  int id = state_of_cell[static_cast<std::size_t>(y) * width + x];
  if (id < 0) throw SpecError("cell is an obstacle");
  return id;
}

GridModel build_grid(const GridSpec& spec) {
  spec.validate();
  GridModel model;
  model.width = spec.width;
  model.height = spec.height;
  model.state_of_cell.assign(static_cast<std::size_t>(spec.width) * spec.height,
                             -1);
  std::set<std::pair<int, int>> obstacle_set(spec.obstacles.begin(),
                                             spec.obstacles.end());
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      if (!obstacle_set.count({x, y})) {
        model.state_of_cell[static_cast<std::size_t>(y) * spec.width + x] =
            static_cast<int>(model.cell_of_state.size());
        model.cell_of_state.emplace_back(x, y);
      }

  Mdp& mdp = model.mdp;
  mdp.num_states = static_cast<int>(model.cell_of_state.size());
  mdp.num_actions = kGridActions;

  std::map<std::pair<int, int>, double> reward_map;
  for (const auto& [cell, value] : spec.rewards) reward_map[cell] = value;
  std::map<std::pair<int, int>, std::vector<std::string>> label_map;
  for (const auto& [name, cells] : spec.regions)
    for (auto c : cells) label_map[c].push_back(name);

  std::set<std::string> atom_set;
  for (const auto& [name, cells] : spec.regions) atom_set.insert(name);
  mdp.atoms.assign(atom_set.begin(), atom_set.end());

  mdp.transitions.resize(mdp.num_states);
  mdp.reward.resize(mdp.num_states);
  mdp.labels.resize(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    auto [x, y] = model.cell_of_state[s];
    double cell_reward = 0.0;
    if (auto it = reward_map.find({x, y}); it != reward_map.end())
      cell_reward = it->second;
    mdp.reward[s].assign(kGridActions, cell_reward);
    if (auto it = label_map.find({x, y}); it != label_map.end()) {
      mdp.labels[s] = it->second;
      std::sort(mdp.labels[s].begin(), mdp.labels[s].end());
    }

    // Feasible moves: self plus every in-bounds non-obstacle neighbor. Every
    // feasible move is the intended target of exactly one action.
    std::vector<int> move_target(kGridActions, -1);
    std::vector<int> feasible_moves;
    for (int a = 0; a < kGridActions; ++a) {
      int nx = x + kGridMoves[a].first;
      int ny = y + kGridMoves[a].second;
      if (nx < 0 || nx >= spec.width || ny < 0 || ny >= spec.height) continue;
      int id = model.state_of_cell[static_cast<std::size_t>(ny) * spec.width + nx];
      if (id < 0) continue;
      move_target[a] = id;
      feasible_moves.push_back(id);
    }

    mdp.transitions[s].resize(kGridActions);
    for (int a = 0; a < kGridActions; ++a) {
      auto& row = mdp.transitions[s][a];
      int intended = move_target[a];
      if (intended >= 0 && feasible_moves.size() > 1) {
        double rest =
            (1.0 - spec.p_intended) / static_cast<double>(feasible_moves.size() - 1);
        for (int target : feasible_moves) {
          double p = target == intended ? spec.p_intended : rest;
          if (p > 0.0) row.push_back({target, p});
        }
      } else {
        // Intended move blocked (or nowhere else to go): spread the full mass
        // uniformly over the feasible moves.
        double p = 1.0 / static_cast<double>(feasible_moves.size());
        for (int target : feasible_moves) row.push_back({target, p});
      }
    }
  }

  model.knowledge = KnowledgeSets(mdp);
  return model;
}

std::pair<int, double> sample_transition(const Mdp& mdp, int s, int a,
                                         RngStream& rng) {
  const auto& row = mdp.outcomes(s, a);
  double u = rng.next_double();
  double acc = 0.0;
  int next = row.back().next;
  for (const auto& o : row) {
    acc += o.prob;
    if (u < acc) {
      next = o.next;
      break;
    }
  }
  return {next, mdp.reward[s][a]};
}

}  // namespace shieldrl
