#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "tnet/tensor.hpp"

namespace tnet {

namespace {

struct Shape {
  std::vector<Label> labels;
  std::vector<std::size_t> dims;
};

Shape shape_of(const DenseTensor& t) { return {t.labels(), t.dims()}; }

bool shares_label(const Shape& a, const Shape& b) {
  return std::any_of(a.labels.begin(), a.labels.end(), [&](const Label& l) {
    return std::find(b.labels.begin(), b.labels.end(), l) != b.labels.end();
  });
}

Shape merged(const Shape& a, const Shape& b) {
  Shape out;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    if (std::find(b.labels.begin(), b.labels.end(), a.labels[i]) == b.labels.end()) {
      out.labels.push_back(a.labels[i]);
      out.dims.push_back(a.dims[i]);
    }
  }
  for (std::size_t i = 0; i < b.labels.size(); ++i) {
    if (std::find(a.labels.begin(), a.labels.end(), b.labels[i]) == a.labels.end()) {
      out.labels.push_back(b.labels[i]);
      out.dims.push_back(b.dims[i]);
    }
  }
  return out;
}

double volume(const Shape& s) {
  double v = 1.0;
  for (auto d : s.dims) v *= static_cast<double>(d);
  return v;
}

// Product of every distinct extent touched by contracting a with b.
double step_cost(const Shape& a, const Shape& b) {
  double v = volume(a);
  for (std::size_t i = 0; i < b.labels.size(); ++i) {
    if (std::find(a.labels.begin(), a.labels.end(), b.labels[i]) == a.labels.end()) {
      v *= static_cast<double>(b.dims[i]);
    }
  }
  return v;
}

void validate_network(const std::vector<DenseTensor>& tensors) {
  if (tensors.empty()) throw std::invalid_argument("contract_network: empty network");
  std::map<Label, std::pair<int, std::size_t>> seen;  // count, extent
  for (const auto& t : tensors) {
    for (std::size_t i = 0; i < t.rank(); ++i) {
      auto [it, inserted] = seen.try_emplace(t.labels()[i], 0, t.dims()[i]);
      if (++it->second.first > 2) {
        throw std::invalid_argument("contract_network: label '" + t.labels()[i] +
                                    "' appears more than twice");
      }
      if (it->second.second != t.dims()[i]) {
        throw std::invalid_argument("contract_network: dimension mismatch on label '" +
                                    t.labels()[i] + "'");
      }
    }
  }
}

std::vector<Label> open_labels(const std::vector<DenseTensor>& tensors) {
  std::map<Label, int> count;
  for (const auto& t : tensors)
    for (const auto& l : t.labels()) ++count[l];
  std::vector<Label> out;
  for (const auto& t : tensors)
    for (const auto& l : t.labels())
      if (count[l] == 1) out.push_back(l);
  return out;
}

}  // namespace

ContractionOrder greedy_order(const std::vector<DenseTensor>& tensors) {
  validate_network(tensors);
  std::vector<std::pair<std::size_t, Shape>> active;
  for (std::size_t i = 0; i < tensors.size(); ++i) active.emplace_back(i, shape_of(tensors[i]));
  std::size_t next_id = tensors.size();
  ContractionOrder order;
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    bool best_connected = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const bool connected = shares_label(active[i].second, active[j].second);
        if (best_connected && !connected) continue;
        const double size = volume(merged(active[i].second, active[j].second));
        if ((connected && !best_connected) || size < best) {
          best = size;
          bi = i;
          bj = j;
          best_connected = connected;
        }
      }
    }
    order.emplace_back(active[bi].first, active[bj].first);
    Shape s = merged(active[bi].second, active[bj].second);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.emplace_back(next_id++, std::move(s));
  }
  return order;
}

double order_cost(const std::vector<DenseTensor>& tensors, const ContractionOrder& order) {
  std::map<std::size_t, Shape> live;
  for (std::size_t i = 0; i < tensors.size(); ++i) live[i] = shape_of(tensors[i]);
  std::size_t next_id = tensors.size();
  double cost = 0.0;
  for (const auto& [x, y] : order) {
    auto ix = live.find(x), iy = live.find(y);
    if (ix == live.end() || iy == live.end() || x == y) {
      throw std::invalid_argument("contraction order refers to an unavailable tensor");
    }
    cost += step_cost(ix->second, iy->second);
    Shape s = merged(ix->second, iy->second);
    live.erase(x);
    live.erase(y);
    live[next_id++] = std::move(s);
  }
  return cost;
}

ContractionOrder optimal_order(const std::vector<DenseTensor>& tensors) {
  validate_network(tensors);
  if (tensors.size() > 6) {
    throw std::invalid_argument("optimal_order: exhaustive search is limited to six tensors");
  }
  std::vector<std::pair<std::size_t, Shape>> active;
  for (std::size_t i = 0; i < tensors.size(); ++i) active.emplace_back(i, shape_of(tensors[i]));

  ContractionOrder best_order, current;
  double best_cost = std::numeric_limits<double>::infinity();
  std::function<void(std::vector<std::pair<std::size_t, Shape>>&, std::size_t, double)> search =
      [&](std::vector<std::pair<std::size_t, Shape>>& live, std::size_t next_id, double cost) {
        if (cost >= best_cost) return;
        if (live.size() == 1) {
          best_cost = cost;
          best_order = current;
          return;
        }
        for (std::size_t i = 0; i < live.size(); ++i) {
          for (std::size_t j = i + 1; j < live.size(); ++j) {
            auto next = live;
            const double c = step_cost(live[i].second, live[j].second);
            Shape s = merged(live[i].second, live[j].second);
            current.emplace_back(live[i].first, live[j].first);
            next.erase(next.begin() + static_cast<std::ptrdiff_t>(j));
            next.erase(next.begin() + static_cast<std::ptrdiff_t>(i));
            next.emplace_back(next_id, std::move(s));
            search(next, next_id + 1, cost + c);
            current.pop_back();
          }
        }
      };
  search(active, tensors.size(), 0.0);
  return best_order;
}

DenseTensor contract_network(const std::vector<DenseTensor>& tensors,
                             const std::optional<ContractionOrder>& order) {
  validate_network(tensors);
  const auto plan = order ? *order : greedy_order(tensors);
  if (plan.size() + 1 != tensors.size()) {
    throw std::invalid_argument("contract_network: order must have exactly n-1 steps");
  }
  std::map<std::size_t, DenseTensor> live;
  for (std::size_t i = 0; i < tensors.size(); ++i) live.emplace(i, tensors[i]);
  std::size_t next_id = tensors.size();
  for (const auto& [x, y] : plan) {
    auto ix = live.find(x), iy = live.find(y);
    if (ix == live.end() || iy == live.end() || x == y) {
      throw std::invalid_argument("contract_network: order refers to an unavailable tensor");
    }
    DenseTensor r = contract_shared(ix->second, iy->second);
    live.erase(x);
    live.erase(y);
    live.emplace(next_id++, std::move(r));
  }
  return live.begin()->second.permuted(open_labels(tensors));
}

}  // namespace tnet
