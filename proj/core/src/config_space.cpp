#include "ilgov/config_space.hpp"

#include <algorithm>
#include <charconv>

#include "ilgov/errors.hpp"

namespace ilgov {

namespace {

ConfigSpace::Levels default_levels() {
  ConfigSpace::Levels l;
  l[0] = {1, 2, 3, 4};
  l[1] = {1, 2, 3, 4};
  for (int f = 600; f <= 2000; f += 200) l[2].push_back(f);
  for (int f = 600; f <= 1400; f += 200) l[3].push_back(f);
  return l;
}

int find_level(const std::vector<int>& levels, int value) {
  auto it = std::lower_bound(levels.begin(), levels.end(), value);
  if (it == levels.end() || *it != value) return -1;
  return static_cast<int>(it - levels.begin());
}

}  // namespace

std::string_view knob_name(Knob k) {
  switch (k) {
    case Knob::n_big: return "n_big";
    case Knob::n_little: return "n_little";
    case Knob::f_big: return "f_big";
    case Knob::f_little: return "f_little";
  }
  return "?";
}

int knob_value(const Configuration& c, Knob k) {
  switch (k) {
    case Knob::n_big: return c.n_big;
    case Knob::n_little: return c.n_little;
    case Knob::f_big: return c.f_big;
    case Knob::f_little: return c.f_little;
  }
  return 0;
}

std::string to_string(const Configuration& c) {
  return std::to_string(c.n_big) + "," + std::to_string(c.n_little) + "," +
         std::to_string(c.f_big) + "," + std::to_string(c.f_little);
}

Configuration parse_configuration(std::string_view text) {
  std::array<int, 4> v{};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    std::size_t end = text.find(',', pos);
    if ((i < 3) != (end != std::string_view::npos))
      throw ParseError("configuration needs four comma-separated fields: '" +
                           std::string(text) + "'",
                       0);
    auto field = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v[i]);
    if (ec != std::errc{} || p != field.data() + field.size())
      throw ParseError("bad configuration field '" + std::string(field) + "'", 0);
    pos = end + 1;
  }
  return {v[0], v[1], v[2], v[3]};
}

ConfigSpace::ConfigSpace() : ConfigSpace(default_levels()) {}

ConfigSpace::ConfigSpace(Levels levels) : levels_(std::move(levels)) {
  for (const auto& l : levels_) {
    if (l.empty()) throw DomainError("every knob needs at least one level");
    if (!std::is_sorted(l.begin(), l.end()) ||
        std::adjacent_find(l.begin(), l.end()) != l.end())
      throw DomainError("knob levels must be strictly increasing");
  }
  if (levels_[0].front() < 1 || levels_[1].front() < 1)
    throw DomainError("core counts start at 1");

  stride_[3] = 1;
  for (int k = 2; k >= 0; --k) stride_[k] = stride_[k + 1] * levels_[k + 1].size();
  size_ = stride_[0] * levels_[0].size();

  neighbors_.resize(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    auto& out = neighbors_[i];
    for (int k = 0; k < 4; ++k) {
      const int level = static_cast<int>((i / stride_[k]) % levels_[k].size());
      if (level > 0) out.push_back(i - stride_[k]);
      if (level + 1 < static_cast<int>(levels_[k].size())) out.push_back(i + stride_[k]);
    }
    std::sort(out.begin(), out.end());
  }
}

bool ConfigSpace::contains(const Configuration& c) const noexcept {
  for (Knob k : kKnobs)
    if (find_level(levels(k), knob_value(c, k)) < 0) return false;
  return true;
}

std::size_t ConfigSpace::index_of(const Configuration& c) const {
  auto idx = level_indices(c);
  std::size_t out = 0;
  for (int k = 0; k < 4; ++k) out += static_cast<std::size_t>(idx[k]) * stride_[k];
  return out;
}

Configuration ConfigSpace::at(std::size_t index) const {
  if (index >= size_) throw DomainError("configuration index out of range");
  std::array<int, 4> idx{};
  for (int k = 0; k < 4; ++k) idx[k] = static_cast<int>((index / stride_[k]) % levels_[k].size());
  return from_level_indices(idx);
}

std::vector<Configuration> ConfigSpace::enumerate() const {
  std::vector<Configuration> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(at(i));
  return out;
}

const std::vector<std::size_t>& ConfigSpace::neighbors(std::size_t index) const {
  if (index >= size_) throw DomainError("configuration index out of range");
  return neighbors_[index];
}

std::vector<Configuration> ConfigSpace::neighbors(const Configuration& c) const {
  std::vector<Configuration> out;
  for (std::size_t j : neighbors(index_of(c))) out.push_back(at(j));
  return out;
}

int ConfigSpace::knob_level_index(const Configuration& c, Knob k) const {
  int level = find_level(levels(k), knob_value(c, k));
  if (level < 0)
    throw DomainError("value " + std::to_string(knob_value(c, k)) + " is not a level of " +
                      std::string(knob_name(k)));
  return level;
}

std::array<int, 4> ConfigSpace::level_indices(const Configuration& c) const {
  std::array<int, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = knob_level_index(c, kKnobs[k]);
  return out;
}

Configuration ConfigSpace::from_level_indices(const std::array<int, 4>& idx) const {
  for (int k = 0; k < 4; ++k)
    if (idx[k] < 0 || idx[k] >= static_cast<int>(levels_[k].size()))
      throw DomainError("level index out of range for " + std::string(knob_name(kKnobs[k])));
  return {levels_[0][idx[0]], levels_[1][idx[1]], levels_[2][idx[2]], levels_[3][idx[3]]};
}

}  // namespace ilgov
