#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ilgov {

// One runtime configuration: active core counts per cluster and cluster frequencies (MHz).
struct Configuration {
  int n_big = 1;
  int n_little = 1;
  int f_big = 600;
  int f_little = 600;

  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

enum class Knob : int { n_big = 0, n_little = 1, f_big = 2, f_little = 3 };

inline constexpr std::array<Knob, 4> kKnobs{Knob::n_big, Knob::n_little, Knob::f_big,
                                            Knob::f_little};

std::string_view knob_name(Knob k);
int knob_value(const Configuration& c, Knob k);

// "nB,nL,fB,fL"
std::string to_string(const Configuration& c);
Configuration parse_configuration(std::string_view text);

// Discrete grid of configurations. Index order is row-major over
// (n_big, n_little, f_big, f_little). Immutable after construction.
class ConfigSpace {
 public:
  using Levels = std::array<std::vector<int>, 4>;

  // Default platform: 1..4 cores per cluster, big 600..2000 MHz, little 600..1400 MHz.
  ConfigSpace();
  explicit ConfigSpace(Levels levels);

  std::size_t size() const noexcept { return size_; }
  const std::vector<int>& levels(Knob k) const { return levels_[static_cast<int>(k)]; }
  int level_count(Knob k) const { return static_cast<int>(levels(k).size()); }

  bool contains(const Configuration& c) const noexcept;
  std::size_t index_of(const Configuration& c) const;
  Configuration at(std::size_t index) const;
  std::vector<Configuration> enumerate() const;

  // Configurations one level away in exactly one knob, in index order.
  const std::vector<std::size_t>& neighbors(std::size_t index) const;
  std::vector<Configuration> neighbors(const Configuration& c) const;

  int knob_level_index(const Configuration& c, Knob k) const;
  std::array<int, 4> level_indices(const Configuration& c) const;
  Configuration from_level_indices(const std::array<int, 4>& idx) const;

  Configuration min_config() const { return at(0); }
  Configuration max_config() const { return at(size_ - 1); }

 private:
  Levels levels_;
  std::array<std::size_t, 4> stride_{};
  std::size_t size_ = 0;
  std::vector<std::vector<std::size_t>> neighbors_;
};

}  // namespace ilgov
