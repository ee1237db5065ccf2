#include "ilgov/decision_log.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "ilgov/errors.hpp"

namespace ilgov {

namespace {
constexpr const char* kHeader =
    "epoch_id,workload,n_big,n_little,f_big,f_little,power_w,time_s,energy_j,oracle_evals,"
    "model_updates,retrained";

template <class T>
T field(std::string_view s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("bad decision-log field '" + std::string(s) + "'", line);
  return v;
}
}  // namespace

void DecisionLog::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << kHeader << '\n';
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.epoch_id, r.workload,
                      r.config.n_big, r.config.n_little, r.config.f_big, r.config.f_little,
                      r.power, r.time, r.energy, r.oracle_evals, r.model_updates,
                      r.retrained ? 1 : 0);
  if (!os) throw IoError("write failed for " + path.string());
}

DecisionLog DecisionLog::load(const std::filesystem::path& path, std::string controller) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  DecisionLog log;
  log.controller = std::move(controller);
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw ParseError("unexpected decision-log header", 1);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 12) throw ParseError("expected 12 fields", lineno);
    DecisionRow r;
    r.epoch_id = field<std::size_t>(f[0], lineno);
    r.workload = std::string(f[1]);
    r.config = {field<int>(f[2], lineno), field<int>(f[3], lineno), field<int>(f[4], lineno),
                field<int>(f[5], lineno)};
    r.power = field<double>(f[6], lineno);
    r.time = field<double>(f[7], lineno);
    r.energy = field<double>(f[8], lineno);
    r.oracle_evals = field<std::size_t>(f[9], lineno);
    r.model_updates = field<std::size_t>(f[10], lineno);
    r.retrained = field<int>(f[11], lineno) != 0;
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace ilgov
