#include <charconv>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <fmt/os.h>

#include "ilgov/errors.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

const char* const kTraceHeader =
    "epoch_id,n_big,n_little,f_big,f_little,instructions,cycles,branch_miss,l2_miss,dmem_access,"
    "noncache_req,little_util,big_util0,big_util1,big_util2,big_util3,power_w,time_s";

void save_trace(const Workload& w, const std::vector<Configuration>& configs,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kTraceHeader << '\n';
  fmt::memory_buffer buf;
  for (const Epoch& e : w.epochs) {
    for (const Configuration& c : configs) {
      const EpochObservation o = w.plant->execute(e, c);
      const CounterVector& h = o.counters;
      buf.clear();
      fmt::format_to(std::back_inserter(buf),
                     "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", o.epoch_id,
                     c.n_big, c.n_little, c.f_big, c.f_little, h.instructions, h.cycles,
                     h.branch_miss, h.l2_miss, h.dmem_access, h.noncache_req, h.little_util,
                     h.big_util[0], h.big_util[1], h.big_util[2], h.big_util[3], o.power,
                     o.exec_time);
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

template <class T>
T parse_field(std::string_view f, std::size_t line, const char* name) {
  T v{};
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || p != f.data() + f.size())
    throw ParseError(fmt::format("bad value '{}' for {}", f, name), line);
  return v;
}

}  // namespace

Workload load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError("unexpected trace header", 1);

  static const char* names[] = {"epoch_id", "n_big", "n_little", "f_big", "f_little",
                                "instructions", "cycles", "branch_miss", "l2_miss",
                                "dmem_access", "noncache_req", "little_util", "big_util0",
                                "big_util1", "big_util2", "big_util3", "power_w", "time_s"};

  auto plant = std::make_shared<TracePlant>();
  Workload w;
  w.name = path.stem().string();
  std::set<std::size_t> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::vector<std::string_view> f;
    while (true) {
      auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 18)
      throw ParseError(fmt::format("expected 18 fields, found {}", f.size()), lineno);

    EpochObservation o;
    o.epoch_id = parse_field<std::size_t>(f[0], lineno, names[0]);
    o.config = {parse_field<int>(f[1], lineno, names[1]), parse_field<int>(f[2], lineno, names[2]),
                parse_field<int>(f[3], lineno, names[3]), parse_field<int>(f[4], lineno, names[4])};
    double v[13];
    for (int i = 0; i < 13; ++i) v[i] = parse_field<double>(f[5 + i], lineno, names[5 + i]);
    for (int i = 0; i < 13; ++i)
      if (!std::isfinite(v[i]) || v[i] < 0)
        throw ParseError(fmt::format("{} must be finite and non-negative", names[5 + i]), lineno);
    for (int i = 6; i < 11; ++i)
      if (v[i] > 1) throw ParseError(fmt::format("{} exceeds 1", names[5 + i]), lineno);
    if (!(v[11] > 0)) throw ParseError("power_w must be positive", lineno);
    if (!(v[12] > 0)) throw ParseError("time_s must be positive", lineno);
    if (o.config.n_big < 1 || o.config.n_little < 1 || o.config.f_big <= 0 ||
        o.config.f_little <= 0)
      throw ParseError("invalid configuration " + to_string(o.config), lineno);

    CounterVector& h = o.counters;
    h.instructions = v[0];
    h.cycles = v[1];
    h.branch_miss = v[2];
    h.l2_miss = v[3];
    h.dmem_access = v[4];
    h.noncache_req = v[5];
    h.little_util = v[6];
    h.big_util = {v[7], v[8], v[9], v[10]};
    h.power = v[11];
    o.power = v[11];
    o.exec_time = v[12];
    plant->record(o);
    if (seen.insert(o.epoch_id).second) {
      Epoch e;
      e.id = o.epoch_id;
      e.instructions = h.instructions;
      e.noise_key = o.epoch_id;
      w.epochs.push_back(e);
    }
  }
  std::sort(w.epochs.begin(), w.epochs.end(),
            [](const Epoch& a, const Epoch& b) { return a.id < b.id; });
  w.plant = std::move(plant);
  return w;
}

}  // namespace ilgov
