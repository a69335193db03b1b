#include "mlo/trace.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace mlo {

void write_station_csv(std::ostream& out, const SimStats& s) {
  out << "kind,index,link,attempts,successes,collisions,restarts,waits_broken,successes_to_sld,successes_to_mld\n";
  if (s.grid_slots == 0) return;
  for (const auto& st : s.stations) {
    const auto& c = st.c;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", to_string(st.kind), st.index, st.link, c.attempts,
               c.successes, c.collisions, c.restarts, c.waits_broken, c.successes_to_sld, c.successes_to_mld);
  }
}

void write_link_csv(std::ostream& out, const SimStats& s) {
  out << "link,idle_slots,busy_slots,horizon_slots,idle_ns,busy_ns,elapsed_ns\n";
  if (s.grid_slots == 0) return;
  for (int l = 0; l < 2; ++l) {
    const auto& k = s.links[l];
    fmt::print(out, "{},{},{},{},{},{},{}\n", l, k.idle_slots, k.busy_slots, k.horizon_slots, k.idle_ns, k.busy_ns,
               k.elapsed_ns());
  }
}

void write_trace_csv(std::ostream& out, const SimStats& s) {
  out << "slot,link,event,transmitters,duration_ns\n";
  if (s.grid_slots == 0) return;
  for (const auto& r : s.trace)
    fmt::print(out, "{},{},{},{},{}\n", r.slot, r.link, r.event, r.transmitters, r.duration_ns);
}

namespace {

void write_file(const std::filesystem::path& p, void (*fn)(std::ostream&, const SimStats&), const SimStats& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  fn(out, s);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

} // namespace

void trace_export(const SimStats& s, const std::string& path) {
  const std::filesystem::path p(path);
  std::filesystem::path stem = p;
  stem.replace_extension();
  write_file(p, write_station_csv, s);
  write_file(stem.string() + ".links.csv", write_link_csv, s);
  write_file(stem.string() + ".trace.csv", write_trace_csv, s);
}

} // namespace mlo
