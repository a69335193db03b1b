#pragma once

#include "mlo/sim.hpp"

#include <iosfwd>
#include <string>

namespace mlo {

/// Per-station counters, one row per station and link.
void write_station_csv(std::ostream& out, const SimStats& s);
/// Per-link time accounting.
void write_link_csv(std::ostream& out, const SimStats& s);
/// The bounded per-slot trace sample.
void write_trace_csv(std::ostream& out, const SimStats& s);

/// Writes `path` (station counters) plus sibling files `<stem>.links.csv` and
/// `<stem>.trace.csv`. A run that covered zero slots produces header-only
/// files. Throws std::runtime_error on I/O failure.
void trace_export(const SimStats& s, const std::string& path);

} // namespace mlo
