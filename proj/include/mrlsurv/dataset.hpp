#pragma once

// Right-censored survival data: typed observations, sorted samples and CSV
// ingestion (`time,status[,group]`).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mrlsurv/detail/text.hpp"
#include "mrlsurv/error.hpp"

namespace mrlsurv {

inline constexpr std::string_view kDefaultGroup = "all";

struct Observation {
  double time = 0.0;  // observed time, min(true event time, censoring time)
  bool event = false; // true: event observed, false: right-censored
  std::string group{kDefaultGroup};

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Ordering used throughout: ascending time, and at equal times an event sorts
// before a censoring.
inline bool observation_before(const Observation& a, const Observation& b) {
  if (a.time != b.time) return a.time < b.time;
  return a.event && !b.event;
}

inline void validate_observation(const Observation& obs) {
  if (!std::isfinite(obs.time) || obs.time < 0.0) {
    throw DomainError("observation time must be finite and non-negative");
  }
  if (obs.group.empty()) throw DomainError("observation group must be non-empty");
}

// Non-empty, time-sorted collection of observations.
class SurvivalSample {
 public:
  explicit SurvivalSample(std::vector<Observation> observations)
      : observations_(std::move(observations)) {
    if (observations_.empty()) throw DomainError("survival sample must be non-empty");
    for (const auto& obs : observations_) validate_observation(obs);
    std::stable_sort(observations_.begin(), observations_.end(), observation_before);
  }

  // Convenience for numeric work: parallel time / event arrays, single group.
  SurvivalSample(std::span<const double> times, std::span<const int> events,
                 std::string group = std::string(kDefaultGroup))
      : SurvivalSample(zip(times, events, group)) {}

  std::span<const Observation> observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }
  double max_time() const noexcept { return observations_.back().time; }

  std::size_t event_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        observations_.begin(), observations_.end(), [](const Observation& o) { return o.event; }));
  }

  friend bool operator==(const SurvivalSample&, const SurvivalSample&) = default;

 private:
  static std::vector<Observation> zip(std::span<const double> times, std::span<const int> events,
                                      const std::string& group) {
    if (times.size() != events.size()) {
      throw DomainError("times and events must have the same length");
    }
    std::vector<Observation> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (events[i] != 0 && events[i] != 1) throw DomainError("event flag must be 0 or 1");
      out.push_back({times[i], events[i] == 1, group});
    }
    return out;
  }

  std::vector<Observation> observations_;
};

using GroupedSamples = std::map<std::string, SurvivalSample, std::less<>>;

namespace detail {

struct ColumnLayout {
  std::size_t time = 0;
  std::size_t status = 0;
  std::optional<std::size_t> group;
  std::size_t width = 0;
};

inline ColumnLayout parse_header(const std::vector<std::string>& names) {
  ColumnLayout layout;
  layout.width = names.size();
  std::optional<std::size_t> time, status;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto name = trim(names[i]);
    std::optional<std::size_t>* slot = nullptr;
    if (name == "time") slot = &time;
    else if (name == "status") slot = &status;
    else if (name == "group") slot = &layout.group;
    else throw DataError("schema error: unknown column '" + std::string(name) + "'");
    if (slot->has_value()) {
      throw DataError("schema error: duplicate column '" + std::string(name) + "'");
    }
    *slot = i;
  }
  if (!time) throw DataError("schema error: missing required column 'time'");
  if (!status) throw DataError("schema error: missing required column 'status'");
  layout.time = *time;
  layout.status = *status;
  return layout;
}

inline Observation parse_row(const std::vector<std::string>& fields, const ColumnLayout& layout,
                             std::size_t row) {
  if (fields.size() != layout.width) {
    throw ParseError(row, "expected " + std::to_string(layout.width) + " fields, found " +
                              std::to_string(fields.size()));
  }
  Observation obs;
  const auto time = parse_double(fields[layout.time]);
  if (!time || !std::isfinite(*time)) {
    throw ParseError(row, "time '" + fields[layout.time] + "' is not a finite number");
  }
  if (*time < 0.0) throw ParseError(row, "time must be non-negative");
  obs.time = *time;

  const auto status = trim(fields[layout.status]);
  if (status == "1") obs.event = true;
  else if (status == "0") obs.event = false;
  else throw ParseError(row, "status '" + std::string(status) + "' is not 0 or 1");

  if (layout.group) {
    const auto group = trim(fields[*layout.group]);
    if (group.empty()) throw ParseError(row, "group label is empty");
    obs.group = std::string(group);
  }
  return obs;
}

}  // namespace detail

// Reads `time,status[,group]` CSV. Rows are numbered from 1 (first data row);
// blank lines are skipped and do not count.
inline GroupedSamples load_dataset(std::istream& in) {
  std::string line;
  std::optional<detail::ColumnLayout> layout;
  std::map<std::string, std::vector<Observation>, std::less<>> rows_by_group;
  std::size_t row = 0;
  bool first_line = true;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (first_line && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    first_line = false;
    if (detail::trim(view).empty()) continue;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);

    auto fields = detail::split_csv_line(view);
    if (!layout) {
      if (!fields) throw DataError("schema error: malformed header");
      layout = detail::parse_header(*fields);
      continue;
    }
    ++row;
    if (!fields) throw ParseError(row, "unterminated quoted field");
    auto obs = detail::parse_row(*fields, *layout, row);
    rows_by_group[obs.group].push_back(std::move(obs));
  }
  if (row == 0) throw DataError("empty dataset");

  GroupedSamples samples;
  for (auto& [group, obs] : rows_by_group) {
    samples.emplace(group, SurvivalSample(std::move(obs)));
  }
  return samples;
}

inline GroupedSamples load_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_dataset(in);
}

inline GroupedSamples load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return load_dataset(in);
}

// Writes samples back in the ingestion format with round-trippable times.
inline std::string to_csv(const GroupedSamples& samples) {
  std::string out = "time,status,group\n";
  for (const auto& [group, sample] : samples) {
    for (const auto& obs : sample.observations()) {
      out += detail::format_exact(obs.time);
      out += obs.event ? ",1," : ",0,";
      out += detail::quote_csv_field(obs.group);
      out += '\n';
    }
  }
  return out;
}

}  // namespace mrlsurv
