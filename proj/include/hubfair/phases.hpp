#pragma once

// Pandemic phase tables: date-range lookup and valley-based detection from a
// national weekly case curve.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hubfair/dates.hpp"
#include "hubfair/error.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

struct PhaseRange {
  int id = 0;
  Date start;  // inclusive
  Date end;    // exclusive
};

class PhaseConfig {
 public:
  PhaseConfig() = default;

  explicit PhaseConfig(std::vector<PhaseRange> ranges) : ranges_(std::move(ranges)) {
    validate();
  }

  // The seven ranges from the published phase timeline (June 3, 2020 to
  // October 20, 2022). Shared endpoints belong to the later phase.
  static PhaseConfig standard() {
    return PhaseConfig({
        {0, make_date(2020, 6, 3), make_date(2020, 9, 9)},
        {1, make_date(2020, 9, 9), make_date(2021, 3, 17)},
        {2, make_date(2021, 3, 17), make_date(2021, 6, 23)},
        {3, make_date(2021, 6, 23), make_date(2021, 11, 3)},
        {4, make_date(2021, 11, 3), make_date(2022, 3, 30)},
        {5, make_date(2022, 3, 30), make_date(2022, 6, 22)},
        {6, make_date(2022, 6, 22), make_date(2022, 10, 20)},
    });
  }

  const std::vector<PhaseRange>& ranges() const noexcept { return ranges_; }
  std::size_t size() const noexcept { return ranges_.size(); }
  Date span_start() const { return ranges_.front().start; }
  Date span_end() const { return ranges_.back().end; }

  bool contains(Date d) const {
    return !ranges_.empty() && d >= span_start() && d < span_end();
  }

  int assign(Date d) const {
    if (!contains(d)) {
      throw InputError("date " + format_date(d) + " is outside the configured phase span [" +
                       (ranges_.empty() ? std::string("empty")
                                        : format_date(span_start()) + ", " +
                                              format_date(span_end())) +
                       ")");
    }
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), d,
                               [](Date v, const PhaseRange& r) { return v < r.start; });
    return std::prev(it)->id;
  }

 private:
  void validate() const {
    if (ranges_.empty()) throw InputError("phase config has no ranges");
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
      const auto& r = ranges_[i];
      if (r.id != static_cast<int>(i)) {
        throw InputError("phase ids must be 0.." + std::to_string(ranges_.size() - 1) +
                         " in order; found " + std::to_string(r.id) + " at position " +
                         std::to_string(i));
      }
      if (!(r.start < r.end)) {
        throw InputError("phase " + std::to_string(r.id) + " has start >= end");
      }
      if (i > 0 && ranges_[i - 1].end != r.start) {
        throw InputError("phase " + std::to_string(r.id) +
                         " does not start where the previous phase ends");
      }
    }
  }

  std::vector<PhaseRange> ranges_;
};

inline int assign_phase(Date week_end, const PhaseConfig& config) {
  return config.assign(week_end);
}

// Table file: phase,start,end with ISO dates; end exclusive.
inline PhaseConfig read_phase_config(std::istream& in, const std::string& source = "phases") {
  text::CsvReader csv(in, source);
  if (csv.empty_file()) throw InputError(source + ": empty phase table");
  const auto c_phase = csv.column("phase");
  const auto c_start = csv.column("start");
  const auto c_end = csv.column("end");
  std::vector<PhaseRange> ranges;
  std::vector<std::string> f;
  while (csv.next(f)) {
    const auto where = source + ":" + std::to_string(csv.line_number());
    if (f.size() != csv.width()) throw InputError(where + ": wrong field count");
    auto id = text::parse_int(f[c_phase]);
    auto start = parse_date(f[c_start]);
    auto end = parse_date(f[c_end]);
    if (!id || !start || !end) throw InputError(where + ": malformed phase row");
    ranges.push_back({static_cast<int>(*id), *start, *end});
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const PhaseRange& a, const PhaseRange& b) { return a.id < b.id; });
  return PhaseConfig(std::move(ranges));
}

inline PhaseConfig read_phase_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open phase table: " + path);
  return read_phase_config(in, path);
}

inline void write_phase_config(std::ostream& out, const PhaseConfig& config) {
  out << "phase,start,end\n";
  for (const auto& r : config.ranges()) {
    out << r.id << ',' << format_date(r.start) << ',' << format_date(r.end) << '\n';
  }
}

struct WeeklyCount {
  Date week_end;
  double cases = 0.0;
};

// Centered moving average; the window shrinks at the series edges.
inline std::vector<double> centered_moving_average(std::span<const double> xs, std::size_t window) {
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
  std::vector<double> out(xs.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double sum = 0.0;
    for (auto j = lo; j <= hi; ++j) sum += xs[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct Valley {
  std::size_t index = 0;
  double prominence = 0.0;
};

// Interior local minima of `s` with their prominence: the smaller of the two
// highest points reached before the curve drops below the valley again on
// each side, minus the valley level. Plateaus report their first index.
inline std::vector<Valley> find_valleys(std::span<const double> s) {
  std::vector<Valley> out;
  const std::size_t n = s.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s[i] < s[i - 1])) continue;
    std::size_t j = i + 1;
    while (j < n && s[j] == s[i]) ++j;
    if (j == n || s[j] < s[i]) continue;

    double left_peak = s[i];
    for (std::size_t k = i; k-- > 0;) {
      if (s[k] < s[i]) break;
      left_peak = std::max(left_peak, s[k]);
    }
    double right_peak = s[i];
    for (std::size_t k = j; k < n; ++k) {
      if (s[k] < s[i]) break;
      right_peak = std::max(right_peak, s[k]);
    }
    out.push_back({i, std::min(left_peak, right_peak) - s[i]});
  }
  return out;
}

// Splits a weekly national series into `n_phases` contiguous phases at the
// deepest valleys of its 5-week centered moving average. A valley week opens
// the next phase.
inline PhaseConfig detect_phases(std::span<const WeeklyCount> series, int n_phases) {
  if (n_phases < 2) throw InputError("detect_phases needs n_phases >= 2");
  if (series.size() < 2 * static_cast<std::size_t>(n_phases)) {
    throw InputError("detect_phases needs at least " + std::to_string(2 * n_phases) +
                     " weeks, got " + std::to_string(series.size()));
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (!(series[i - 1].week_end < series[i].week_end)) {
      throw InputError("detect_phases needs strictly increasing week_end dates");
    }
  }
  std::vector<double> cases;
  cases.reserve(series.size());
  for (const auto& w : series) cases.push_back(w.cases);
  const auto smooth = centered_moving_average(cases, 5);
  auto valleys = find_valleys(smooth);
  const auto needed = static_cast<std::size_t>(n_phases - 1);
  if (valleys.size() < needed) {
    throw InputError("found " + std::to_string(valleys.size()) + " valleys but " +
                     std::to_string(needed) +
                     " are needed; supply an explicit phase table instead");
  }
  std::stable_sort(valleys.begin(), valleys.end(), [](const Valley& a, const Valley& b) {
    return a.prominence > b.prominence;
  });
  valleys.resize(needed);
  std::sort(valleys.begin(), valleys.end(),
            [](const Valley& a, const Valley& b) { return a.index < b.index; });

  std::vector<PhaseRange> ranges;
  Date start = series.front().week_end;
  for (std::size_t k = 0; k < valleys.size(); ++k) {
    const Date boundary = series[valleys[k].index].week_end;
    ranges.push_back({static_cast<int>(k), start, boundary});
    start = boundary;
  }
  ranges.push_back({n_phases - 1, start, series.back().week_end + std::chrono::days{1}});
  return PhaseConfig(std::move(ranges));
}

}  // namespace hubfair
