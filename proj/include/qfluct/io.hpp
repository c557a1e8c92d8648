#pragma once

// Locale-independent CSV output. Every file starts with a "# config_hash=<hex>" line.

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qfluct/dynamics.hpp"
#include "qfluct/series.hpp"
#include "qfluct/trajectories.hpp"

namespace qfluct {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

void write_series_csv(std::ostream& os, const ResultSeries& series, const std::string& config_hash);
/// Columns t, re_jk, im_jk (row-major), Q_D_<bath>, S_vn.
void write_state_csv(std::ostream& os, const StateSeries& series, const std::vector<std::string>& bath_labels,
                     const std::string& config_hash);
/// Columns traj_id, t_jump, channel, bath, omega, ds.
void write_events_csv(std::ostream& os, const std::vector<std::pair<std::uint64_t, JumpEvent>>& events,
                      const std::vector<std::string>& bath_labels, const std::string& config_hash);

}  // namespace qfluct
