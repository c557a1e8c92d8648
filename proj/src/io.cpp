#include "qfluct/io.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace qfluct {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return s;
}

void write_series_csv(std::ostream& os, const ResultSeries& series, const std::string& config_hash) {
  os << "# config_hash=" << config_hash << '\n';
  os << 't';
  for (const auto& c : series.columns()) os << ',' << c.first;
  os << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << format_double(series.times()[k]);
    for (const auto& c : series.columns()) os << ',' << format_double(c.second[k]);
    os << '\n';
  }
}

void write_state_csv(std::ostream& os, const StateSeries& series, const std::vector<std::string>& bath_labels,
                     const std::string& config_hash) {
  os << "# config_hash=" << config_hash << '\n';
  const Index d = series.rho.empty() ? 0 : series.rho.front().rows();
  os << 't';
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) os << ",re_" << r << c << ",im_" << r << c;
  }
  for (const auto& b : bath_labels) os << ",Q_D_" << b;
  os << ",S_vn\n";
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    os << format_double(series.times[k]);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) {
        os << ',' << format_double(series.rho[k](r, c).real()) << ',' << format_double(series.rho[k](r, c).imag());
      }
    }
    for (std::size_t a = 0; a < series.heat.size(); ++a) os << ',' << format_double(series.heat[a][k]);
    os << ',' << format_double(von_neumann_entropy(series.rho[k])) << '\n';
  }
}

void write_events_csv(std::ostream& os, const std::vector<std::pair<std::uint64_t, JumpEvent>>& events,
                      const std::vector<std::string>& bath_labels, const std::string& config_hash) {
  os << "# config_hash=" << config_hash << '\n';
  os << "traj_id,t_jump,channel,bath,omega,ds\n";
  for (const auto& [id, e] : events) {
    os << id << ',' << format_double(e.t) << ',' << e.channel << ',' << bath_labels[static_cast<std::size_t>(e.bath)]
       << ',' << format_double(e.omega) << ',' << format_double(e.ds) << '\n';
  }
}

}  // namespace qfluct
