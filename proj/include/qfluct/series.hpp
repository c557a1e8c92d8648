#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qfluct/hilbert.hpp"

namespace qfluct {

/// Time grid plus ordered named columns of equal length.
class ResultSeries {
 public:
  ResultSeries() = default;
  explicit ResultSeries(std::vector<double> times) : times_(std::move(times)) {}

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }

  /// Replaces an existing column of the same name. Throws on length mismatch.
  void set(const std::string& name, std::vector<double> values) {
    if (values.size() != times_.size()) {
      throw Error("ResultSeries: column '" + name + "' has " + std::to_string(values.size()) + " rows, grid has " +
                  std::to_string(times_.size()));
    }
    for (auto& c : columns_) {
      if (c.first == name) {
        c.second = std::move(values);
        return;
      }
    }
    columns_.emplace_back(name, std::move(values));
  }

  bool has(const std::string& name) const {
    for (const auto& c : columns_) {
      if (c.first == name) return true;
    }
    return false;
  }

  const std::vector<double>& column(const std::string& name) const {
    for (const auto& c : columns_) {
      if (c.first == name) return c.second;
    }
    throw Error("ResultSeries: no column '" + name + "'");
  }

  const std::vector<std::pair<std::string, std::vector<double>>>& columns() const { return columns_; }

  std::map<std::string, std::string> metadata;

 private:
  std::vector<double> times_;
  std::vector<std::pair<std::string, std::vector<double>>> columns_;
};

}  // namespace qfluct
