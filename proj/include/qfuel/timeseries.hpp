#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfuel {

// Named real-valued channels sampled on a shared time grid. Channel order is
// insertion order, which is also the CSV column order.
class TimeSeries {
  public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> times) : times_(std::move(times)) {}

    void add_channel(std::string name, std::vector<double> values);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& channel(std::string_view name) const;
    bool has_channel(std::string_view name) const;
    const std::vector<std::pair<std::string, std::vector<double>>>& channels() const { return channels_; }
    std::size_t size() const { return times_.size(); }

  private:
    std::vector<double> times_;
    std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

}  // namespace qfuel
