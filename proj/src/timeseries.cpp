#include "qfuel/timeseries.hpp"

#include <algorithm>

#include "qfuel/errors.hpp"

namespace qfuel {

void TimeSeries::add_channel(std::string name, std::vector<double> values) {
    if (values.size() != times_.size()) {
        throw DimensionError("channel '" + name + "' has " + std::to_string(values.size()) +
                             " samples, time grid has " + std::to_string(times_.size()));
    }
    if (has_channel(name)) throw ArgumentError("duplicate channel '" + name + "'");
    channels_.emplace_back(std::move(name), std::move(values));
}

bool TimeSeries::has_channel(std::string_view name) const {
    return std::any_of(channels_.begin(), channels_.end(), [&](const auto& c) { return c.first == name; });
}

const std::vector<double>& TimeSeries::channel(std::string_view name) const {
    for (const auto& c : channels_) {
        if (c.first == name) return c.second;
    }
    throw ArgumentError("no channel named '" + std::string(name) + "'");
}

}  // namespace qfuel
