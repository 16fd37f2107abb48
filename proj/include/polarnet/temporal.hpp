#pragma once

// Sliding-window time series of a layer metric.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

struct WindowSpec {
    std::int32_t width_days = 60;
    std::int32_t step_days = 1;

    void validate() const {
        if (!(step_days >= 1 && width_days >= step_days))
            throw ValidationError("window spec needs width >= step >= 1 days");
    }
};

struct WindowRecord {
    Date window_start;
    std::optional<double> value;  ///< nullopt when the metric is undefined on the slice
    std::size_t links_in_window = 0;
};

struct WindowedSeries {
    WindowSpec spec;
    std::vector<WindowRecord> records;
};

/// Links with start <= t < start + width. Untimestamped links raise a
/// ValidationError unless `skip_untimestamped` is set.
inline Layer window_slice(const Layer& layer, Date start, std::int32_t width_days, bool skip_untimestamped = false) {
    if (width_days < 1) throw ValidationError("window width must be at least one day");
    Layer out{layer.name, layer.weighted, {}};
    const Date end = start + width_days;
    for (const auto& l : layer.links) {
        if (!l.timestamp) {
            if (skip_untimestamped) continue;
            throw ValidationError("layer '" + layer.name + "' has a link without timestamp");
        }
        if (*l.timestamp >= start && *l.timestamp < end) out.links.push_back(l);
    }
    return out;
}

/// Number of windows between the first and last timestamp.
inline std::size_t window_count(Date first, Date last, const WindowSpec& spec) {
    if (last < first) return 0;
    return static_cast<std::size_t>((last - first) / spec.step_days) + 1;
}

using LayerMetric = std::function<double(const Layer&, const Partition&)>;

/// Evaluates `metric` on every window [first + k*step, first + k*step + width)
/// from the first link's date while the window start does not pass the last
/// link's date. Undefined windows keep value == nullopt.
inline WindowedSeries sweep(const Layer& layer, const Partition& partition, const LayerMetric& metric,
                            const WindowSpec& spec = {}, bool skip_untimestamped = false) {
    spec.validate();
    std::vector<const LayerLink*> dated;
    dated.reserve(layer.links.size());
    for (const auto& l : layer.links) {
        if (l.timestamp) dated.push_back(&l);
        else if (!skip_untimestamped)
            throw ValidationError("layer '" + layer.name + "' has a link without timestamp");
    }
    if (dated.empty()) throw ValidationError("layer '" + layer.name + "' has no timestamped links");
    std::stable_sort(dated.begin(), dated.end(),
                     [](const LayerLink* a, const LayerLink* b) { return *a->timestamp < *b->timestamp; });
    const Date first = *dated.front()->timestamp;
    const Date last = *dated.back()->timestamp;

    WindowedSeries series{spec, {}};
    const std::size_t count = window_count(first, last, spec);
    series.records.reserve(count);
    auto lo = dated.begin();
    auto hi = dated.begin();
    Layer slice{layer.name, layer.weighted, {}};
    for (std::size_t k = 0; k < count; ++k) {
        const Date start = first + static_cast<std::int32_t>(k) * spec.step_days;
        const Date end = start + spec.width_days;
        while (lo != dated.end() && *(*lo)->timestamp < start) ++lo;
        if (hi < lo) hi = lo;
        while (hi != dated.end() && *(*hi)->timestamp < end) ++hi;
        slice.links.clear();
        for (auto it = lo; it != hi; ++it) slice.links.push_back(**it);
        WindowRecord rec{start, std::nullopt, slice.links.size()};
        try {
            rec.value = metric(slice, partition);
        } catch (const UndefinedMetricError&) {
        }
        series.records.push_back(rec);
    }
    return series;
}

struct SeriesEvent {
    Date date;
    std::string label;
    bool in_span = true;
};

struct AnnotatedSeries {
    WindowedSeries series;
    std::vector<SeriesEvent> events;

    /// Labels of events whose date falls inside [start, start + width).
    std::vector<std::string> annotations_for(const WindowRecord& rec) const {
        std::vector<std::string> out;
        for (const auto& e : events)
            if (e.date >= rec.window_start && e.date < rec.window_start + series.spec.width_days) out.push_back(e.label);
        return out;
    }
};

/// Attaches dated events; events outside the covered span are kept and flagged.
inline AnnotatedSeries event_annotation(WindowedSeries series, const std::vector<std::pair<Date, std::string>>& events) {
    AnnotatedSeries out{std::move(series), {}};
    const auto& recs = out.series.records;
    for (const auto& [date, label] : events) {
        bool inside = false;
        if (!recs.empty())
            inside = date >= recs.front().window_start && date < recs.back().window_start + out.series.spec.width_days;
        out.events.push_back({date, label, inside});
    }
    return out;
}

}  // namespace polarnet
