#include "gridtwin/ledger.hpp"

#include <algorithm>
#include <cmath>

namespace gridtwin {

const char* loss_item_name(LossItem i) {
    switch (i) {
    case LossItem::cell_ohmic: return "cell_ohmic";
    case LossItem::contact: return "contact";
    case LossItem::converter_cond: return "converter_cond";
    case LossItem::converter_sw: return "converter_sw";
    case LossItem::converter_passive: return "converter_passive";
    case LossItem::fan: return "fan";
    case LossItem::ac: return "ac";
    case LossItem::balancing: return "balancing";
    case LossItem::count: break;
    }
    return "unknown";
}

double EnergyLedger::total_losses() const {
    double s = 0.0;
    for (double l : losses) s += l;
    return s;
}

double EnergyLedger::closure_residual() const { return grid_in - grid_out - delta_stored - total_losses(); }

double EnergyLedger::closure_error() const {
    const double scale = std::max({grid_in, grid_out, std::abs(delta_stored), total_losses()});
    return scale > 0.0 ? std::abs(closure_residual()) / scale : 0.0;
}

CapacityStats capacity_stats(const std::vector<double>& c) {
    CapacityStats s;
    if (c.empty()) return s;
    s.measured = true;
    double sum = 0.0;
    s.min = c.front();
    s.max = c.front();
    for (double v : c) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(c.size());
    double ss = 0.0;
    for (double v : c) ss += (v - s.mean) * (v - s.mean);
    s.sd = c.size() > 1 ? std::sqrt(ss / static_cast<double>(c.size() - 1)) : 0.0;
    return s;
}

} // namespace gridtwin
