#include "gridtwin/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridtwin/errors.hpp"

namespace gridtwin {

Table1D::Table1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2)
        throw ConfigError("table needs at least two (x, y) pairs of equal length");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw ConfigError("table abscissae must be strictly increasing");
    const double step = (x_.back() - x_.front()) / static_cast<double>(x_.size() - 1);
    uniform_ = true;
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (std::abs((x_[i] - x_[i - 1]) - step) > 1e-9 * step) uniform_ = false;
    inv_step_ = 1.0 / step;
}

std::size_t Table1D::segment(double x) const {
    const std::size_t last = x_.size() - 2;
    if (uniform_) {
        double f = (x - x_.front()) * inv_step_;
        std::size_t i = f <= 0.0 ? 0 : std::min(static_cast<std::size_t>(f), last);
        // index arithmetic may land one segment off at knots
        if (i > 0 && x < x_[i]) --i;
        else if (i < last && x >= x_[i + 1]) ++i;
        return i;
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, last);
}

double Table1D::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    if (x == x_[i]) return y_[i];
    const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return y_[i] + w * (y_[i + 1] - y_[i]);
}

double Table1D::slope(double x) const {
    const std::size_t i = segment(std::clamp(x, x_.front(), x_.back()));
    return (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
}

Table1D load_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table file: " + path.string());
    std::vector<double> x, y;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
        try {
            std::size_t used = 0;
            double a = std::stod(line.substr(0, comma), &used);
            double b = std::stod(line.substr(comma + 1));
            x.push_back(a);
            y.push_back(b);
        } catch (const std::invalid_argument&) {
            if (header_seen || !x.empty())
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number");
            header_seen = true;
        }
    }
    try {
        return Table1D(std::move(x), std::move(y));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace gridtwin
