#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gridtwin {

// Piecewise-linear table. Abscissae strictly increasing; evaluation clamps
// to the end values outside the tabulated range.
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double slope(double x) const;
    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    bool uniform_ = false;
    double inv_step_ = 0.0;
};

// Reads a two-column CSV. Lines starting with '#' and one non-numeric header
// line are skipped.
Table1D load_table_csv(const std::filesystem::path& path);

} // namespace gridtwin
