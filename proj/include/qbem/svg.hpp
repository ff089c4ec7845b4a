// svg.hpp — minimal static line charts
#pragma once

#include <string>
#include <vector>

namespace qbem {

struct Series {
    std::string name;
    std::vector<double> y;
};

void write_line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::vector<double>& x, const std::vector<Series>& series);

}  // namespace qbem
