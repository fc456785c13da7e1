#pragma once

#include <vector>

namespace rqshot {

double mean(const std::vector<double> &xs);
/// Middle value; average of the two middle values for even sizes.
double median(std::vector<double> xs);
/// Linear interpolation between closest ranks: position q * (n - 1).
double quantile(std::vector<double> xs, double q);

} // namespace rqshot
