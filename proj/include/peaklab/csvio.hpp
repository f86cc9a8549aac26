#pragma once

#include <string>

#include "peaklab/estimate.hpp"

namespace peaklab {

// moments.csv: header "t,x,nu,value,se,n_paths,source", rows t-major, values
// printed with 17 significant digits so re-reading round-trips bit-exactly.
void write_moments_csv(const MomentField& field, const std::string& path);
MomentField read_moments_csv(const std::string& path);

// growth_index.csv: header "alpha,slope,slope_se,classification".
void write_growth_csv(const GrowthIndexReport& report, const std::string& path);

std::string moments_csv_string(const MomentField& field);
std::string growth_csv_string(const GrowthIndexReport& report);

} // namespace peaklab
