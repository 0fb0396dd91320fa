#ifndef SPLAYNET_REPORT_HPP
#define SPLAYNET_REPORT_HPP

#include <string>
#include <vector>

#include "splaynet/analysis.hpp"

namespace splaynet {

/// Frozen CSV column list (documented in the README; plotting scripts rely
/// on the order).
extern const std::vector<std::string> kCsvColumns;

std::string csv_header();
std::string csv_row(const Report& rep, const std::string& agg = "");
std::string csv_aggregate_row(const std::vector<Report>& cell);

/// Full JSON document for a single run.
std::string to_json(const Report& rep);

}  // namespace splaynet

#endif
