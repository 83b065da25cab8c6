#pragma once

// JSON views of the analytic results. Doubles are written at full precision;
// non-finite values become null.

#include <json.hpp>

#include "drivestat/analysis.hpp"
#include "drivestat/bivariate.hpp"
#include "drivestat/convergence.hpp"
#include "drivestat/fitselect.hpp"
#include "drivestat/levelset.hpp"

namespace drivestat::cli {

using Json = nlohmann::ordered_json;

Json to_json(const GpdParams& p);
Json to_json(const Theta& theta);
Json to_json(const FitReport& f);
Json to_json(const ModelRanking& r);
Json to_json(const ConvergenceResult& r);
Json to_json(const Polyline& p);
Json to_json(const RelativeContourReport& r);
Json to_json(const PercentileTable& t);
Json to_json(const VelocityProfileReport& r);
Json to_json(const std::vector<BinFit>& fits);

/// Column label for a percentile level: 90 -> p90, 99.9 -> p999.
std::string percentile_label(double level);

void write_percentile_csv(std::ostream& out, const PercentileTable& t);

}  // namespace drivestat::cli
