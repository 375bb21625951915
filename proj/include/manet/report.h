#pragma once

#include "manet/scenario.h"

#include <filesystem>
#include <string>
#include <vector>

namespace manet {

inline constexpr const char* kCsvHeader = "protocol,sim_time,seed,packets_sent,packets_received,paper_pdr,"
                                          "packets_forwarded,pdr,throughput_Bps,avg_delay_s,nrl";

/// Formats a value for the CSV; infinities and missing values become "inf".
std::string FormatNumber(double v, int decimals);

/// results.csv contents: one row per run, followed, for every (protocol,
/// time) with more than one seed, by a row averaging those seeds whose seed
/// column reads "mean".
std::string FormatResultsCsv(const std::vector<RunResult>& results);

/// Gnuplot-style table: a `#` header naming the protocols, then one row per
/// distinct time with the seed-averaged metric for each protocol.
/// `metric` is one of pdr, paper_pdr, throughput, avg_delay, nrl.
std::string FormatSeries(const std::vector<RunResult>& results, const std::string& metric);

/// Three lines ordering the protocols by mean throughput, mean pdr (both
/// descending) and mean nrl (ascending), e.g. "throughput: AODV > DSDV > DSR".
std::string FormatSummary(const std::vector<RunResult>& results);

/// Metrics for which a series file is written.
const std::vector<std::string>& SeriesMetrics();

/// Writes results.csv, series_<metric>.dat and summary.txt into `dir`,
/// creating it if needed. Throws std::runtime_error when nothing can be
/// written there or `results` is empty.
void EmitReport(const std::vector<RunResult>& results, const std::filesystem::path& dir);

} // namespace manet
