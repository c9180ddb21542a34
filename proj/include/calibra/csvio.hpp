#pragma once

#include <string>
#include <vector>

#include "calibra/freq.hpp"
#include "calibra/sbc.hpp"
#include "calibra/scenario.hpp"
#include "calibra/simulate.hpp"

namespace calibra {

/// Stable numeric formatting shared by every CSV writer ("%.10g"; "nan" for
/// missing values) so reruns are byte-identical.
std::string format_double(double v);

void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path, const ScenarioSpec& spec);

void write_records_csv(const std::string& path,
                       const std::vector<SbcRecord>& records);
std::vector<SbcRecord> read_records_csv(const std::string& path);

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);
void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationTestRow>& rows);
void write_curve_csv(const std::string& path, const ErrorRateCurve& curve);
void write_bf_report_csv(const std::string& path,
                         const std::vector<BfReportRow>& rows);

}  // namespace calibra
