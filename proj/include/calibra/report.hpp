#pragma once

#include <string>
#include <vector>

#include "calibra/sbc.hpp"
#include "calibra/svg.hpp"

namespace calibra {

struct ReportStatus {
  int n_records = 0;
  int n_failed = 0;
  bool all_failed() const { return n_records > 0 && n_failed == n_records; }
};

/// Writes records.csv, summary.csv, calibration.csv and the SVG panels for
/// one SBC run into out_dir.
ReportStatus write_sbc_outputs(const std::string& out_dir,
                               const ScenarioSpec& spec,
                               const std::vector<SbcRecord>& records);

/// Writes the rejection-rate CSV and SVG for a frequentist run.
void write_freq_outputs(const std::string& out_dir, const ScenarioSpec& spec,
                        const ErrorRateCurve& curve, const std::string& mode);

/// Binned sweep summaries and logistic fits used by the sweep panels.
std::vector<SweepBin> sweep_bins(const ScenarioSpec& spec,
                                 const std::vector<SbcRecord>& records,
                                 int n_bins = 6);
std::vector<SweepFit> sweep_fits(const ScenarioSpec& spec,
                                 const std::vector<SbcRecord>& records);

/// Fills in sweep values for records that were read back from CSV.
void restore_sweep_values(const ScenarioSpec& spec,
                          std::vector<SbcRecord>& records);

}  // namespace calibra
