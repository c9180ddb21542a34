#include "calibra/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace calibra {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  out << "subj,item";
  for (const auto& f : data.trials.factors) out << "," << f.name;
  out << ",y\n";
  for (long r = 0; r < data.trials.n_rows(); ++r) {
    if (data.trials.subj[r] >= 0) {
      out << "s" << (data.trials.subj[r] + 1);
    } else {
      out << "NA";
    }
    out << ",";
    if (data.trials.item[r] >= 0) {
      out << "i" << (data.trials.item[r] + 1);
    } else {
      out << "NA";
    }
    for (size_t f = 0; f < data.trials.factors.size(); ++f) {
      const int level = data.trials.level_of(data.trials.cell[r],
                                             static_cast<int>(f));
      out << "," << data.trials.factors[f].levels[level];
    }
    out << "," << format_double(data.y(r)) << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path, const ScenarioSpec& spec) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset CSV");
  const auto header = split_csv_line(line);
  const size_t n_factors = spec.design.factors.size();
  if (header.size() != 3 + n_factors || header[0] != "subj" ||
      header[1] != "item" || header.back() != "y") {
    throw std::runtime_error("dataset CSV header does not match the scenario");
  }
  for (size_t f = 0; f < n_factors; ++f) {
    if (header[2 + f] != spec.design.factors[f].name) {
      throw std::runtime_error("dataset CSV factor columns do not match");
    }
  }

  Dataset d;
  d.family = spec.family;
  d.trials.factors = spec.design.factors;
  std::vector<double> ys;
  int max_subj = -1, max_item = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("dataset CSV row width mismatch");
    }
    int subj = -1, item = -1;
    if (fields[0] != "NA") subj = std::stoi(fields[0].substr(1)) - 1;
    if (fields[1] != "NA") item = std::stoi(fields[1].substr(1)) - 1;
    int cell = 0;
    for (size_t f = 0; f < n_factors; ++f) {
      const auto& levels = spec.design.factors[f].levels;
      int level = -1;
      for (size_t l = 0; l < levels.size(); ++l) {
        if (levels[l] == fields[2 + f]) level = static_cast<int>(l);
      }
      if (level < 0) {
        throw std::runtime_error("unknown level '" + fields[2 + f] + "'");
      }
      cell = cell * static_cast<int>(levels.size()) + level;
    }
    d.trials.subj.push_back(subj);
    d.trials.item.push_back(item);
    d.trials.cell.push_back(cell);
    d.trials.replicate.push_back(0);
    ys.push_back(std::stod(fields.back()));
    max_subj = std::max(max_subj, subj);
    max_item = std::max(max_item, item);
  }
  d.trials.n_subj = max_subj + 1;
  d.trials.n_item = max_item + 1;
  d.y = Eigen::Map<VectorXd>(ys.data(), ys.size());
  return d;
}

void write_records_csv(const std::string& path,
                       const std::vector<SbcRecord>& records) {
  std::ofstream out = open_out(path);
  out << "run,true_model,analysis_id,effect_id,log_bf10,post_p1,rhat_max,"
         "bridge_iters,warn_flags\n";
  for (const auto& r : records) {
    out << r.run << "," << r.true_model << "," << r.analysis_id << ","
        << r.effect_id << "," << format_double(r.log_bf10) << ","
        << format_double(r.post_p1) << "," << format_double(r.rhat_max) << ","
        << r.bridge_iters << "," << r.warn_flags << "\n";
  }
}

std::vector<SbcRecord> read_records_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty records CSV");
  std::vector<SbcRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::runtime_error("records CSV row width");
    SbcRecord r;
    r.run = std::stoi(f[0]);
    r.true_model = std::stoi(f[1]);
    r.analysis_id = f[2];
    r.effect_id = f[3];
    r.log_bf10 = std::stod(f[4]);
    r.post_p1 = std::stod(f[5]);
    r.rhat_max = std::stod(f[6]);
    r.bridge_iters = std::stoi(f[7]);
    r.warn_flags = f[8];
    records.push_back(r);
  }
  return records;
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_out(path);
  out << "analysis_id,effect_id,n,n_failed,mean_post_p1,sd_post_p1,ci_lo,"
         "ci_hi,prior_p1\n";
  for (const auto& r : rows) {
    out << r.analysis_id << "," << r.effect_id << "," << r.n << ","
        << r.n_failed << "," << format_double(r.mean_post_p1) << ","
        << format_double(r.sd_post_p1) << "," << format_double(r.ci_lo) << ","
        << format_double(r.ci_hi) << "," << format_double(r.prior_p1) << "\n";
  }
}

void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationTestRow>& rows) {
  std::ofstream out = open_out(path);
  out << "analysis_id,effect_id,test,scale,log_bf10,bf10,skipped\n";
  for (const auto& r : rows) {
    out << r.analysis_id << "," << r.effect_id << "," << r.test << ","
        << format_double(r.scale) << "," << format_double(r.log_bf10) << ","
        << format_double(r.bf10) << "," << (r.skipped ? 1 : 0) << "\n";
  }
}

void write_curve_csv(const std::string& path, const ErrorRateCurve& curve) {
  std::ofstream out = open_out(path);
  out << "analysis_id,effect_id,sd_true,n_reject,n_sims,ci_lo,ci_hi\n";
  for (const auto& p : curve) {
    out << p.analysis_id << "," << p.effect_id << ","
        << format_double(p.sd_true) << "," << p.n_reject << "," << p.n_sims
        << "," << format_double(p.ci_lo) << "," << format_double(p.ci_hi)
        << "\n";
  }
}

void write_bf_report_csv(const std::string& path,
                         const std::vector<BfReportRow>& rows) {
  std::ofstream out = open_out(path);
  out << "analysis_id,effect_id,log_bf10,bf10,post_p1,rhat_max,bridge_iters,"
         "warn_flags\n";
  for (const auto& r : rows) {
    out << r.analysis_id << "," << r.effect_id << ","
        << format_double(r.log_bf10) << "," << format_double(r.bf10) << ","
        << format_double(r.post_p1) << "," << format_double(r.rhat_max) << ","
        << r.bridge_iters << "," << r.warn_flags << "\n";
  }
}

}  // namespace calibra
