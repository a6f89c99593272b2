#pragma once

#include "sparselab/estimators.hpp"
#include "sparselab/geometry.hpp"
#include "sparselab/harness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace sparselab {

using json = nlohmann::json;

// CSV problems carry the 1-based offending line.
struct CsvError : std::runtime_error {
  int line;
  CsvError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

json model_to_json(const DictionaryModel& model);
DictionaryModel model_from_json(const json& j);

json gram_to_json(const Eigen::MatrixXd& gram);
Eigen::MatrixXd gram_from_json(const json& j);

// Design CSV: header h1..hN; response CSV: single column y.
void write_design_csv(std::ostream& os, const Eigen::MatrixXd& H);
Eigen::MatrixXd read_design_csv(std::istream& is);
void write_response_csv(std::ostream& os, const Eigen::VectorXd& y);
Eigen::VectorXd read_response_csv(std::istream& is);

json selector_result_to_json(const SelectorResult& r);
json geometry_report_to_json(const GeometryReport& rep);

// Config JSON with strict field checking: unknown keys are rejected so
// typos cannot silently change a scientific run.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& config);

json summary_to_json(const ExperimentSummary& s);

void write_trial_csv_header(std::ostream& os);
void write_trial_csv_row(std::ostream& os, const TrialRecord& r);
std::vector<TrialRecord> read_trial_csv(std::istream& is);

void write_bound_csv_header(std::ostream& os);
void write_bound_csv_row(std::ostream& os, const BoundCheck& b);

// FNV-1a 64-bit hex digest, used for config checksums in run manifests.
std::string fnv1a_hex(const std::string& bytes);

} // namespace sparselab
