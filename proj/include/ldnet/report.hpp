#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ldnet/harness.hpp"
#include "ldnet/trainer.hpp"

namespace ldnet {

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& s);

/// Fixed report header. Data rows carry the replication index; aggregate rows
/// carry "mean" or "se" in the replication column and leave the seed empty.
extern const std::vector<std::string> kReportColumns;

void write_report_csv(const ReplicationTable& table, std::ostream& out);

/// {"schema":"v1","experiment","config","rows","aggregates","warnings"}.
std::string report_json(const ReplicationTable& table);

/// Schema violations found in a JSON report; empty when it conforms.
std::vector<std::string> validate_report_json(const std::string& text);

/// Writes the table to `path`; throws IoError when the file cannot be written.
void emit_report(const ReplicationTable& table, ReportFormat format, const std::string& path);

/// Config echo, parameters, stopping epochs and selection mask of a single fit.
std::string fit_report_json(const FitReport& report);

/// epoch,train_objective,val_objective with one line per epoch.
void write_trace_csv(const FitReport& report, std::ostream& out);

}  // namespace ldnet
