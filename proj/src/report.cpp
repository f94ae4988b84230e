#include "ldnet/report.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ldnet/csv.hpp"
#include "ldnet/errors.hpp"

namespace ldnet {

using nlohmann::json;

const std::vector<std::string> kReportColumns{
    "estimator", "replication", "seed",      "mse",          "mspe",   "nc",
    "nic",       "exact_match", "frobenius", "lambda_selected", "epochs", "wall_ms"};

namespace {

// NaN and infinities become null so the document stays valid JSON.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json mask_json(const Mask& m) {
    json out = json::array();
    for (bool b : m) out.push_back(b);
    return out;
}

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

void check_keys(const json& obj, const std::vector<std::pair<const char*, json::value_t>>& keys,
                const std::string& where, std::vector<std::string>& errors) {
    for (const auto& [key, type] : keys) {
        if (!obj.contains(key)) {
            errors.push_back(where + ": missing '" + key + "'");
            continue;
        }
        const json& v = obj.at(key);
        bool ok = v.type() == type;
        if (type == json::value_t::number_float) ok = v.is_number() || v.is_null();
        if (type == json::value_t::number_unsigned) ok = v.is_number_integer();
        if (!ok) errors.push_back(where + ": '" + key + "' has the wrong type");
    }
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + s + "' (expected csv or json)");
}

void write_report_csv(const ReplicationTable& table, std::ostream& out) {
    out << join(kReportColumns) << '\n';
    for (const auto& r : table.rows) {
        out << join({r.estimator, std::to_string(r.replication), std::to_string(r.seed),
                     format_double(r.mse), format_double(r.mspe),
                     r.ok ? std::to_string(r.nc) : "nan", r.ok ? std::to_string(r.nic) : "nan",
                     r.ok ? (r.exact_match ? "1" : "0") : "nan", format_double(r.frobenius),
                     format_double(r.lambda_selected), std::to_string(r.epochs),
                     format_double(r.wall_ms)})
            << '\n';
    }
    for (const auto& a : table.aggregates) {
        out << join({a.estimator, "mean", "", format_double(a.mean_mse), format_double(a.mean_mspe),
                     format_double(a.mean_nc), format_double(a.mean_nic),
                     format_double(a.mean_exact), format_double(a.mean_frobenius),
                     format_double(a.mean_lambda), format_double(a.mean_epochs),
                     format_double(a.mean_wall_ms)})
            << '\n';
        out << join({a.estimator, "se", "", format_double(a.se_mse), format_double(a.se_mspe),
                     format_double(a.se_nc), format_double(a.se_nic), format_double(a.se_exact),
                     format_double(a.se_frobenius), format_double(a.se_lambda),
                     format_double(a.se_epochs), format_double(a.se_wall_ms)})
            << '\n';
    }
}

std::string report_json(const ReplicationTable& table) {
    json doc;
    doc["schema"] = "v1";
    doc["experiment"] = table.experiment;
    doc["config"] = json::object();
    for (const auto& [k, v] : table.config) doc["config"][k] = v;

    doc["rows"] = json::array();
    for (const auto& r : table.rows) {
        doc["rows"].push_back({{"estimator", r.estimator},
                               {"replication", r.replication},
                               {"seed", r.seed},
                               {"status", r.ok ? "ok" : "failed"},
                               {"error", r.error},
                               {"mse", number(r.mse)},
                               {"mspe", number(r.mspe)},
                               {"nc", r.nc},
                               {"nic", r.nic},
                               {"exact_match", r.exact_match},
                               {"frobenius", number(r.frobenius)},
                               {"lambda_selected", number(r.lambda_selected)},
                               {"epochs", r.epochs},
                               {"eta", number(r.eta)},
                               {"wall_ms", number(r.wall_ms)},
                               {"dcor", matrix_json(r.dcor)}});
    }

    doc["aggregates"] = json::array();
    for (const auto& a : table.aggregates) {
        auto pair = [](double m, double s) { return json{{"mean", number(m)}, {"se", number(s)}}; };
        doc["aggregates"].push_back({{"estimator", a.estimator},
                                     {"count", a.count},
                                     {"failures", a.failures},
                                     {"nt", a.nt},
                                     {"mse", pair(a.mean_mse, a.se_mse)},
                                     {"mspe", pair(a.mean_mspe, a.se_mspe)},
                                     {"nc", pair(a.mean_nc, a.se_nc)},
                                     {"nic", pair(a.mean_nic, a.se_nic)},
                                     {"exact_match", pair(a.mean_exact, a.se_exact)},
                                     {"frobenius", pair(a.mean_frobenius, a.se_frobenius)},
                                     {"lambda_selected", pair(a.mean_lambda, a.se_lambda)},
                                     {"epochs", pair(a.mean_epochs, a.se_epochs)},
                                     {"wall_ms", pair(a.mean_wall_ms, a.se_wall_ms)}});
    }
    doc["warnings"] = table.warnings;
    return doc.dump(2) + "\n";
}

std::vector<std::string> validate_report_json(const std::string& text) {
    std::vector<std::string> errors;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        return {std::string("not valid JSON: ") + e.what()};
    }
    if (!doc.is_object()) return {"top level is not an object"};
    using T = json::value_t;
    check_keys(doc,
               {{"schema", T::string},
                {"experiment", T::string},
                {"config", T::object},
                {"rows", T::array},
                {"aggregates", T::array},
                {"warnings", T::array}},
               "report", errors);
    if (!errors.empty()) return errors;
    if (doc["schema"] != "v1") errors.push_back("report: schema is not v1");

    const std::vector<std::pair<const char*, T>> row_keys{
        {"estimator", T::string},       {"replication", T::number_unsigned},
        {"seed", T::number_unsigned},   {"status", T::string},
        {"error", T::string},           {"mse", T::number_float},
        {"mspe", T::number_float},      {"nc", T::number_unsigned},
        {"nic", T::number_unsigned},    {"exact_match", T::boolean},
        {"frobenius", T::number_float}, {"lambda_selected", T::number_float},
        {"epochs", T::number_unsigned}, {"eta", T::number_float},
        {"wall_ms", T::number_float},   {"dcor", T::array}};
    for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
        const json& row = doc["rows"][i];
        const std::string where = "rows[" + std::to_string(i) + "]";
        if (!row.is_object()) {
            errors.push_back(where + ": not an object");
            continue;
        }
        check_keys(row, row_keys, where, errors);
        if (row.contains("status") && row["status"] != "ok" && row["status"] != "failed") {
            errors.push_back(where + ": status must be ok or failed");
        }
    }

    const char* metrics[] = {"mse",       "mspe",            "nc",     "nic",    "exact_match",
                             "frobenius", "lambda_selected", "epochs", "wall_ms"};
    for (std::size_t i = 0; i < doc["aggregates"].size(); ++i) {
        const json& agg = doc["aggregates"][i];
        const std::string where = "aggregates[" + std::to_string(i) + "]";
        if (!agg.is_object()) {
            errors.push_back(where + ": not an object");
            continue;
        }
        check_keys(agg,
                   {{"estimator", T::string},
                    {"count", T::number_unsigned},
                    {"failures", T::number_unsigned},
                    {"nt", T::number_unsigned}},
                   where, errors);
        for (const char* m : metrics) {
            if (!agg.contains(m) || !agg[m].is_object()) {
                errors.push_back(where + ": missing '" + m + "' object");
                continue;
            }
            check_keys(agg[m], {{"mean", T::number_float}, {"se", T::number_float}},
                       where + "." + m, errors);
        }
    }
    for (const auto& w : doc["warnings"]) {
        if (!w.is_string()) errors.push_back("warnings: entries must be strings");
    }
    return errors;
}

void emit_report(const ReplicationTable& table, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report to '" + path + "'");
    if (format == ReportFormat::csv) {
        write_report_csv(table, out);
    } else {
        out << report_json(table);
    }
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string fit_report_json(const FitReport& report) {
    const TrainConfig& c = report.config_echo;
    json doc;
    doc["schema"] = "v1";
    doc["params"] = json::parse(params_to_json(report.params));
    doc["stopped_epoch"] = report.stopped_epoch;
    doc["best_epoch"] = report.best_epoch;
    doc["best_val_loss"] = number(report.best_val_loss());
    doc["selected"] = mask_json(report.selected_mask);
    doc["objective_convention"] = report.objective_convention;
    doc["config"] = {
        {"layer_widths", c.network.layer_widths},
        {"loss", c.loss.kind == LossKind::ld ? "ld" : "ls"},
        {"tau2", c.loss.tau2},
        {"gradient_variant", c.loss.variant == GradientVariant::corrected ? "corrected" : "paper_literal"},
        {"penalty",
         c.penalty.kind == PenaltyKind::none           ? "none"
         : c.penalty.kind == PenaltyKind::group_lasso ? "group_lasso"
                                                       : "adaptive_group_lasso"},
        {"lambda", c.penalty.lambda},
        {"gamma", c.penalty.gamma},
        {"tau1", c.penalty.tau1},
        {"penalize_bias", c.penalty.penalize_bias},
        {"eta", c.eta},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"early_stopping", c.early_stopping},
        {"seed", c.seed},
        {"init_scale", c.init_scale},
        {"selection_threshold", c.selection_threshold},
    };
    return doc.dump(2) + "\n";
}

void write_trace_csv(const FitReport& report, std::ostream& out) {
    out << "epoch,train_objective,val_objective\n";
    for (std::size_t e = 0; e < report.train_trace.size(); ++e) {
        out << (e + 1) << ',' << format_double(report.train_trace[e]) << ','
            << format_double(e < report.val_trace.size() ? report.val_trace[e] : NAN) << '\n';
    }
}

}  // namespace ldnet
