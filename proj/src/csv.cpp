#include "ldnet/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(begin, end - begin + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

bool parse_double(const std::string& cell, double& out) {
    const std::string s = trim(cell);
    if (s.empty()) return false;
    if (s == "nan" || s == "NaN") {
        out = std::nan("");
        return true;
    }
    if (s == "inf" || s == "-inf") {
        out = s[0] == '-' ? -INFINITY : INFINITY;
        return true;
    }
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<int> resolve(const CsvTable& table, const std::vector<std::string>& names,
                         const std::string& path) {
    std::vector<int> idx;
    for (const auto& name : names) {
        const int c = table.column(name);
        if (c < 0) throw IoError(path + ": missing column '" + name + "'");
        idx.push_back(c);
    }
    return idx;
}

Matrix numeric_block(const CsvTable& table, const std::vector<int>& cols, const std::string& path) {
    Matrix m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto& row = table.rows[r];
            double v = 0.0;
            if (cols[c] >= static_cast<int>(row.size()) || !parse_double(row[cols[c]], v)) {
                throw IoError(path + ": row " + std::to_string(r + 2) + ", column '" +
                              table.header[cols[c]] + "' is not numeric");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return m;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
        if (!l.empty() && l.back() == ',') cells.emplace_back();
        return cells;
    };
    if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
    table.header = split(line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        table.rows.push_back(split(line));
    }
    return table;
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& predictor_cols,
                 const std::vector<std::string>& response_cols) {
    const CsvTable table = read_csv_table(path);
    Dataset d;
    d.X = numeric_block(table, resolve(table, predictor_cols, path), path);
    d.Y = numeric_block(table, resolve(table, response_cols, path), path);
    return d;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void export_dataset_csv(const Dataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    std::vector<std::string> header;
    for (int j = 1; j <= data.p(); ++j) header.push_back("x" + std::to_string(j));
    for (int k = 1; k <= data.q(); ++k) header.push_back("y" + std::to_string(k));
    if (data.true_mean) {
        for (int k = 1; k <= data.q(); ++k) header.push_back("m" + std::to_string(k));
    }
    if (data.outlier_mask) header.push_back("outlier");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        std::string sep;
        auto put = [&](const std::string& s) {
            out << sep << s;
            sep = ",";
        };
        for (int j = 0; j < data.p(); ++j) put(format_double(data.X(i, j)));
        for (int k = 0; k < data.q(); ++k) put(format_double(data.Y(i, k)));
        if (data.true_mean) {
            for (int k = 0; k < data.q(); ++k) put(format_double((*data.true_mean)(i, k)));
        }
        if (data.outlier_mask) put((*data.outlier_mask)[i] ? "1" : "0");
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

Dataset import_dataset_csv(const std::string& path) {
    const CsvTable table = read_csv_table(path);
    std::vector<std::string> xs, ys, ms;
    for (const auto& h : table.header) {
        if (h.size() < 2) continue;
        const bool digits = h.find_first_not_of("0123456789", 1) == std::string::npos;
        if (!digits) continue;
        if (h[0] == 'x') xs.push_back(h);
        if (h[0] == 'y') ys.push_back(h);
        if (h[0] == 'm') ms.push_back(h);
    }
    Dataset d;
    d.X = numeric_block(table, resolve(table, xs, path), path);
    d.Y = numeric_block(table, resolve(table, ys, path), path);
    if (!ms.empty()) d.true_mean = numeric_block(table, resolve(table, ms, path), path);
    const int flag = table.column("outlier");
    if (flag >= 0) {
        const Matrix f = numeric_block(table, {flag}, path);
        Mask mask(f.rows());
        for (Eigen::Index i = 0; i < f.rows(); ++i) mask[i] = f(i, 0) != 0.0;
        d.outlier_mask = mask;
    }
    d.validate();
    return d;
}

}  // namespace ldnet
