#pragma once

#include <string>
#include <vector>

#include "ldnet/dataset.hpp"

namespace ldnet {

/// Header plus string cells; no quoting beyond stripping surrounding double quotes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header, or -1.
    int column(const std::string& name) const;
};

CsvTable read_csv_table(const std::string& path);

/// Numeric dataset from named columns. Errors name the file, row and column.
Dataset load_csv(const std::string& path, const std::vector<std::string>& predictor_cols,
                 const std::vector<std::string>& response_cols);

/// Columns x1..xp, y1..yq, then m1..mq when the true mean is known and an
/// `outlier` 0/1 column when the outlier mask is present. 17 significant digits.
void export_dataset_csv(const Dataset& data, const std::string& path);

/// Reads a file written by export_dataset_csv, restoring every optional field.
Dataset import_dataset_csv(const std::string& path);

/// Shortest decimal that round-trips ("nan" and "inf" spelled out).
std::string format_double(double v);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace ldnet
