#include "ldnet/slump.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "ldnet/csv.hpp"
#include "ldnet/datagen.hpp"
#include "ldnet/errors.hpp"
#include "ldnet/rng.hpp"

namespace ldnet {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool starts_with(const std::string& name, const std::string& prefix) {
    return lower(name).rfind(prefix, 0) == 0;
}

void standardize_with(Matrix& m, const Vector& mean, const Vector& sd) {
    m.rowwise() -= mean.transpose();
    m.array().rowwise() /= sd.transpose().array();
}

std::pair<Vector, Vector> column_stats(const Matrix& m) {
    const Vector mean = m.colwise().mean().transpose();
    Vector sd(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double ss = (m.col(j).array() - mean[j]).square().sum();
        const double v = m.rows() > 1 ? std::sqrt(ss / (m.rows() - 1)) : 0.0;
        sd[j] = v > 0.0 ? v : 1.0;
    }
    return {mean, sd};
}

}  // namespace

SlumpData load_slump_csv(const std::string& path) {
    const CsvTable table = read_csv_table(path);
    const char* response_prefixes[] = {"flow", "slump", "compressive"};
    std::vector<std::string> responses;
    for (const char* prefix : response_prefixes) {
        auto it = std::find_if(table.header.begin(), table.header.end(),
                               [&](const std::string& h) { return starts_with(h, prefix); });
        if (it == table.header.end()) {
            throw IoError(path + ": slump schema needs a column starting with '" + prefix + "'");
        }
        responses.push_back(*it);
    }
    SlumpData out;
    for (const auto& h : table.header) {
        if (std::find(responses.begin(), responses.end(), h) != responses.end()) continue;
        if (lower(h) == "no" || lower(h) == "id") continue;
        out.predictor_names.push_back(h);
    }
    if (out.predictor_names.empty()) throw IoError(path + ": no predictor columns");
    out.data = load_csv(path, out.predictor_names, responses);

    const char* signal_prefixes[] = {"cement", "slag", "fly", "water", "sp", "coarse"};
    for (const auto& name : out.predictor_names) {
        bool signal = false;
        for (const char* prefix : signal_prefixes) signal = signal || starts_with(name, prefix);
        if (starts_with(name, "super")) signal = true;
        out.signal_mask.push_back(signal);
    }
    out.data.relevant_mask = out.signal_mask;
    return out;
}

SlumpSplit prepare_slump(const SlumpData& raw, const SlumpOptions& options, std::uint64_t seed) {
    const Dataset& d = raw.data;
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    if (options.noise_columns < 0) throw ConfigError("noise column count must be >= 0");
    if (static_cast<int>(raw.signal_mask.size()) != d.p()) {
        throw ShapeError("signal mask does not match the predictor count");
    }
    const int n = d.n();
    const int p = d.p() + options.noise_columns;

    Dataset full;
    full.X.resize(n, p);
    full.X.leftCols(d.p()) = d.X;
    std::mt19937_64 noise_gen(derive_seed(seed, 1));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = d.p(); j < p; ++j) full.X(i, j) = unif(noise_gen);
    full.Y = d.Y;
    Mask relevant = raw.signal_mask;
    relevant.resize(p, false);
    full.relevant_mask = relevant;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 split_gen(derive_seed(seed, 2));
    std::shuffle(order.begin(), order.end(), split_gen);
    const int n_train = static_cast<int>(std::floor(options.train_fraction * n));
    if (n_train < 1 || n_train >= n) throw ConfigError("split leaves an empty part");
    std::vector<int> train_idx(order.begin(), order.begin() + n_train);
    std::vector<int> test_idx(order.begin() + n_train, order.end());

    SlumpSplit out;
    out.train = full.rows(train_idx);
    out.test = full.rows(test_idx);
    if (options.standardize) {
        const auto [xm, xs] = column_stats(out.train.X);
        const auto [ym, ys] = column_stats(out.train.Y);
        standardize_with(out.train.X, xm, xs);
        standardize_with(out.test.X, xm, xs);
        standardize_with(out.train.Y, ym, ys);
        standardize_with(out.test.Y, ym, ys);
    }
    if (options.outlier_fraction > 0.0) {
        out.train = contaminate_uniform(out.train, options.outlier_fraction, options.outlier_shift,
                                        derive_seed(seed, 3));
    }
    out.noise_mask = Mask(d.p(), false);
    out.noise_mask.resize(p, true);
    return out;
}

}  // namespace ldnet
