#include "betatneh/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "internal/csv.hpp"

namespace betatneh {

Dataset::Dataset(std::vector<std::string> names, std::vector<SurvivalRecord> records)
    : covariate_names(std::move(names)) {
    const int n = static_cast<int>(records.size());
    const int p = static_cast<int>(covariate_names.size());
    time.resize(n);
    status.resize(n);
    age.resize(n);
    covariates.resize(n, p);
    for (int i = 0; i < n; ++i) {
        const auto& r = records[i];
        if (static_cast<int>(r.covariates.size()) != p) {
            throw DataError("record " + std::to_string(i) +
                            ": covariate count mismatch");
        }
        time(i) = r.time;
        status(i) = r.status;
        age(i) = r.age;
        for (int j = 0; j < p; ++j) covariates(i, j) = r.covariates[j];
    }
    validate();
}

int Dataset::column(const std::string& name) const {
    const auto it = std::find(covariate_names.begin(), covariate_names.end(), name);
    return it == covariate_names.end()
               ? -1
               : static_cast<int>(it - covariate_names.begin());
}

SurvivalRecord Dataset::record(int i) const {
    SurvivalRecord r;
    r.time = time(i);
    r.status = status(i);
    r.age = age(i);
    r.covariates.assign(covariates.row(i).begin(), covariates.row(i).end());
    return r;
}

double Dataset::max_time() const { return n() == 0 ? 0.0 : time.maxCoeff(); }

double Dataset::median_event_time() const {
    std::vector<double> t;
    for (int i = 0; i < n(); ++i) {
        if (status(i) == 1) t.push_back(time(i));
    }
    if (t.empty()) {
        t.assign(time.begin(), time.end());
    }
    if (t.empty()) return 1.0;
    std::sort(t.begin(), t.end());
    const std::size_t m = t.size() / 2;
    return (t.size() % 2 == 1) ? t[m] : 0.5 * (t[m - 1] + t[m]);
}

void Dataset::validate() const {
    for (int i = 0; i < n(); ++i) {
        if (!std::isfinite(time(i)) || time(i) < 0.0) {
            throw DataError("record " + std::to_string(i) + ": time must be >= 0");
        }
        if (status(i) != 0 && status(i) != 1) {
            throw DataError("record " + std::to_string(i) + ": status must be 0 or 1");
        }
        if (!std::isfinite(age(i)) || age(i) < 0.0) {
            throw DataError("record " + std::to_string(i) + ": age must be >= 0");
        }
        for (int j = 0; j < n_covariates(); ++j) {
            if (!std::isfinite(covariates(i, j))) {
                throw DataError("record " + std::to_string(i) + ": covariate '" +
                                covariate_names[j] + "' is not finite");
            }
        }
    }
}

Dataset Dataset::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open records file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    auto header = csv::split_line(line);
    if (header.size() < 3 || header[0] != "time" || header[1] != "status" ||
        header[2] != "age") {
        throw DataError(path.string() +
                        ":1: header must start with 'time,status,age'");
    }
    Dataset ds;
    ds.covariate_names.assign(header.begin() + 3, header.end());
    const int p = ds.n_covariates();
    for (int j = 0; j < p; ++j) {
        if (ds.covariate_names[j].empty()) {
            throw DataError(path.string() + ":1: empty covariate column name");
        }
    }

    std::vector<double> times, ages;
    std::vector<int> statuses;
    std::vector<double> covs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (static_cast<int>(f.size()) != 3 + p) {
            throw DataError(where + ": expected " + std::to_string(3 + p) +
                            " fields, got " + std::to_string(f.size()));
        }
        double t = 0.0, a = 0.0;
        int st = 0;
        if (!csv::parse_double(f[0], t) || !std::isfinite(t) || t < 0.0) {
            throw DataError(where + ": time must be a non-negative number");
        }
        if (!csv::parse_int(f[1], st) || (st != 0 && st != 1)) {
            throw DataError(where + ": status must be 0 or 1");
        }
        if (!csv::parse_double(f[2], a) || !std::isfinite(a) || a < 0.0) {
            throw DataError(where + ": age must be a non-negative number");
        }
        times.push_back(t);
        statuses.push_back(st);
        ages.push_back(a);
        for (int j = 0; j < p; ++j) {
            double v = 0.0;
            if (!csv::parse_double(f[3 + j], v) || !std::isfinite(v)) {
                throw DataError(where + ": covariate '" + ds.covariate_names[j] +
                                "' must be a finite number");
            }
            covs.push_back(v);
        }
    }
    const int n = static_cast<int>(times.size());
    if (n == 0) {
        throw DataError(path.string() + ": no data rows");
    }
    ds.time = Eigen::Map<Eigen::VectorXd>(times.data(), n);
    ds.status = Eigen::Map<Eigen::VectorXi>(statuses.data(), n);
    ds.age = Eigen::Map<Eigen::VectorXd>(ages.data(), n);
    ds.covariates.resize(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) ds.covariates(i, j) = covs[i * p + j];
    }
    return ds;
}

void Dataset::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open output file: " + path.string());
    }
    out << "time,status,age";
    for (const auto& name : covariate_names) out << ',' << name;
    out << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < n(); ++i) {
        out << time(i) << ',' << status(i) << ',' << age(i);
        for (int j = 0; j < n_covariates(); ++j) out << ',' << covariates(i, j);
        out << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

}  // namespace betatneh
