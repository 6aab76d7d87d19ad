#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace betatneh {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One observation: follow-up time in years, death indicator, age at
/// diagnosis, covariate values aligned with Dataset::covariate_names.
struct SurvivalRecord {
    double time;
    int status;
    double age;
    std::vector<double> covariates;
};

/// Column-oriented survival data. CSV schema: header
/// "time,status,age,<covariate columns...>"; status in {0,1}; all numeric.
/// The reserved covariate names "sex" (0 = M, 1 = F) and "year" (diagnosis
/// year) key life-table lookups and are not model covariates unless a design
/// names them explicitly.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> covariate_names, std::vector<SurvivalRecord> records);

    static Dataset read_csv(const std::filesystem::path& path);
    void write_csv(const std::filesystem::path& path) const;

    int n() const { return static_cast<int>(time.size()); }
    int n_covariates() const { return static_cast<int>(covariate_names.size()); }
    /// Index of a covariate column, -1 if absent.
    int column(const std::string& name) const;
    SurvivalRecord record(int i) const;

    double max_time() const;
    /// Median of event (status = 1) times; falls back to the median of all
    /// times when there are no events, and to 1.0 on an empty dataset.
    double median_event_time() const;

    void validate() const;  // throws DataError

    Eigen::VectorXd time;
    Eigen::VectorXi status;
    Eigen::VectorXd age;
    Eigen::MatrixXd covariates;  // n x p
    std::vector<std::string> covariate_names;
};

}  // namespace betatneh
