#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "betatneh/fit.hpp"
#include "betatneh/simulation.hpp"

namespace betatneh {

/// Derived quantities evaluated at one covariate profile.
struct ProfileReport {
    std::string label;
    Profile profile;
    CiResult cure_fraction;
    CiResult tneh;
};

/// Versioned JSON fit report (schema_version 1): parameter names, estimates,
/// standard errors, row-major covariance, log-likelihood, AIC, boundary
/// flags, and a derived-quantities block per profile.
std::string fit_report_json(const FitResult& fit,
                            const std::vector<ProfileReport>& profiles,
                            double ci_level);
void write_fit_report(const std::filesystem::path& path, const FitResult& fit,
                      const std::vector<ProfileReport>& profiles, double ci_level);

/// Parses a fit report back into a FitResult (theta, covariance, designs;
/// enough to predict curves and intervals from the file alone).
struct LoadedFit {
    FitResult fit;
    double ci_level = 0.95;
};
LoadedFit read_fit_report(const std::filesystem::path& path);

std::string study_report_json(const StudyReport& report, const std::string& label,
                              std::uint64_t seed);
void write_study_report(const std::filesystem::path& path, const StudyReport& report,
                        const std::string& label, std::uint64_t seed);

/// Tabular study summary, one row per parameter:
/// setting,n,parameter,mean,sd,mean_se,cp
void write_study_csv(const std::filesystem::path& path, const StudyReport& report,
                     const std::string& setting_label);
void append_study_csv_rows(std::string& out, const StudyReport& report,
                           const std::string& setting_label);
std::string study_csv_header();

std::string sweep_report_json(const SweepReport& report, std::uint64_t seed);

}  // namespace betatneh
