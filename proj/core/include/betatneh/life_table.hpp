#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace betatneh {

struct LifeTableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Sex : std::uint8_t { male = 0, female = 1 };

Sex parse_sex(const std::string& token);  // "M" or "F"
char sex_code(Sex s);

/// Population mortality rates by (sex, integer age, calendar year).
/// CSV schema: header "sex,age,year,rate"; sex in {M,F}; age integer 0-120;
/// year integer; rate a non-negative decimal. The (age, year) grid must be
/// complete (rectangular) for every sex present. Attained ages are floored
/// to whole years; queries outside the rectangle clamp to the nearest cell
/// and report it.
class LifeTable {
public:
    static LifeTable load_csv(const std::filesystem::path& path);

    struct Lookup {
        double rate;
        bool clamped;
    };
    Lookup hazard_at(Sex sex, double attained_age, int year) const;

    /// Integral of the stepwise hazard from attained age `age0` over `delta`
    /// years. The calendar year advances with elapsed time from `year0`
    /// unless `static_year` freezes it.
    double cum_hazard(Sex sex, double age0, int year0, double delta,
                      bool static_year = false) const;

    int rows() const { return rows_; }
    int age_min() const { return age_min_; }
    int age_max() const { return age_max_; }
    int year_min() const { return year_min_; }
    int year_max() const { return year_max_; }
    double rate_min() const { return rate_min_; }
    double rate_max() const { return rate_max_; }
    bool has_sex(Sex s) const { return !rates_[static_cast<int>(s)].empty(); }

private:
    double cell(Sex sex, int age, int year) const;

    std::vector<double> rates_[2];  // dense (age, year) grid per sex
    int age_min_ = 0, age_max_ = -1;
    int year_min_ = 0, year_max_ = -1;
    int rows_ = 0;
    double rate_min_ = 0.0, rate_max_ = 0.0;
};

/// Analytic population hazard for simulations: Weibull with hazard
/// (shape/scale) * (age/scale)^(shape-1) on the age-since-birth axis.
struct WeibullPopHazard {
    double scale;
    double shape;

    double hazard(double attained_age) const;
    /// ((a+delta)/s)^k - (a/s)^k, the conditional cumulative hazard from age a.
    double cum_hazard(double from_age, double delta) const;
};

/// Where per-record population hazards come from during fitting.
struct TablePopSource {
    const LifeTable* table = nullptr;
    bool static_year = false;  // freeze the diagnosis year during follow-up
};
using PopHazardSource = std::variant<WeibullPopHazard, TablePopSource>;

}  // namespace betatneh
