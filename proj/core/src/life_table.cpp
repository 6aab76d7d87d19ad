#include "betatneh/life_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "internal/csv.hpp"

namespace betatneh {

Sex parse_sex(const std::string& token) {
    if (token == "M") return Sex::male;
    if (token == "F") return Sex::female;
    throw LifeTableError("sex must be 'M' or 'F', got '" + token + "'");
}

char sex_code(Sex s) { return s == Sex::male ? 'M' : 'F'; }

LifeTable LifeTable::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LifeTableError("cannot open life table file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw LifeTableError(path.string() + ": empty file");
    }
    {
        auto header = csv::split_line(line);
        const std::vector<std::string> expected{"sex", "age", "year", "rate"};
        if (std::vector<std::string>(header.begin(), header.end()) != expected) {
            throw LifeTableError(path.string() +
                                 ":1: header must be exactly 'sex,age,year,rate'");
        }
    }

    std::map<std::tuple<int, int, int>, double> cells;
    int line_no = 1;
    LifeTable t;
    t.rate_min_ = std::numeric_limits<double>::infinity();
    t.rate_max_ = -std::numeric_limits<double>::infinity();
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 4) {
            throw LifeTableError(where + ": expected 4 fields, got " +
                                 std::to_string(f.size()));
        }
        Sex sex;
        try {
            sex = parse_sex(f[0]);
        } catch (const LifeTableError& e) {
            throw LifeTableError(where + ": " + e.what());
        }
        int age = 0, year = 0;
        double rate = 0.0;
        if (!csv::parse_int(f[1], age) || age < 0 || age > 120) {
            throw LifeTableError(where + ": age must be an integer in [0,120]");
        }
        if (!csv::parse_int(f[2], year)) {
            throw LifeTableError(where + ": year must be an integer");
        }
        if (!csv::parse_double(f[3], rate) || !std::isfinite(rate) || rate < 0.0) {
            throw LifeTableError(where + ": rate must be a non-negative number");
        }
        const auto key = std::make_tuple(static_cast<int>(sex), age, year);
        if (!cells.emplace(key, rate).second) {
            throw LifeTableError(where + ": duplicate stratum (" + f[0] + "," + f[1] +
                                 "," + f[2] + ")");
        }
        if (first) {
            t.age_min_ = t.age_max_ = age;
            t.year_min_ = t.year_max_ = year;
            first = false;
        } else {
            t.age_min_ = std::min(t.age_min_, age);
            t.age_max_ = std::max(t.age_max_, age);
            t.year_min_ = std::min(t.year_min_, year);
            t.year_max_ = std::max(t.year_max_, year);
        }
        t.rate_min_ = std::min(t.rate_min_, rate);
        t.rate_max_ = std::max(t.rate_max_, rate);
        ++t.rows_;
    }
    if (t.rows_ == 0) {
        throw LifeTableError(path.string() + ": no data rows");
    }

    const int n_ages = t.age_max_ - t.age_min_ + 1;
    const int n_years = t.year_max_ - t.year_min_ + 1;
    bool sex_seen[2] = {false, false};
    for (const auto& [key, rate] : cells) sex_seen[std::get<0>(key)] = true;
    for (int s = 0; s < 2; ++s) {
        if (!sex_seen[s]) continue;
        auto& grid = t.rates_[s];
        grid.assign(static_cast<std::size_t>(n_ages) * n_years, -1.0);
        for (int a = t.age_min_; a <= t.age_max_; ++a) {
            for (int y = t.year_min_; y <= t.year_max_; ++y) {
                auto it = cells.find(std::make_tuple(s, a, y));
                if (it == cells.end()) {
                    throw LifeTableError(
                        path.string() + ": incomplete (age,year) rectangle: missing (" +
                        std::string(1, sex_code(static_cast<Sex>(s))) + "," +
                        std::to_string(a) + "," + std::to_string(y) + ")");
                }
                grid[static_cast<std::size_t>(a - t.age_min_) * n_years +
                     (y - t.year_min_)] = it->second;
            }
        }
    }
    return t;
}

double LifeTable::cell(Sex sex, int age, int year) const {
    const auto& grid = rates_[static_cast<int>(sex)];
    const int n_years = year_max_ - year_min_ + 1;
    return grid[static_cast<std::size_t>(age - age_min_) * n_years + (year - year_min_)];
}

LifeTable::Lookup LifeTable::hazard_at(Sex sex, double attained_age, int year) const {
    if (!(attained_age >= 0.0) || !std::isfinite(attained_age)) {
        throw LifeTableError("attained age must be finite and >= 0");
    }
    if (!has_sex(sex)) {
        throw LifeTableError(std::string("life table has no rows for sex '") +
                             sex_code(sex) + "'");
    }
    int age = static_cast<int>(std::floor(attained_age));
    bool clamped = false;
    if (age < age_min_) {
        age = age_min_;
        clamped = true;
    } else if (age > age_max_) {
        age = age_max_;
        clamped = true;
    }
    if (year < year_min_) {
        year = year_min_;
        clamped = true;
    } else if (year > year_max_) {
        year = year_max_;
        clamped = true;
    }
    return {cell(sex, age, year), clamped};
}

double LifeTable::cum_hazard(Sex sex, double age0, int year0, double delta,
                             bool static_year) const {
    if (!(delta >= 0.0)) {
        throw LifeTableError("cum_hazard: delta must be >= 0");
    }
    double acc = 0.0;
    double s = 0.0;
    // Step between whole-year boundaries of attained age and calendar year.
    while (s < delta) {
        const double next_age_tick = std::floor(age0 + s) + 1.0 - age0;
        const double next_year_tick = std::floor(s) + 1.0;
        double s_next = std::min({delta, next_age_tick, next_year_tick});
        if (s_next <= s) s_next = std::min(delta, s + 1e-9);  // fp guard
        const int year = static_year ? year0 : year0 + static_cast<int>(std::floor(s));
        acc += hazard_at(sex, age0 + s, year).rate * (s_next - s);
        s = s_next;
    }
    return acc;
}

double WeibullPopHazard::hazard(double attained_age) const {
    return (shape / scale) * std::pow(attained_age / scale, shape - 1.0);
}

double WeibullPopHazard::cum_hazard(double from_age, double delta) const {
    return std::pow((from_age + delta) / scale, shape) -
           std::pow(from_age / scale, shape);
}

}  // namespace betatneh
