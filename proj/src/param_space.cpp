#include "dynaopt/param_space.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "dynaopt/errors.hpp"

namespace dynaopt {

std::string grid_scale_name(GridScale s) {
    return s == GridScale::Linear ? "linear" : "log";
}

GridScale grid_scale_from_name(const std::string& name) {
    if (name == "linear") return GridScale::Linear;
    if (name == "log") return GridScale::Log;
    throw ConfigError("unknown grid scale: " + name);
}

std::vector<double> build_grid(double min_value, double max_value, int count, GridScale scale) {
    if (count < 2) throw ConfigError("build_grid: count must be >= 2");
    if (!(min_value < max_value)) throw ConfigError("build_grid: min must be < max");
    if (!std::isfinite(min_value) || !std::isfinite(max_value)) {
        throw ConfigError("build_grid: bounds must be finite");
    }
    if (scale == GridScale::Log && min_value <= 0.0) {
        throw ConfigError("build_grid: log scale needs positive bounds");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (scale == GridScale::Linear) {
        for (int i = 0; i < count; ++i) {
            grid[static_cast<std::size_t>(i)] =
                min_value + (max_value - min_value) * i / (count - 1);
        }
    } else {
        const double lo = std::log10(min_value);
        const double hi = std::log10(max_value);
        for (int i = 0; i < count; ++i) {
            grid[static_cast<std::size_t>(i)] =
                std::pow(10.0, lo + (hi - lo) * i / (count - 1));
        }
    }
    grid.front() = min_value;  // keep endpoints exact
    grid.back() = max_value;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError("build_grid: grid is not strictly increasing");
        }
    }
    return grid;
}

ParameterSpace::ParameterSpace(std::vector<ParamSpec> params) : params_(std::move(params)) {
    if (params_.empty()) throw ConfigError("ParameterSpace: needs at least one parameter");
    std::set<std::string> names;
    for (const ParamSpec& p : params_) {
        if (p.name.empty()) throw ConfigError("ParameterSpace: empty parameter name");
        if (!names.insert(p.name).second) {
            throw ConfigError("ParameterSpace: duplicate parameter name '" + p.name + "'");
        }
        if (p.grid.size() < 2) {
            throw ConfigError("ParameterSpace: parameter '" + p.name + "' needs G >= 2");
        }
        for (double v : p.grid) {
            if (!std::isfinite(v)) {
                throw ConfigError("ParameterSpace: non-finite grid value in '" + p.name + "'");
            }
        }
        for (std::size_t i = 1; i < p.grid.size(); ++i) {
            if (!(p.grid[i] > p.grid[i - 1])) {
                throw ConfigError("ParameterSpace: grid of '" + p.name +
                                  "' is not strictly increasing");
            }
        }
    }
}

int ParameterSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

bool ParameterSpace::valid(const ActionVector& a) const {
    if (a.indices.size() != params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (a.indices[i] < 0 || a.indices[i] >= grid_size(i)) return false;
    }
    return true;
}

void ParameterSpace::require_valid(const ActionVector& a) const {
    if (!valid(a)) {
        throw std::out_of_range("ActionVector invalid for this parameter space");
    }
}

std::vector<double> ParameterSpace::decode(const ActionVector& a) const {
    require_valid(a);
    std::vector<double> out(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        out[i] = params_[i].grid[static_cast<std::size_t>(a.indices[i])];
    }
    return out;
}

std::vector<double> ParameterSpace::normalize(const ActionVector& a) const {
    require_valid(a);
    std::vector<double> out(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        out[i] = 2.0 * a.indices[i] / (grid_size(i) - 1) - 1.0;
    }
    return out;
}

double ParameterSpace::log10_cardinality() const {
    double sum = 0.0;
    for (const ParamSpec& p : params_) sum += std::log10(static_cast<double>(p.grid.size()));
    return sum;
}

ParameterSpace default_opamp_space() {
    std::vector<ParamSpec> params;
    for (const char* name : {"w_in", "w_load", "w_tail", "w_out", "w_sink", "w_bias"}) {
        params.push_back({name, "", GridScale::Log, build_grid(1.0, 100.0, 100, GridScale::Log)});
    }
    params.push_back({"cc", "F", GridScale::Log, build_grid(0.1e-12, 10e-12, 100, GridScale::Log)});
    return ParameterSpace(std::move(params));
}

}  // namespace dynaopt
