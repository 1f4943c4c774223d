#pragma once

#include <string>
#include <vector>

namespace dynaopt {

enum class GridScale { Linear, Log };

std::string grid_scale_name(GridScale s);
GridScale grid_scale_from_name(const std::string& name);

struct ParamSpec {
    std::string name;  // lowercase identifier, used on the wire
    std::string unit;
    GridScale scale = GridScale::Linear;
    std::vector<double> grid;  // strictly increasing physical values, G >= 2
};

// count evenly spaced values (linear or log10 domain), endpoints exact.
std::vector<double> build_grid(double min_value, double max_value, int count, GridScale scale);

// One grid index per parameter; the policy's sample and the evaluator's input.
struct ActionVector {
    std::vector<int> indices;
    bool operator==(const ActionVector&) const = default;
};

class ParameterSpace {
public:
    explicit ParameterSpace(std::vector<ParamSpec> params);

    std::size_t size() const { return params_.size(); }  // T
    const ParamSpec& param(std::size_t i) const { return params_[i]; }
    const std::vector<ParamSpec>& params() const { return params_; }
    int grid_size(std::size_t i) const { return static_cast<int>(params_[i].grid.size()); }
    int index_of(const std::string& name) const;  // -1 when absent

    bool valid(const ActionVector& a) const;
    void require_valid(const ActionVector& a) const;  // throws std::out_of_range

    // out[i] = grid[i][a[i]]
    std::vector<double> decode(const ActionVector& a) const;
    // x[i] = 2 * a[i] / (G_i - 1) - 1, in [-1, 1]
    std::vector<double> normalize(const ActionVector& a) const;

    double log10_cardinality() const;

private:
    std::vector<ParamSpec> params_;
};

// The 7-parameter op-amp space: six width multipliers in [1, 100] and the
// compensation capacitor cc in [0.1 pF, 10 pF], all log grids with G = 100.
ParameterSpace default_opamp_space();

}  // namespace dynaopt
