#pragma once

#include <filesystem>
#include <vector>

#include "dynaopt/env.hpp"

namespace dynaopt {

// Append-only archive of real evaluations (Algorithm-style sample buffer B).
class SampleBuffer {
public:
    void append(Sample s) { samples_.push_back(std::move(s)); }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::vector<Sample>& samples() const { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    // Last `window` samples (all of them when window <= 0).
    std::vector<Sample> tail(long window) const;

private:
    std::vector<Sample> samples_;
};

// One header line, then one JSON record per line with fields: action,
// metrics, reward, per_metric, phase, failed, step. Numbers are written as
// 17-significant-digit decimals, so load(save(b)) round-trips bit-exactly.
void save_buffer(const SampleBuffer& buffer, const std::filesystem::path& path);
// Malformed input raises EvalError naming the offending line.
SampleBuffer load_buffer(const std::filesystem::path& path);

}  // namespace dynaopt
