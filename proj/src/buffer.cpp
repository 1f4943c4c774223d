#include "dynaopt/buffer.hpp"

#include <fstream>
#include <string>

#include "dynaopt/errors.hpp"
#include "dynaopt/json_io.hpp"

namespace dynaopt {

namespace {

constexpr const char* kFormat = "dynaopt_buffer";
constexpr int kVersion = 1;

ordered_json sample_to_json(const Sample& s) {
    ordered_json j;
    j["action"] = s.action.indices;
    ordered_json metrics = ordered_json::object();
    for (const auto& [name, value] : s.metrics) metrics[name] = value;
    j["metrics"] = std::move(metrics);
    j["reward"] = s.reward.total;
    ordered_json per_metric = ordered_json::object();
    for (const auto& [name, value] : s.reward.per_metric) per_metric[name] = value;
    j["per_metric"] = std::move(per_metric);
    j["phase"] = phase_name(s.phase);
    j["failed"] = s.failed;
    j["step"] = s.step;
    return j;
}

Sample sample_from_json(const ordered_json& j) {
    Sample s;
    s.action.indices = j.at("action").get<std::vector<int>>();
    for (const auto& [name, value] : j.at("metrics").items()) {
        s.metrics[name] = value.get<double>();
    }
    s.reward.total = j.at("reward").get<double>();
    for (const auto& [name, value] : j.at("per_metric").items()) {
        s.reward.per_metric[name] = value.get<double>();
    }
    s.phase = phase_from_name(j.at("phase").get<std::string>());
    s.failed = j.at("failed").get<bool>();
    s.step = j.at("step").get<long>();
    return s;
}

}  // namespace

std::vector<Sample> SampleBuffer::tail(long window) const {
    if (window <= 0 || static_cast<std::size_t>(window) >= samples_.size()) return samples_;
    return std::vector<Sample>(samples_.end() - window, samples_.end());
}

void save_buffer(const SampleBuffer& buffer, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write buffer file " + path.string());
    ordered_json header;
    header["format"] = kFormat;
    header["version"] = kVersion;
    header["count"] = buffer.size();
    out << dump_json(header) << '\n';
    for (const Sample& s : buffer.samples()) {
        out << dump_json(sample_to_json(s)) << '\n';
    }
    if (!out) throw EvalError("write failed for buffer file " + path.string());
}

SampleBuffer load_buffer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open buffer file " + path.string());
    SampleBuffer buffer;
    std::string line;
    long line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            throw EvalError("buffer load: malformed JSON at line " + std::to_string(line_no) +
                            " of " + path.string());
        }
        if (!seen_header) {
            if (j.value("format", "") != kFormat || j.value("version", -1) != kVersion) {
                throw EvalError("buffer load: bad header at line 1 of " + path.string());
            }
            seen_header = true;
            continue;
        }
        try {
            buffer.append(sample_from_json(j));
        } catch (const ordered_json::exception&) {
            throw EvalError("buffer load: malformed record at line " + std::to_string(line_no) +
                            " of " + path.string());
        } catch (const ConfigError& e) {
            throw EvalError("buffer load: bad record at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    if (!seen_header) {
        throw EvalError("buffer load: missing header line in " + path.string());
    }
    return buffer;
}

}  // namespace dynaopt
