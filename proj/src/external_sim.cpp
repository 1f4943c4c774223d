#include "dynaopt/external_sim.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "dynaopt/errors.hpp"
#include "dynaopt/json_io.hpp"

namespace dynaopt {

namespace {

using Clock = std::chrono::steady_clock;

struct ChildProcess {
    pid_t pid = -1;
    std::size_t slot = 0;  // index into the batch results
    Clock::time_point deadline;
    std::filesystem::path dir;
    std::filesystem::path metrics_path;
    bool timed_out = false;
};

std::string lowercased(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

pid_t spawn(const std::vector<std::string>& argv_strings, const std::filesystem::path& log_path) {
    std::vector<char*> argv;
    argv.reserve(argv_strings.size() + 1);
    for (const std::string& s : argv_strings) argv.push_back(const_cast<char*>(s.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        throw EvalError("external evaluator: fork failed");
    }
    if (pid == 0) {
        // Child: route stdout/stderr into the call directory for debugging.
        FILE* log = std::fopen(log_path.c_str(), "w");
        if (log) {
            ::dup2(fileno(log), STDOUT_FILENO);
            ::dup2(fileno(log), STDERR_FILENO);
            std::fclose(log);
        }
        ::execvp(argv[0], argv.data());
        std::_Exit(127);  // exec failed
    }
    return pid;
}

}  // namespace

std::string params_file_content(const ParameterSpace& space, const ActionVector& a) {
    const std::vector<double> values = space.decode(a);
    std::string out;
    for (std::size_t i = 0; i < space.size(); ++i) {
        out += lowercased(space.param(i).name);
        out += ' ';
        out += format_decimal(values[i]);
        out += '\n';
    }
    return out;
}

std::optional<MetricVector> parse_metrics_file(const std::filesystem::path& path,
                                               const std::vector<std::string>& required) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    MetricVector metrics;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name;
        double value = 0.0;
        std::string extra;
        if (!(ls >> name >> value) || (ls >> extra)) return std::nullopt;
        if (!std::isfinite(value) || value < 0.0) return std::nullopt;
        metrics[name] = value;
    }
    for (const std::string& name : required) {
        if (!metrics.count(name)) return std::nullopt;
    }
    return metrics;
}

ExternalEvaluator::ExternalEvaluator(ExternalSimConfig cfg, ParameterSpace space,
                                     std::vector<std::string> required_metrics)
    : cfg_(std::move(cfg)), space_(std::move(space)),
      required_metrics_(std::move(required_metrics)) {
    if (cfg_.command.empty()) {
        throw ConfigError("external evaluator: command must not be empty");
    }
    if (cfg_.process_cap < 1) {
        throw ConfigError("external evaluator: process_cap must be >= 1");
    }
    if (!(cfg_.timeout_seconds > 0.0)) {
        throw ConfigError("external evaluator: timeout must be positive");
    }
}

std::optional<MetricVector> ExternalEvaluator::evaluate(const ActionVector& a) {
    return evaluate_batch({a}).front();
}

std::vector<std::optional<MetricVector>> ExternalEvaluator::evaluate_batch(
    const std::vector<ActionVector>& actions) {
    std::vector<std::optional<MetricVector>> results(actions.size());
    if (actions.empty()) return results;

    std::filesystem::create_directories(cfg_.work_dir);
    const auto timeout = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(cfg_.timeout_seconds));

    std::vector<ChildProcess> running;
    std::size_t next = 0;
    const std::size_t cap = static_cast<std::size_t>(cfg_.process_cap);

    const auto launch = [&](std::size_t slot) {
        char name[32];
        std::snprintf(name, sizeof(name), "call_%06ld", ++call_counter_);
        ChildProcess child;
        child.slot = slot;
        child.dir = cfg_.work_dir / name;
        std::filesystem::create_directories(child.dir);
        const std::filesystem::path params_path = child.dir / "params.txt";
        child.metrics_path = child.dir / "metrics.txt";
        {
            std::ofstream out(params_path);
            out << params_file_content(space_, actions[slot]);
            if (!out) throw EvalError("external evaluator: cannot write " + params_path.string());
        }
        std::vector<std::string> argv = cfg_.command;
        argv.push_back(params_path.string());
        argv.push_back(child.metrics_path.string());
        child.pid = spawn(argv, child.dir / "output.log");
        child.deadline = Clock::now() + timeout;
        running.push_back(std::move(child));
    };

    while (next < actions.size() || !running.empty()) {
        while (next < actions.size() && running.size() < cap) launch(next++);

        bool progressed = false;
        for (std::size_t i = 0; i < running.size();) {
            ChildProcess& child = running[i];
            int status = 0;
            const pid_t r = ::waitpid(child.pid, &status, WNOHANG);
            if (r == child.pid) {
                const bool ok = !child.timed_out && WIFEXITED(status) &&
                                WEXITSTATUS(status) == 0;
                std::optional<MetricVector> metrics;
                if (ok) metrics = parse_metrics_file(child.metrics_path, required_metrics_);
                results[child.slot] = metrics;
                if (metrics) {
                    std::error_code ec;
                    std::filesystem::remove_all(child.dir, ec);  // keep only failures
                }
                running.erase(running.begin() + static_cast<std::ptrdiff_t>(i));
                progressed = true;
                continue;
            }
            if (r < 0 && errno != EINTR) {
                results[child.slot] = std::nullopt;
                running.erase(running.begin() + static_cast<std::ptrdiff_t>(i));
                progressed = true;
                continue;
            }
            if (!child.timed_out && Clock::now() >= child.deadline) {
                child.timed_out = true;
                ::kill(child.pid, SIGKILL);
            }
            ++i;
        }
        if (!progressed && !running.empty()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }
    return results;
}

}  // namespace dynaopt
