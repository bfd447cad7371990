#include "tbc/sut.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "tbc/errors.hpp"

namespace tbc {
namespace {

std::string join_command(const std::vector<std::string>& argv) {
    std::string line;
    for (const auto& a : argv) {
        if (!line.empty()) {
            line += ' ';
        }
        line += a;
    }
    return line;
}

class Pipe {
public:
    Pipe() {
        if (::pipe(fds_) != 0) {
            throw ExecutionError(std::string("pipe: ") + std::strerror(errno));
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    int read_end() const { return fds_[0]; }
    int write_end() const { return fds_[1]; }
    void close_read() { reset(fds_[0]); }
    void close_write() { reset(fds_[1]); }

private:
    static void reset(int& fd) {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
    int fds_[2] = {-1, -1};
};

double run_external(const ExternalSut& sut, const InputVector& input) {
    if (sut.argv.empty()) {
        throw ExecutionError("empty command");
    }
    std::vector<std::string> args = sut.argv;
    for (const auto& v : input) {
        args.push_back(format_value(v));
    }
    const std::string command_line = join_command(args);

    std::vector<char*> raw;
    raw.reserve(args.size() + 1);
    for (auto& a : args) {
        raw.push_back(a.data());
    }
    raw.push_back(nullptr);

    Pipe out;
    Pipe err;
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw ExecutionError(std::string("fork: ") + std::strerror(errno), command_line, "");
    }
    if (pid == 0) {
        ::dup2(out.write_end(), STDOUT_FILENO);
        ::dup2(err.write_end(), STDERR_FILENO);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
        }
        ::close(out.read_end());
        ::close(err.read_end());
        ::execvp(raw[0], raw.data());
        _exit(127);
    }
    out.close_write();
    err.close_write();

    std::string captured_out;
    std::string captured_err;
    const auto deadline = std::chrono::steady_clock::now() + sut.timeout;
    bool timed_out = false;
    pollfd fds[2] = {{out.read_end(), POLLIN, 0}, {err.read_end(), POLLIN, 0}};
    int open_streams = 2;
    char buffer[4096];
    while (open_streams > 0) {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            timed_out = true;
            break;
        }
        const int ready = ::poll(fds, 2, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            break;
        }
        for (int s = 0; s < 2; ++s) {
            if (fds[s].fd < 0 || (fds[s].revents & (POLLIN | POLLHUP | POLLERR)) == 0) {
                continue;
            }
            const ssize_t n = ::read(fds[s].fd, buffer, sizeof buffer);
            if (n > 0) {
                (s == 0 ? captured_out : captured_err).append(buffer, static_cast<std::size_t>(n));
            } else {
                fds[s].fd = -1;
                --open_streams;
            }
        }
    }

    if (timed_out) {
        ::kill(pid, SIGKILL);
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }

    const std::string captured = captured_out + captured_err;
    if (timed_out) {
        throw ExecutionError("timed out after " + std::to_string(sut.timeout.count()) + " ms: " + command_line,
                             command_line, captured);
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const std::string how = WIFEXITED(status) ? "exit status " + std::to_string(WEXITSTATUS(status))
                                                  : "terminated by signal";
        throw ExecutionError(how + ": " + command_line, command_line, captured);
    }
    auto value = parse_sut_output(captured_out);
    if (!value) {
        throw ExecutionError("unparsable output \"" + captured_out + "\" from " + command_line, command_line,
                             captured);
    }
    return *value;
}

} // namespace

std::optional<double> parse_sut_output(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return std::nullopt;
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    std::string_view token = text.substr(first, last - first + 1);
    if (std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); })) {
        return std::nullopt;
    }
    if (token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
        return std::nullopt;
    }
    return value;
}

double execute(const SutHandle& handle, const InputVector& input) {
    if (const auto* builtin = std::get_if<BuiltinSut>(&handle)) {
        const Fixture& f = find_fixture(builtin->id);
        if (!conforms(input, f.interface())) {
            throw ExecutionError("input does not match the parameters of fixture " + f.id);
        }
        if (!builtin->mutant) {
            return f.reference(input);
        }
        if (*builtin->mutant >= f.mutants.size()) {
            throw ExecutionError("fixture " + f.id + " has no mutant #" + std::to_string(*builtin->mutant));
        }
        return f.mutants[*builtin->mutant].function(input);
    }
    return run_external(std::get<ExternalSut>(handle), input);
}

SutHandle handle_for(const InterfaceSpec& spec, const std::string& base_dir, std::chrono::milliseconds timeout) {
    if (spec.command.starts_with(kBuiltinPrefix)) {
        const std::string id = spec.command.substr(kBuiltinPrefix.size());
        find_fixture(id);
        return BuiltinSut{id, std::nullopt};
    }
    ExternalSut sut;
    sut.timeout = timeout;
    std::size_t i = 0;
    const std::string& c = spec.command;
    while (i < c.size()) {
        while (i < c.size() && std::isspace(static_cast<unsigned char>(c[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < c.size() && !std::isspace(static_cast<unsigned char>(c[i]))) {
            ++i;
        }
        if (i > start) {
            sut.argv.push_back(c.substr(start, i - start));
        }
    }
    if (sut.argv.empty()) {
        throw ValidationError("command", "empty command");
    }
    namespace fs = std::filesystem;
    const fs::path program(sut.argv.front());
    if (program.is_relative()) {
        const fs::path local = fs::path(base_dir) / program;
        if (fs::exists(local)) {
            sut.argv.front() = local.string();
        }
    }
    return sut;
}

} // namespace tbc
