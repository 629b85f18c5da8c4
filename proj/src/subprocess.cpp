#include "ese/subprocess.hpp"

#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ese {

LineProcess::LineProcess(std::string command, double timeout_seconds)
    : command_(std::move(command)), timeout_(timeout_seconds) {
    int to_pipe[2];
    int from_pipe[2];
    if (pipe(to_pipe) != 0) return;
    if (pipe(from_pipe) != 0) {
        close(to_pipe[0]);
        close(to_pipe[1]);
        return;
    }
    pid_t pid = fork();
    if (pid < 0) {
        close(to_pipe[0]); close(to_pipe[1]);
        close(from_pipe[0]); close(from_pipe[1]);
        return;
    }
    if (pid == 0) {
        dup2(to_pipe[0], STDIN_FILENO);
        dup2(from_pipe[1], STDOUT_FILENO);
        close(to_pipe[0]); close(to_pipe[1]);
        close(from_pipe[0]); close(from_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_pipe[0]);
    close(from_pipe[1]);
    pid_ = pid;
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
}

LineProcess::~LineProcess() { shutdown(); }

void LineProcess::shutdown() {
    if (to_child_ >= 0) { close(to_child_); to_child_ = -1; }
    if (from_child_ >= 0) { close(from_child_); from_child_ = -1; }
    if (pid_ > 0) {
        kill(static_cast<pid_t>(pid_), SIGTERM);
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
        pid_ = -1;
    }
}

std::optional<std::string> LineProcess::exchange(const std::string& request) {
    if (pid_ <= 0) return std::nullopt;

    std::string line = request;
    line.push_back('\n');
    std::size_t written = 0;
    while (written < line.size()) {
        ssize_t n = write(to_child_, line.data() + written, line.size() - written);
        if (n <= 0) { shutdown(); return std::nullopt; }
        written += static_cast<std::size_t>(n);
    }

    int deadline_ms = static_cast<int>(timeout_ * 1000.0);
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string out = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!out.empty() && out.back() == '\r') out.pop_back();
            return out;
        }
        struct pollfd pfd{};
        pfd.fd = from_child_;
        pfd.events = POLLIN;
        int rc = poll(&pfd, 1, deadline_ms);
        if (rc <= 0) { shutdown(); return std::nullopt; }  // timeout or error
        char chunk[4096];
        ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) { shutdown(); return std::nullopt; }  // EOF
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace ese
