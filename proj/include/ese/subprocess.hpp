#ifndef ESE_SUBPROCESS_HPP
#define ESE_SUBPROCESS_HPP

#include <optional>
#include <string>

namespace ese {

// Line-oriented request/response channel to a child process: one request
// line on its stdin, one response line from its stdout. Used by the
// external NLI and reader providers.
class LineProcess {
public:
    // Starts `command` through /bin/sh -c. Does not throw on spawn failure;
    // the first exchange reports it instead.
    LineProcess(std::string command, double timeout_seconds = 5.0);
    ~LineProcess();

    LineProcess(const LineProcess&) = delete;
    LineProcess& operator=(const LineProcess&) = delete;

    // Returns the response line (without newline), or nullopt on timeout,
    // EOF, or a dead child. A failed exchange kills the child.
    std::optional<std::string> exchange(const std::string& request);

    bool alive() const { return pid_ > 0; }

private:
    void shutdown();

    std::string command_;
    double timeout_;
    long pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

}  // namespace ese

#endif
