#pragma once

// Subprocess-backed density oracle (POSIX): points go to the child as
// lines of d space-separated decimals, one density value per line comes
// back. Any protocol violation (premature exit, non-numeric reply) aborts
// with a clear error.

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <span>
#include <string>

#include "polykr/errors.hpp"
#include "polykr/io.hpp"
#include "polykr/oracle.hpp"

namespace polykr {

class ExternalOracle final : public DensityOracle {
public:
    ExternalOracle(std::string command, int dim) : command_(std::move(command)), dim_(dim) {
        if (dim_ < 1) throw config_error("external oracle: bad dimension");
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw io_error("external oracle: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw io_error("external oracle: fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        to_child_ = fdopen(to_child[1], "w");
        from_child_ = fdopen(from_child[0], "r");
        if (!to_child_ || !from_child_) throw io_error("external oracle: fdopen failed");
    }

    ~ExternalOracle() override {
        if (to_child_) fclose(to_child_);
        if (from_child_) fclose(from_child_);
        if (pid_ > 0) {
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    ExternalOracle(const ExternalOracle&) = delete;
    ExternalOracle& operator=(const ExternalOracle&) = delete;

    int dimension() const override { return dim_; }

private:
    double density(std::span<const double> x) const override {
        std::lock_guard<std::mutex> lock(mu_);
        std::string line;
        for (int j = 0; j < dim_; ++j) {
            if (j) line += ' ';
            line += io::format_double(x[j]);
        }
        line += '\n';
        if (std::fputs(line.c_str(), to_child_) == EOF || std::fflush(to_child_) != 0)
            throw io_error("external oracle: child closed its input (protocol violation)");

        char* reply = nullptr;
        std::size_t cap = 0;
        const ssize_t got = getline(&reply, &cap, from_child_);
        if (got <= 0) {
            free(reply);
            throw io_error("external oracle: no value returned for a point (protocol violation)");
        }
        char* end = nullptr;
        const double value = std::strtod(reply, &end);
        const bool numeric = end != reply;
        for (; numeric && end && *end; ++end) {
            if (*end != '\n' && *end != '\r' && *end != ' ' && *end != '\t') {
                free(reply);
                throw io_error("external oracle: non-numeric reply (protocol violation)");
            }
        }
        free(reply);
        if (!numeric)
            throw io_error("external oracle: non-numeric reply (protocol violation)");
        return value;
    }

    std::string command_;
    int dim_;
    pid_t pid_ = -1;
    mutable std::mutex mu_;
    mutable FILE* to_child_ = nullptr;
    mutable FILE* from_child_ = nullptr;
};

}  // namespace polykr
