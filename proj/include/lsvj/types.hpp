#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsvj {

using Vector = Eigen::VectorXd;

enum class Axis : int { S = 0, V = 1, R = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::S, Axis::V, Axis::R};

inline constexpr int index_of(Axis a) { return static_cast<int>(a); }

const char* axis_name(Axis a);

/// Failure categories; the CLI maps them onto exit codes.
enum class ErrorKind { Config, Domain, Solver, Validation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Extents of a 3D tensor grid, S fastest.
struct Shape3 {
    std::array<std::size_t, 3> n{1, 1, 1};

    std::size_t size() const { return n[0] * n[1] * n[2]; }
    std::size_t extent(Axis a) const { return n[index_of(a)]; }
    std::size_t stride(Axis a) const {
        switch (a) {
            case Axis::S: return 1;
            case Axis::V: return n[0];
            case Axis::R: return n[0] * n[1];
        }
        return 1;
    }
    std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const { return i + n[0] * (j + n[1] * k); }
    std::array<std::size_t, 3> unflat(std::size_t p) const {
        return {p % n[0], (p / n[0]) % n[1], p / (n[0] * n[1])};
    }
    bool operator==(const Shape3&) const = default;
};

}  // namespace lsvj
