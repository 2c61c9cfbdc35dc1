#ifndef CAVTEL_ERRORS_HPP
#define CAVTEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cavtel {

// g^2 <= (kappa - gamma)^2 / 16: the damped Rabi frequency is not real.
struct overdamped_error : std::domain_error {
    explicit overdamped_error(const std::string& what) : std::domain_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Conditioned replay asked for an event whose amplitude vanishes.
struct conditioning_error : std::runtime_error {
    explicit conditioning_error(const std::string& what) : std::runtime_error(what) {}
};

// The purge window is too short for the post-click photon to drain.
struct purge_error : std::runtime_error {
    explicit purge_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cavtel

#endif
