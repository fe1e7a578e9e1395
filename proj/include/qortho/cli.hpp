#pragma once

// Command-line front end: configuration, report documents, CSV tables and the
// line-delimited result cache.

#include <iosfwd>
#include <string>
#include <vector>

namespace qortho {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitPrecision = 4;
inline constexpr int kExitIo = 5;
inline constexpr int kExitCacheMismatch = 6;

/// Environment variable overriding the cache directory when --cache-dir is absent.
inline constexpr char const * kCacheDirEnv = "QORTHO_CACHE_DIR";
inline constexpr char const * kToolVersion = "1.0.0";

struct RunConfig {
    unsigned precision = 128;
    double eps = 0.1;
    double kappa = 1e-3;
    double rank_a = 1;
    double rank_b = 1;
    double bound_constant = 0; // set from kSlabConstant
    double x_factor = 3, y_factor = 3, delta_factor = 3;
    std::string cache_dir;
    std::string format = "structured";
    int jobs = 1;
    bool verify_cache = false;

    RunConfig();
    /// Throws DomainError on violated invariants (precision >= 64, caps >= 1, ...).
    void validate() const;
};

/// Runs one command line (without the program name); returns the exit status.
int run_cli(std::vector<std::string> const & args, std::ostream & out, std::ostream & err);

}  // namespace qortho
