#include "ringkam/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ringkam {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Integrator: return "IntegratorFailure";
    case ErrorKind::BracketCollision: return "BracketCollision";
    case ErrorKind::RootNotFound: return "RootNotFound";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::GapTooSmall: return "GapTooSmall";
    case ErrorKind::AliasError: return "AliasError";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::AllResonant: return "AllResonant";
    case ErrorKind::SeriesDivergence: return "SeriesDivergence";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::Resonant: return "Resonant";
    case ErrorKind::UnitarityLoss: return "UnitarityLoss";
    case ErrorKind::FiberingDefect: return "FiberingDefect";
    case ErrorKind::NotResonant: return "NotResonant";
    case ErrorKind::AmbiguousNearRational: return "AmbiguousNearRational";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::Io: return "IoError";
    }
    return "Unknown";
}

bool is_analysis_failure(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::AllResonant:
    case ErrorKind::NotConverged:
    case ErrorKind::Resonant:
    case ErrorKind::NotResonant:
        return true;
    default:
        return false;
    }
}

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() noexcept { return g_threads.load(); }

void set_default_threads(int threads) noexcept { g_threads.store(std::max(1, threads)); }

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(std::min(workers, n));
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ringkam
