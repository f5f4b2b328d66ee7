#include <algorithm>
#include <numeric>
#include <string>

#include "coevo/dynamics.hpp"
#include "coevo/error.hpp"
#include "coevo/rng.hpp"

namespace coevo {
namespace {

// Constructive check of the coverage identity over one full period of a
// deterministic schedule: every window of `window` steps starting in
// [0, period) must touch every player.
bool windows_cover(const RevisionSchedule& s, int window, int period) {
  for (int start = 0; start < period; ++start) {
    std::vector<char> seen(static_cast<std::size_t>(s.n()), 0);
    int count = 0;
    for (int k = 0; k < window; ++k) {
      for (int i : s.active_set(start + k)) {
        if (!seen[i]) {
          seen[i] = 1;
          ++count;
        }
      }
    }
    if (count != s.n()) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::synchronous:
      return "synchronous";
    case ScheduleKind::round_robin:
      return "round-robin";
    case ScheduleKind::shuffled_rounds:
      return "shuffled-rounds";
    case ScheduleKind::iid_random:
      return "iid-random";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "synchronous") return ScheduleKind::synchronous;
  if (name == "round-robin") return ScheduleKind::round_robin;
  if (name == "shuffled-rounds") return ScheduleKind::shuffled_rounds;
  if (name == "iid-random") return ScheduleKind::iid_random;
  throw ValidationError("unknown schedule kind '" + std::string(name) +
                        "' (expected synchronous, round-robin, shuffled-rounds or iid-random)");
}

RevisionSchedule::RevisionSchedule(ScheduleKind kind, int n, std::uint64_t seed)
    : kind_(kind), n_(n), seed_(seed) {
  if (n < 2) throw ValidationError("schedule needs n >= 2, got " + std::to_string(n));
  switch (kind_) {
    case ScheduleKind::synchronous:
      window_ = 1;
      break;
    case ScheduleKind::round_robin:
      window_ = n_;
      break;
    case ScheduleKind::shuffled_rounds:
      // A player may go first in one block and last in the next.
      window_ = 2 * n_ - 1;
      break;
    case ScheduleKind::iid_random:
      window_.reset();
      break;
  }
  if (kind_ == ScheduleKind::synchronous || kind_ == ScheduleKind::round_robin) {
    if (!windows_cover(*this, *window_, n_)) {
      throw InternalFault("schedule " + std::string(to_string(kind_)) +
                          " fails its own coverage window");
    }
  }
}

std::vector<int> RevisionSchedule::active_set(std::int64_t t) const {
  if (t < 0) throw std::out_of_range("negative time step");
  switch (kind_) {
    case ScheduleKind::synchronous: {
      std::vector<int> all(static_cast<std::size_t>(n_));
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    case ScheduleKind::round_robin:
      return {static_cast<int>(t % n_)};
    case ScheduleKind::shuffled_rounds: {
      const auto block = static_cast<std::uint64_t>(t / n_);
      std::vector<int> perm(static_cast<std::size_t>(n_));
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(derive_seed(seed_, block));
      rng.shuffle(perm.begin(), perm.end());
      return {perm[static_cast<std::size_t>(t % n_)]};
    }
    case ScheduleKind::iid_random: {
      // Counter-based draw so random access stays O(1).
      const auto bound = static_cast<std::uint64_t>(n_);
      const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
      std::uint64_t counter = static_cast<std::uint64_t>(t) << 8;
      std::uint64_t v;
      do {
        v = derive_seed(seed_ ^ 0x5bd1e995ULL, counter++);
      } while (v >= limit);
      return {static_cast<int>(v % bound)};
    }
  }
  return {};
}

}  // namespace coevo
