#include "uqbench/stratify.hpp"

#include <exception>
#include <mutex>

namespace uqbench {

std::vector<int> equal_width_bins(const std::vector<double>& values, int m,
                                  double lo, double hi) {
  if (m < 1) throw ValidationError("equal_width_bins: need at least one bin");
  if (!(lo < hi)) throw ValidationError("equal_width_bins: empty domain");
  std::vector<int> out(values.size());
  const double scale = static_cast<double>(m) / (hi - lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int bin = static_cast<int>(std::floor((values[i] - lo) * scale));
    out[i] = std::clamp(bin, 0, m - 1);
  }
  return out;
}

FrequencyBins equal_frequency_bins(const std::vector<double>& values, int m) {
  if (m < 1) throw ValidationError("equal_frequency_bins: need at least one bin");
  const std::size_t n = values.size();
  FrequencyBins out;
  if (static_cast<std::size_t>(m) > n) {
    out.warning = "requested " + std::to_string(m) + " bins for " +
                  std::to_string(n) + " records; using " + std::to_string(n);
    m = static_cast<int>(n);
  }
  out.bins_used = m;
  out.assignment.resize(n);
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  // Sizes differ by at most one; the remainder goes to the trailing bins.
  const std::size_t base = n / static_cast<std::size_t>(m);
  const std::size_t rem = n % static_cast<std::size_t>(m);
  std::size_t pos = 0;
  for (int bin = 0; bin < m; ++bin) {
    std::size_t size = base;
    if (static_cast<std::size_t>(bin) >= static_cast<std::size_t>(m) - rem) {
      ++size;
    }
    for (std::size_t j = 0; j < size; ++j) out.assignment[order[pos++]] = bin;
  }
  return out;
}

std::optional<StratifyKey> parse_stratify_key(const std::string& name) {
  if (name == "true-class") return StratifyKey::kTrueClass;
  if (name == "predicted-class") return StratifyKey::kPredictedClass;
  if (name == "measurand") return StratifyKey::kMeasurand;
  if (name == "group") return StratifyKey::kGroup;
  return std::nullopt;
}

std::string to_string(StratifyKey key) {
  switch (key) {
    case StratifyKey::kTrueClass: return "true-class";
    case StratifyKey::kPredictedClass: return "predicted-class";
    case StratifyKey::kMeasurand: return "measurand";
    case StratifyKey::kGroup: return "group";
  }
  return "group";
}

namespace {

std::string require_group(const std::optional<std::string>& group,
                          const std::string& id) {
  if (!group) {
    throw ValidationError("record '" + id + "' carries no group tag");
  }
  return *group;
}

}  // namespace

std::string group_of(const ClassPrediction& r, StratifyKey key) {
  switch (key) {
    case StratifyKey::kTrueClass:
      if (!r.label) {
        throw ValidationError("record '" + r.id + "' has no label to stratify by");
      }
      return std::to_string(*r.label);
    case StratifyKey::kPredictedClass:
      return std::to_string(r.predicted_class());
    case StratifyKey::kMeasurand:
      throw ValidationError("classification records have no measurand");
    case StratifyKey::kGroup:
      return require_group(r.group, r.id);
  }
  return {};
}

std::string group_of(const GaussianPrediction& r, StratifyKey key) {
  switch (key) {
    case StratifyKey::kMeasurand:
      return r.measurand;
    case StratifyKey::kGroup:
      return require_group(r.group, r.id);
    default:
      throw ValidationError("regression records stratify by measurand or group");
  }
}

std::string group_of(const QuantileSet& r, StratifyKey key) {
  switch (key) {
    case StratifyKey::kMeasurand:
      return r.measurand;
    case StratifyKey::kGroup:
      return require_group(r.group, r.id);
    default:
      throw ValidationError("quantile records stratify by measurand or group");
  }
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      const std::size_t chunk = (n + workers - 1) / workers;
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace uqbench
