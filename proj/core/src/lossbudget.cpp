#include "qmem/lossbudget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmem/hilbert.hpp"

namespace qmem {

namespace {

constexpr double kLossless = std::numeric_limits<double>::infinity();

struct Sums {
  double total = 0.0;
  double exact_only = 0.0;
  bool lower = false;
};

double quality_for(PackageAlloy alloy, double al6061, double al5n) {
  return alloy == PackageAlloy::Al6061 ? al6061 : al5n;
}

}  // namespace

LossChannel LossChannel::participation(std::string name, double p, double q, BoundFlag bound) {
  return {std::move(name), ChannelKind::Participation, p, q, bound};
}

LossChannel LossChannel::seam(std::string name, double y_seam, double g_seam, BoundFlag bound) {
  return {std::move(name), ChannelKind::Seam, y_seam, g_seam, bound};
}

void LossChannel::validate() const {
  if (name.empty()) throw DomainError("loss channel: empty name");
  if (kind == ChannelKind::Participation) {
    if (!(weight > 0.0 && weight <= 1.0)) throw DomainError("loss channel '" + name + "': p must be in (0, 1]");
  } else if (!(weight > 0.0 && std::isfinite(weight))) {
    throw DomainError("loss channel '" + name + "': y_seam must be > 0");
  }
  if (quality && !(*quality > 0.0)) throw DomainError("loss channel '" + name + "': quality must be > 0");
}

QLimit channel_q_limit(const LossChannel& channel) {
  channel.validate();
  if (!channel.quality) throw DomainError("loss channel '" + channel.name + "' has no quality");
  return {*channel.quality / channel.weight, channel.bound};
}

QLimit total_q(const std::vector<LossChannel>& channels) { return compute_budget(channels).total; }

LossBudget compute_budget(const std::vector<LossChannel>& channels, int displayed_digits) {
  if (channels.empty()) throw DomainError("loss budget: no channels");
  if (displayed_digits < 1) throw DomainError("loss budget: displayed digits must be >= 1");
  LossBudget b;
  b.channels = channels;
  b.displayed_digits = displayed_digits;
  Sums raw;
  Sums shown;
  for (const auto& ch : channels) {
    ch.validate();
    if (!ch.quality) {
      b.per_channel.emplace_back(std::nullopt);
      continue;
    }
    const QLimit q = channel_q_limit(ch);
    b.per_channel.emplace_back(q);
    const double rounded = round_sig(q.value, displayed_digits);
    raw.total += 1.0 / q.value;
    shown.total += 1.0 / rounded;
    if (q.bound == BoundFlag::LowerBound) {
      raw.lower = true;
    } else {
      raw.exact_only += 1.0 / q.value;
    }
  }
  if (!(raw.total > 0.0)) throw DomainError("loss budget: no channel carries a quality");
  const BoundFlag flag = raw.lower ? BoundFlag::LowerBound : BoundFlag::Exact;
  b.total = {1.0 / raw.total, flag};
  b.displayed_total = {1.0 / shown.total, flag};
  b.optimistic_total = raw.exact_only > 0.0 ? 1.0 / raw.exact_only : kLossless;
  for (const auto& q : b.per_channel) {
    b.shares.push_back(q ? (1.0 / q->value) / raw.total : 0.0);
    b.displayed_shares.push_back(q ? (1.0 / round_sig(q->value, displayed_digits)) / shown.total : 0.0);
  }
  return b;
}

DominantChannel dominant_channel(const LossBudget& budget, bool displayed_precision) {
  const auto& shares = displayed_precision ? budget.displayed_shares : budget.shares;
  if (shares.empty()) throw DomainError("dominant_channel: empty budget");
  const double top = *std::max_element(shares.begin(), shares.end());
  DominantChannel d;
  d.share = top;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (std::abs(shares[i] - top) <= 1e-12) d.names.push_back(budget.channels[i].name);
  }
  return d;
}

double seam_relevance_q(double y_seam, double g_seam) {
  if (!(y_seam > 0.0) || !(g_seam > 0.0)) throw DomainError("seam_relevance_q: y and g must be > 0");
  return g_seam / y_seam;
}

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  if (digits < 1) throw DomainError("round_sig: digits must be >= 1");
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x)))) - (digits - 1);
  // Multiply or divide by an exact power of ten so 8 * 1e9 comes out as the literal 8e9.
  const double step = std::pow(10.0, std::abs(exponent));
  const double scaled = (exponent >= 0 ? std::abs(x) / step : std::abs(x) * step) * (1.0 + 1e-9);
  const double digits_value = std::floor(scaled + 0.5);
  return std::copysign(exponent >= 0 ? digits_value * step : digits_value / step, x);
}

std::string_view to_string(BoundFlag bound) { return bound == BoundFlag::Exact ? "exact" : "lower"; }

std::string_view to_string(ChannelKind kind) {
  return kind == ChannelKind::Participation ? "participation" : "seam";
}

std::vector<LossChannel> stripline_storage_channels(PackageAlloy alloy) {
  using LC = LossChannel;
  return {
      LC::participation("Lasercut chip bulk", 5e-5, 1.6e7),
      LC::participation("Lasercut chip SA", 5e-10, 8.3e2),
      LC::participation("Qubit chip bulk", 1e-3, 1.6e7),
      LC::participation("Stripline conductor", 2.5e-5, 2.0e5, BoundFlag::LowerBound),
      LC::participation("Stripline MA", 2e-7, 1.7e2, BoundFlag::LowerBound),
      LC::participation("Package conductor", 3.5e-6, quality_for(alloy, 400, 3000)),
      LC::participation("Package MA", 1.5e-8, quality_for(alloy, 10, 20)),
      LC::seam("Purcell cavity seam", 3e-7, 2.5e4),
  };
}

std::vector<LossChannel> three_mode_storage_channels(PackageAlloy alloy) {
  using LC = LossChannel;
  LossChannel ptfe{"PTFE clamp bulk", ChannelKind::Participation, 2e-7, std::nullopt, BoundFlag::Exact};
  return {
      LC::participation("Centerpin bulk dielectric", 3e-5, 1.6e7),
      ptfe,
      LC::participation("Centerpin conductor", 2e-5, 2.0e5, BoundFlag::LowerBound),
      LC::participation("Centerpin MA", 1e-7, 1.7e2, BoundFlag::LowerBound),
      LC::participation("Centerpin SA", 7e-10, 8.3e2),
      LC::participation("Package conductor", 4e-6, quality_for(alloy, 400, 3000)),
      LC::participation("Package MA", 2e-8, quality_for(alloy, 10, 20)),
      LC::seam("Endcap seam", 4e-10, 2.5e4),
      LC::seam("Purcell seam", 3e-7, 2.5e4),
  };
}

std::vector<LossChannel> seam_package_storage_channels(PackageAlloy alloy, double g_seam) {
  using LC = LossChannel;
  return {
      LC::participation("Chip dielectric", 4.4e-5, 1.6e7),
      LC::participation("Stripline conductor", 3.0e-5, 2.0e5, BoundFlag::LowerBound),
      LC::participation("Package conductor", 6.2e-6, quality_for(alloy, 400, 3000)),
      LC::participation("Stripline MA", 2.1e-7, 1.7e2, BoundFlag::LowerBound),
      LC::participation("Package MA", 2.7e-8, quality_for(alloy, 10, 20)),
      LC::seam("Package seam", 1.1e-4, g_seam, BoundFlag::LowerBound),
  };
}

}  // namespace qmem
